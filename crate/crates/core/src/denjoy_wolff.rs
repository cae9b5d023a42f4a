//! The Denjoy-Wolff point of an analytic self-map of the disk or the upper
//! half-plane: classification into the five cases, the Julia-Caratheodory
//! derivative at boundary points, and a harness that follows the points of
//! a pointwise convergent sequence of maps.
//!
//! Maps are iterated in their own coordinates and classified in disk
//! coordinates. An interior fixed point of a self-map that is not the
//! identity is unique, so plain iteration is accelerated by Newton steps
//! whenever they reduce the fixed-point residual.

use std::collections::VecDeque;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domains::{cayley_c, cayley_inv_c, disk_defect_from_half_plane, DomainTag, SpherePoint};
use crate::numerics::richardson_windows_real;
use crate::output::{fmt_f64, point_fields, write_table};
use crate::selfmaps::{MapError, SelfMap};

type C = Complex64;

/// Disk-coordinate distance to the boundary below which an iterate counts
/// as escaping.
pub const ESCAPE_DEFECT: f64 = 1e-9;
/// Consecutive escaping iterates required before a boundary verdict.
pub const ESCAPE_RUN: usize = 10;
/// Tolerance on `|phi'|` for the rotation verdict.
pub const ROTATION_TOL: f64 = 1e-8;
/// Default radii `1 - h` for Julia-Caratheodory quotients.
pub const JC_STEPS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub cesaro_window: usize,
    /// Starting point in the map's own coordinates; `None` means 0 on the
    /// disk and `i` on the half-plane.
    pub start: Option<C>,
    pub newton: bool,
}

impl Default for DwOptions {
    fn default() -> Self {
        DwOptions {
            tol: 1e-12,
            max_iter: 1_000_000,
            cesaro_window: 64,
            start: None,
            newton: true,
        }
    }
}

impl DwOptions {
    pub fn with_start(self, start: Option<C>) -> Self {
        DwOptions { start, ..self }
    }

    fn validate(&self) -> Result<(), DwError> {
        if !(self.tol > 0.0) || self.max_iter == 0 || self.cesaro_window == 0 {
            return Err(DwError::InvalidOptions(format!(
                "need tol > 0, max_iter > 0, cesaro_window > 0 (got {}, {}, {})",
                self.tol, self.max_iter, self.cesaro_window
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DwCase {
    Identity,
    BoundaryConstant,
    InteriorRotation,
    InteriorAttracting,
    BoundaryAttracting,
}

impl DwCase {
    pub fn name(&self) -> &'static str {
        match self {
            DwCase::Identity => "identity",
            DwCase::BoundaryConstant => "boundary-constant",
            DwCase::InteriorRotation => "interior-rotation",
            DwCase::InteriorAttracting => "interior-attracting",
            DwCase::BoundaryAttracting => "boundary-attracting",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwResult {
    /// In the map's own coordinates; `None` for the identity.
    pub point: Option<SpherePoint>,
    pub case: DwCase,
    /// `|phi'|` at an interior point, the angular derivative at a boundary
    /// point.
    pub jc_derivative: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl DwResult {
    pub fn finite_point(&self) -> Option<C> {
        self.point.and_then(|p| p.as_finite())
    }

    pub fn is_interior(&self) -> bool {
        matches!(
            self.case,
            DwCase::InteriorAttracting | DwCase::InteriorRotation
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DwError {
    #[error("the identity map has no Denjoy-Wolff point")]
    IdentityMap,
    #[error("no convergence after {max_iter} iterations (last iterate {last})")]
    NoConvergence { max_iter: usize, last: C },
    #[error("no interior fixed point found and the averaged iterates stay inside")]
    NoFixedPointFound,
    #[error("Julia-Caratheodory quotients exceed 1 (estimate {0}); not the Denjoy-Wolff point")]
    DivergentQuotient(f64),
    #[error("{0} is not a boundary point of the domain")]
    NotBoundaryPoint(SpherePoint),
    #[error("maps of the {0:?} domain must be conjugated to the disk or half-plane first")]
    UnsupportedDomain(DomainTag),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

fn default_start(domain: DomainTag) -> C {
    match domain {
        DomainTag::HalfPlane => C::new(0.0, 1.0),
        _ => C::new(0.0, 0.0),
    }
}

fn to_disk(domain: DomainTag, x: C) -> C {
    match domain {
        DomainTag::HalfPlane => cayley_c(x),
        _ => x,
    }
}

fn from_disk(domain: DomainTag, w: C) -> C {
    match domain {
        DomainTag::HalfPlane => cayley_inv_c(w),
        _ => w,
    }
}

fn inside(domain: DomainTag, x: C) -> bool {
    x.is_finite()
        && match domain {
            DomainTag::HalfPlane => x.im > 0.0,
            _ => x.norm() < 1.0,
        }
}

/// `1 - |w|` in disk coordinates, accurate near the boundary.
fn boundary_defect(domain: DomainTag, x: C) -> f64 {
    match domain {
        DomainTag::HalfPlane => {
            if x.is_finite() {
                disk_defect_from_half_plane(SpherePoint::Finite(x))
            } else {
                0.0
            }
        }
        _ => 1.0 - x.norm(),
    }
}

fn check_domain(m: &SelfMap) -> Result<DomainTag, DwError> {
    match m.domain() {
        DomainTag::SlitPlane => Err(DwError::UnsupportedDomain(DomainTag::SlitPlane)),
        d => Ok(d),
    }
}

fn constant_result(domain: DomainTag, g: SpherePoint) -> DwResult {
    let interior = domain.contains(&g);
    DwResult {
        point: Some(g),
        case: if interior {
            DwCase::InteriorAttracting
        } else {
            DwCase::BoundaryConstant
        },
        jc_derivative: if interior { Some(0.0) } else { None },
        iterations: 0,
        residual: 0.0,
    }
}

/// Denjoy-Wolff point by (Newton-accelerated) iteration from the default
/// start. Fails with [`DwError::NoConvergence`] on rotations without a
/// reachable fixed point and on slow parabolic maps; see [`solve`].
pub fn denjoy_wolff(m: &SelfMap, opts: &DwOptions) -> Result<DwResult, DwError> {
    opts.validate()?;
    let domain = check_domain(m)?;
    if m.is_identity() {
        return Err(DwError::IdentityMap);
    }
    if let Some(g) = m.constant_value() {
        return Ok(constant_result(domain, g));
    }
    if domain == DomainTag::HalfPlane {
        if let Some(alpha) = m.structural_alpha() {
            if alpha >= 1.0 {
                return Ok(DwResult {
                    point: Some(SpherePoint::Infinity),
                    case: DwCase::BoundaryAttracting,
                    jc_derivative: Some(1.0 / alpha),
                    iterations: 0,
                    residual: 0.0,
                });
            }
        }
    }
    iterate(m, domain, opts)
}

fn iterate(m: &SelfMap, domain: DomainTag, opts: &DwOptions) -> Result<DwResult, DwError> {
    let mut x = opts
        .start
        .filter(|s| inside(domain, *s))
        .unwrap_or_else(|| default_start(domain));
    let (mut v, mut d) = m.eval_jet(x)?;
    let mut escaping: VecDeque<C> = VecDeque::with_capacity(ESCAPE_RUN);
    for k in 1..=opts.max_iter {
        let step = v - x;
        if step.norm() <= opts.tol * x.norm().max(1.0) {
            return finish_converged(m, domain, x, k, opts);
        }
        let mut accepted = false;
        if opts.newton {
            let den = d - 1.0;
            if den.norm() > 0.0 {
                let xn = x - step / den;
                if inside(domain, xn) {
                    if let Ok((vn, dn)) = m.eval_jet(xn) {
                        if (vn - xn).norm() < 0.5 * step.norm() {
                            x = xn;
                            v = vn;
                            d = dn;
                            accepted = true;
                        }
                    }
                }
            }
        }
        if !accepted {
            x = v;
            if !x.is_finite() {
                return finish_boundary(m, domain, x, k);
            }
            (v, d) = m.eval_jet(x)?;
        }
        if boundary_defect(domain, x) < ESCAPE_DEFECT {
            let w = to_disk(domain, x);
            if escaping.len() == ESCAPE_RUN {
                escaping.pop_front();
            }
            escaping.push_back(w / w.norm());
            if escaping.len() == ESCAPE_RUN {
                let last = *escaping.back().unwrap();
                let spread = escaping
                    .iter()
                    .map(|u| (u - last).norm())
                    .fold(0.0, f64::max);
                if spread < ESCAPE_DEFECT {
                    return finish_boundary(m, domain, x, k);
                }
            }
        } else {
            escaping.clear();
        }
    }
    Err(DwError::NoConvergence {
        max_iter: opts.max_iter,
        last: x,
    })
}

fn finish_converged(
    m: &SelfMap,
    domain: DomainTag,
    mut x: C,
    iterations: usize,
    opts: &DwOptions,
) -> Result<DwResult, DwError> {
    let (mut v, mut d) = m.eval_jet(x)?;
    for _ in 0..3 {
        let den = d - 1.0;
        if den.norm() == 0.0 {
            break;
        }
        let xn = x - (v - x) / den;
        if !inside(domain, xn) {
            break;
        }
        match m.eval_jet(xn) {
            Ok((vn, dn)) if (vn - xn).norm() < (v - x).norm() => {
                x = xn;
                v = vn;
                d = dn;
            }
            _ => break,
        }
    }
    if boundary_defect(domain, x) < ESCAPE_DEFECT {
        return finish_boundary(m, domain, x, iterations);
    }
    classify_interior(x, v, d, iterations, opts)
}

fn classify_interior(
    x: C,
    v: C,
    d: C,
    iterations: usize,
    opts: &DwOptions,
) -> Result<DwResult, DwError> {
    let mult = d.norm();
    let case = if mult < 1.0 - ROTATION_TOL {
        DwCase::InteriorAttracting
    } else if mult <= 1.0 + ROTATION_TOL {
        DwCase::InteriorRotation
    } else {
        return Err(MapError::Invalid(format!(
            "repelling fixed point {x} with |phi'| = {mult}; not a self-map"
        ))
        .into());
    };
    let residual = (v - x).norm();
    debug_assert!(residual.is_finite() && opts.tol > 0.0);
    Ok(DwResult {
        point: Some(SpherePoint::Finite(x)),
        case,
        jc_derivative: Some(mult),
        iterations,
        residual,
    })
}

/// Projects an escaping iterate to the boundary, polishes it by Newton's
/// method on the boundary when the map can be evaluated there, and
/// attaches the Julia-Caratheodory derivative.
fn finish_boundary(
    m: &SelfMap,
    domain: DomainTag,
    x: C,
    iterations: usize,
) -> Result<DwResult, DwError> {
    if domain == DomainTag::HalfPlane && (!x.is_finite() || x.norm() > 1e12) {
        let jc = jc_derivative(m, SpherePoint::Infinity, &JC_STEPS).ok();
        return Ok(DwResult {
            point: Some(SpherePoint::Infinity),
            case: DwCase::BoundaryAttracting,
            jc_derivative: jc,
            iterations,
            residual: boundary_defect(domain, x),
        });
    }
    let project = |p: C| match domain {
        DomainTag::HalfPlane => C::new(p.re, 0.0),
        _ => p / p.norm(),
    };
    let p0 = project(x);
    let mut p = p0;
    let mut polished = None;
    for _ in 0..30 {
        let Ok((v, d)) = m.eval_jet(p) else { break };
        let r = (v - p).norm();
        if r <= 1e-13 * p.norm().max(1.0) {
            polished = Some((p, v, d));
            break;
        }
        let den = d - 1.0;
        if den.norm() == 0.0 {
            break;
        }
        let pn = project(p - (v - p) / den);
        if !pn.is_finite() || (pn - p0).norm() > 1e-6 * p0.norm().max(1.0) {
            break;
        }
        p = pn;
    }
    let point = if polished.is_some() { p } else { p0 };
    let (jc, residual) = match polished {
        Some((p, v, d)) => {
            let jc = match domain {
                // phi'(x) is real and positive at a boundary fixed point of
                // a half-plane map analytic across the axis
                DomainTag::HalfPlane => d.re,
                _ => d.norm(),
            };
            (Some(jc), (v - p).norm())
        }
        None => (
            jc_derivative(m, SpherePoint::Finite(point), &JC_STEPS).ok(),
            boundary_defect(domain, x),
        ),
    };
    Ok(DwResult {
        point: Some(SpherePoint::Finite(point)),
        case: DwCase::BoundaryAttracting,
        jc_derivative: jc,
        iterations,
        residual,
    })
}

/// Fallback after [`denjoy_wolff`] fails to converge: damped Newton from a
/// 5x5 grid of interior starts, then Cesaro averages of the orbit.
pub fn rotation_resolve(m: &SelfMap, opts: &DwOptions) -> Result<DwResult, DwError> {
    opts.validate()?;
    let domain = check_domain(m)?;
    if m.is_identity() {
        return Err(DwError::IdentityMap);
    }
    let grid = [-0.6, -0.3, 0.0, 0.3, 0.6];
    for &a in &grid {
        for &b in &grid {
            let start = from_disk(domain, C::new(a, b));
            if let Some((x, v, d, its)) =
                damped_newton(m, domain, start, opts.tol, opts.max_iter.min(100))
            {
                if boundary_defect(domain, x) < ESCAPE_DEFECT {
                    return finish_boundary(m, domain, x, its);
                }
                if d.norm() <= 1.0 + ROTATION_TOL {
                    return classify_interior(x, v, d, its, opts);
                }
            }
        }
    }
    cesaro_fallback(m, domain, opts)
}

fn damped_newton(
    m: &SelfMap,
    domain: DomainTag,
    start: C,
    tol: f64,
    max_steps: usize,
) -> Option<(C, C, C, usize)> {
    let mut x = start;
    let (mut v, mut d) = m.eval_jet(x).ok()?;
    for k in 0..=max_steps {
        let r = (v - x).norm();
        if r <= tol * x.norm().max(1.0) {
            return Some((x, v, d, k));
        }
        let den = d - 1.0;
        if den.norm() == 0.0 {
            return None;
        }
        let step = -(v - x) / den;
        let mut t = 1.0;
        loop {
            let xn = x + step * t;
            if inside(domain, xn) {
                if let Ok((vn, dn)) = m.eval_jet(xn) {
                    if (vn - xn).norm() < r {
                        x = xn;
                        v = vn;
                        d = dn;
                        break;
                    }
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                return None;
            }
        }
    }
    None
}

fn cesaro_fallback(m: &SelfMap, domain: DomainTag, opts: &DwOptions) -> Result<DwResult, DwError> {
    let n = opts.max_iter.min(200_000);
    let window = opts.cesaro_window;
    let mut x = default_start(domain);
    let mut tail: VecDeque<C> = VecDeque::with_capacity(window);
    for _ in 0..n {
        x = m.eval(x)?;
        if !x.is_finite() {
            break;
        }
        if tail.len() == window {
            tail.pop_front();
        }
        tail.push_back(to_disk(domain, x));
    }
    if tail.is_empty() {
        return Err(DwError::NoFixedPointFound);
    }
    let avg = tail.iter().sum::<C>() / tail.len() as f64;
    if 1.0 - avg.norm() > 1e-4 {
        return Err(DwError::NoFixedPointFound);
    }
    let spread = tail.iter().map(|w| (w - avg).norm()).fold(0.0, f64::max);
    let zeta = avg / avg.norm();
    let point = match domain {
        DomainTag::HalfPlane if (zeta - 1.0).norm() < 1e-12 => SpherePoint::Infinity,
        DomainTag::HalfPlane => SpherePoint::Finite(C::new(cayley_inv_c(zeta).re, 0.0)),
        _ => SpherePoint::Finite(zeta),
    };
    Ok(DwResult {
        point: Some(point),
        case: DwCase::BoundaryAttracting,
        jc_derivative: jc_derivative(m, point, &JC_STEPS).ok(),
        iterations: n,
        residual: spread,
    })
}

/// Iteration, then the rotation fallback; the identity is reported as a
/// result rather than an error.
pub fn solve(m: &SelfMap, opts: &DwOptions) -> Result<DwResult, DwError> {
    match denjoy_wolff(m, opts) {
        Err(DwError::IdentityMap) => Ok(DwResult {
            point: None,
            case: DwCase::Identity,
            jc_derivative: None,
            iterations: 0,
            residual: 0.0,
        }),
        Err(DwError::NoConvergence { .. }) => rotation_resolve(m, opts),
        other => other,
    }
}

/// Angular derivative at a boundary fixed point: the limit of
/// `(1 - |phi(r zeta)|)/(1 - r)` as `r -> 1`, in disk coordinates,
/// extrapolated over `h = 1 - r`.
pub fn jc_derivative(m: &SelfMap, point: SpherePoint, steps: &[f64]) -> Result<f64, DwError> {
    let domain = check_domain(m)?;
    let zeta = match (domain, point) {
        (DomainTag::HalfPlane, SpherePoint::Infinity) => {
            if let Some(alpha) = m.structural_alpha() {
                if alpha > 0.0 {
                    return Ok(1.0 / alpha);
                }
                return Err(DwError::DivergentQuotient(f64::INFINITY));
            }
            C::new(1.0, 0.0)
        }
        (DomainTag::HalfPlane, SpherePoint::Finite(x))
            if x.im.abs() <= 1e-9 * x.norm().max(1.0) =>
        {
            cayley_c(C::new(x.re, 0.0))
        }
        (DomainTag::Disk, SpherePoint::Finite(z)) if (z.norm() - 1.0).abs() <= 1e-9 => z / z.norm(),
        _ => return Err(DwError::NotBoundaryPoint(point)),
    };
    let mut qs = Vec::with_capacity(steps.len());
    for &h in steps {
        let w = zeta * (1.0 - h);
        let defect = match domain {
            DomainTag::HalfPlane => match m.evaluate(SpherePoint::Finite(cayley_inv_c(w)))? {
                SpherePoint::Infinity => 0.0,
                v => disk_defect_from_half_plane(v),
            },
            _ => 1.0 - m.eval(w)?.norm(),
        };
        qs.push(defect / h);
    }
    let est = richardson_windows_real(steps, &qs, 3);
    if qs.len() >= 3 && qs[qs.len() - 3..].iter().all(|&q| q > 1.0 + 1e-6) {
        return Err(DwError::DivergentQuotient(est.value));
    }
    Ok(est.value.max(0.0))
}

/// The first `n` iterates `phi(start), phi(phi(start)), ...`.
pub fn orbit(m: &SelfMap, start: C, n: usize) -> Result<Vec<C>, MapError> {
    let mut out = Vec::with_capacity(n);
    let mut x = start;
    for _ in 0..n {
        x = m.eval(x)?;
        out.push(x);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnessRow {
    pub n: usize,
    pub point: SpherePoint,
    pub distance: f64,
    pub iterations: usize,
}

fn point_distance(a: SpherePoint, b: SpherePoint) -> f64 {
    match (a, b) {
        (SpherePoint::Finite(x), SpherePoint::Finite(y)) => (x - y).norm(),
        _ => a.chordal_distance(&b),
    }
}

/// Denjoy-Wolff points of `family(n)` for each `n` in `ns`, with their
/// distance to the point of `limit` (chordal when either is infinite).
pub fn theorem1_harness<F>(
    family: F,
    limit: &SelfMap,
    ns: &[usize],
    opts: &DwOptions,
) -> Result<(DwResult, Vec<HarnessRow>), DwError>
where
    F: Fn(usize) -> Result<SelfMap, MapError> + Sync,
{
    if limit.is_identity() {
        return Err(DwError::IdentityMap);
    }
    let target = solve(limit, opts)?;
    let target_point = target.point.ok_or(DwError::IdentityMap)?;
    let rows = ns
        .par_iter()
        .map(|&n| {
            let m = family(n)?;
            if m.is_identity() {
                return Err(DwError::IdentityMap);
            }
            let r = solve(&m, opts)?;
            let point = r.point.ok_or(DwError::IdentityMap)?;
            Ok(HarnessRow {
                n,
                point,
                distance: point_distance(point, target_point),
                iterations: r.iterations,
            })
        })
        .collect::<Result<Vec<_>, DwError>>()?;
    Ok((target, rows))
}

pub fn write_harness_csv<W: Write>(
    out: W,
    comments: &[(String, String)],
    rows: &[HarnessRow],
) -> io::Result<()> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let [re, im] = point_fields(Some(r.point));
            vec![
                r.n.to_string(),
                re,
                im,
                fmt_f64(r.distance),
                r.iterations.to_string(),
            ]
        })
        .collect();
    write_table(
        out,
        comments,
        &["n", "re", "im", "distance", "iterations"],
        &body,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{MeasureRep, NevanlinnaData, Support};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn disk_poly(cs: &[C]) -> SelfMap {
        SelfMap::polynomial(DomainTag::Disk, cs.to_vec()).unwrap()
    }

    fn opts() -> DwOptions {
        DwOptions::default()
    }

    #[test]
    fn squaring_map_is_interior_attracting_at_zero() {
        let r = denjoy_wolff(
            &disk_poly(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
            &opts(),
        )
        .unwrap();
        assert_eq!(r.point, Some(SpherePoint::Finite(c(0.0, 0.0))));
        assert_eq!(r.case, DwCase::InteriorAttracting);
        assert_eq!(r.jc_derivative, Some(0.0));
    }

    #[test]
    fn constant_maps() {
        let one = SelfMap::constant(DomainTag::Disk, SpherePoint::Finite(c(1.0, 0.0))).unwrap();
        let r = denjoy_wolff(&one, &opts()).unwrap();
        assert_eq!(r.case, DwCase::BoundaryConstant);
        assert_eq!(r.point, Some(SpherePoint::Finite(c(1.0, 0.0))));
        let inner = SelfMap::constant(DomainTag::Disk, SpherePoint::Finite(c(0.2, 0.1))).unwrap();
        assert_eq!(
            denjoy_wolff(&inner, &opts()).unwrap().case,
            DwCase::InteriorAttracting
        );
    }

    #[test]
    fn half_affine_goes_to_the_boundary() {
        let m = SelfMap::affine(DomainTag::Disk, c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        let iterates = orbit(&m, c(0.0, 0.0), 3).unwrap();
        assert_eq!(iterates, vec![c(0.5, 0.0), c(0.75, 0.0), c(0.875, 0.0)]);
        let r = denjoy_wolff(&m, &opts()).unwrap();
        assert_eq!(r.case, DwCase::BoundaryAttracting);
        assert_abs_diff_eq!(
            (r.finite_point().unwrap() - 1.0).norm(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(r.jc_derivative.unwrap(), 0.5, epsilon = 1e-12);
        let q = jc_derivative(&m, SpherePoint::Finite(c(1.0, 0.0)), &JC_STEPS).unwrap();
        assert_abs_diff_eq!(q, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn nevanlinna_with_large_alpha_goes_to_infinity() {
        let zero = MeasureRep::zero(Support::RealLine);
        let shift = SelfMap::nevanlinna(NevanlinnaData::new(1.0, 1.0, zero.clone()).unwrap());
        let r = denjoy_wolff(&shift, &opts()).unwrap();
        assert_eq!(r.point, Some(SpherePoint::Infinity));
        let double = SelfMap::nevanlinna(NevanlinnaData::new(2.0, 0.0, zero.clone()).unwrap());
        assert_eq!(
            jc_derivative(&double, SpherePoint::Infinity, &JC_STEPS).unwrap(),
            0.5
        );
        let ident = SelfMap::nevanlinna(NevanlinnaData::new(1.0, 0.0, zero).unwrap());
        assert_eq!(denjoy_wolff(&ident, &opts()), Err(DwError::IdentityMap));
        assert_eq!(solve(&ident, &opts()).unwrap().case, DwCase::Identity);
    }

    #[test]
    fn rotation_is_classified() {
        let rot = SelfMap::affine(DomainTag::Disk, c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        let r = solve(&rot, &opts()).unwrap();
        assert_eq!(r.case, DwCase::InteriorRotation);
        assert_eq!(r.point, Some(SpherePoint::Finite(c(0.0, 0.0))));
    }

    #[test]
    fn elliptic_automorphism_matches_quadratic_formula() {
        // conjugate of a rotation by the disk automorphism moving 0 to a
        let a = c(0.2, 0.3);
        let e = C::from_polar(1.0, 0.9);
        // phi = T o R o T^{-1} with T(w) = (w + a)/(1 + conj(a) w)
        let (ta, tb, tc, td) = (c(1.0, 0.0), a, a.conj(), c(1.0, 0.0));
        let (ia, ib, ic, id) = (c(1.0, 0.0), -a, -a.conj(), c(1.0, 0.0));
        let r = [e, c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let mul = |p: [C; 4], q: [C; 4]| {
            [
                p[0] * q[0] + p[1] * q[2],
                p[0] * q[1] + p[1] * q[3],
                p[2] * q[0] + p[3] * q[2],
                p[2] * q[1] + p[3] * q[3],
            ]
        };
        let mm = mul([ta, tb, tc, td], mul(r, [ia, ib, ic, id]));
        let phi = SelfMap::moebius(DomainTag::Disk, mm[0], mm[1], mm[2], mm[3]).unwrap();
        // fixed points solve c l^2 + (d - a) l - b = 0
        let (qa, qb, qc) = (mm[2], mm[3] - mm[0], -mm[1]);
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        let roots = [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)];
        let inner = *roots.iter().find(|r| r.norm() < 1.0).unwrap();
        let res = solve(&phi, &opts()).unwrap();
        assert_eq!(res.case, DwCase::InteriorRotation);
        assert_abs_diff_eq!(
            (res.finite_point().unwrap() - inner).norm(),
            0.0,
            epsilon = 1e-12
        );
        let direct = rotation_resolve(&phi, &opts()).unwrap();
        assert_abs_diff_eq!(
            (direct.finite_point().unwrap() - inner).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn scaled_rotation_conjugation() {
        let phi = disk_poly(&[c(0.1, 0.2), c(0.3, -0.1), c(0.2, 0.0)]);
        let base = solve(&phi, &opts()).unwrap().finite_point().unwrap();
        for t in [0.4, 2.0, -1.3] {
            let mu = C::from_polar(1.0, t);
            let tilde = SelfMap::scaled_rotation(mu, phi.clone()).unwrap();
            let p = solve(&tilde, &opts()).unwrap().finite_point().unwrap();
            assert_abs_diff_eq!((p - base / mu).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn uniqueness_from_many_starts() {
        let phi = disk_poly(&[c(0.1, 0.2), c(0.3, -0.1), c(0.2, 0.0)]);
        let reference = solve(&phi, &opts()).unwrap().finite_point().unwrap();
        let grid = [-0.6, -0.3, 0.0, 0.3, 0.6];
        for &a in &grid {
            for &b in &grid {
                let (x, ..) = damped_newton(&phi, DomainTag::Disk, c(a, b), 1e-13, 100).unwrap();
                assert!((x - reference).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn small_budgets_never_report_an_interior_point() {
        let m = SelfMap::affine(DomainTag::Disk, c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        for max_iter in [3, 20, 45, 1000] {
            let short = DwOptions { max_iter, ..opts() };
            match solve(&m, &short) {
                Ok(r) => {
                    assert_eq!(r.case, DwCase::BoundaryAttracting, "max_iter {max_iter}");
                    assert_eq!(r.point, Some(SpherePoint::Finite(c(1.0, 0.0))));
                }
                Err(e) => assert_eq!(e, DwError::NoFixedPointFound, "max_iter {max_iter}"),
            }
        }
    }

    #[test]
    fn half_plane_boundary_fixed_point() {
        // z/2 - 1 fixes -2 with derivative 1/2
        let m = SelfMap::affine(DomainTag::HalfPlane, c(0.5, 0.0), c(-1.0, 0.0)).unwrap();
        let r = denjoy_wolff(&m, &opts()).unwrap();
        assert_eq!(r.case, DwCase::BoundaryAttracting);
        assert_abs_diff_eq!(
            (r.finite_point().unwrap() - c(-2.0, 0.0)).norm(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(r.jc_derivative.unwrap(), 0.5, epsilon = 1e-12);
        let q = jc_derivative(&m, SpherePoint::Finite(c(-2.0, 0.0)), &JC_STEPS).unwrap();
        assert_abs_diff_eq!(q, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn harness_and_csv() {
        let limit = SelfMap::affine(DomainTag::Disk, c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        let fam = |n: usize| {
            let s = 1.0 - 1.0 / n as f64;
            SelfMap::affine(DomainTag::Disk, c(0.5 * s, 0.0), c(0.5 * s, 0.0))
        };
        let (target, rows) = theorem1_harness(fam, &limit, &[10, 100, 1000], &opts()).unwrap();
        assert_eq!(target.point, Some(SpherePoint::Finite(c(1.0, 0.0))));
        for r in &rows {
            let n = r.n as f64;
            assert_abs_diff_eq!(
                r.point.as_finite().unwrap().re,
                (n - 1.0) / (n + 1.0),
                epsilon = 1e-12
            );
        }
        let mut buf = Vec::new();
        write_harness_csv(&mut buf, &[], &rows).unwrap();
        let t = crate::output::read_table(&buf[..]).unwrap();
        assert_eq!(t.headers, vec!["n", "re", "im", "distance", "iterations"]);
        assert_eq!(t.rows.len(), 3);
        let constant = theorem1_harness(|_| Ok(limit.clone()), &limit, &[1, 2], &opts()).unwrap();
        assert!(constant.1.iter().all(|r| r.distance == 0.0));
    }

    #[test]
    fn slit_plane_maps_are_rejected() {
        let f = SelfMap::eta_ratio(crate::measures::ClassFData::point_mass(2.0).unwrap());
        assert_eq!(
            denjoy_wolff(&f, &opts()),
            Err(DwError::UnsupportedDomain(DomainTag::SlitPlane))
        );
    }
}
