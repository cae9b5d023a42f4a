//! Subordination functions as Denjoy-Wolff points of parametrized families
//! of self-maps, on grids of parameters that may include boundary points.
//!
//! | setting | family | `omega2` | `omega1` |
//! |---|---|---|---|
//! | disk-one-phi | `z phi(l)` | | DW point |
//! | circle-two-var / circle-two-phi | `z1 phi1(z2 phi2(l))` | DW point | `z2 phi2(omega2)` |
//! | halfplane-two-var / halfplane-one-var | `z1 + psi1(z2 + psi2(l))` | DW point | `z2 + psi2(omega2)` |
//! | positive-line | `z f1(z f2(l))` | `z f2(omega1)` | DW point |
//!
//! One-variable settings use the diagonal `z1 = z2 = z`. Positive-line
//! members are conjugated to the upper half-plane by the wedge map of
//! angle `arg z` before solving, and the point is mapped back.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::denjoy_wolff::{solve, DwCase, DwError, DwOptions};
use crate::domains::{wedge_map_closure, DomainTag, SpherePoint};
use crate::numerics::extrapolate_to_zero;
use crate::output::{fmt_f64, point_fields, write_table};
use crate::selfmaps::{radial_limit, MapError, MapFamily, SelfMap};

type C = Complex64;

/// Heights at which `|psi(iy)/(iy)|` is sampled for the growth condition.
pub const GROWTH_HEIGHTS: [f64; 3] = [1e2, 1e4, 1e6];
/// Largest allowed `|psi(iy)/(iy)|` at the last height.
pub const GROWTH_BOUND: f64 = 1e-3;
/// Approach distances for limits at degenerate parameters.
pub const APPROACH_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Error)]
pub enum SubordinationError {
    #[error("growth condition fails: |psi(iy)/(iy)| = {ratios:?} at y = 1e2, 1e4, 1e6")]
    GrowthConditionViolated { ratios: [f64; 3] },
    #[error("parameter {0} is outside the closed parameter domain")]
    BadParameter(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Dw(#[from] DwError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    DiskOnePhi,
    CircleTwoPhi,
    CircleTwoVar,
    HalfplaneTwoVar,
    HalfplaneOneVar,
    PositiveLine,
}

impl Setting {
    pub fn name(&self) -> &'static str {
        match self {
            Setting::DiskOnePhi => "disk-one-phi",
            Setting::CircleTwoPhi => "circle-two-phi",
            Setting::CircleTwoVar => "circle-two-var",
            Setting::HalfplaneTwoVar => "halfplane-two-var",
            Setting::HalfplaneOneVar => "halfplane-one-var",
            Setting::PositiveLine => "positive-line",
        }
    }

    pub fn parse(s: &str) -> Option<Setting> {
        [
            Setting::DiskOnePhi,
            Setting::CircleTwoPhi,
            Setting::CircleTwoVar,
            Setting::HalfplaneTwoVar,
            Setting::HalfplaneOneVar,
            Setting::PositiveLine,
        ]
        .into_iter()
        .find(|t| t.name() == s)
    }

    pub fn two_variables(&self) -> bool {
        matches!(self, Setting::CircleTwoVar | Setting::HalfplaneTwoVar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub z1: SpherePoint,
    pub z2: SpherePoint,
}

impl Param {
    pub fn one(z: C) -> Self {
        Param {
            z1: SpherePoint::Finite(z),
            z2: SpherePoint::Finite(z),
        }
    }

    pub fn two(z1: C, z2: C) -> Self {
        Param {
            z1: SpherePoint::Finite(z1),
            z2: SpherePoint::Finite(z2),
        }
    }

    pub fn infinity() -> Self {
        Param {
            z1: SpherePoint::Infinity,
            z2: SpherePoint::Infinity,
        }
    }
}

/// How a row's values were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowKind {
    /// Denjoy-Wolff solve of the member map.
    Solved,
    /// Closed form: constant members, zero and infinite parameters.
    Exact,
    /// Extrapolated from interior parameters because the member map is the
    /// identity.
    ContinuityLimit,
    /// No limit exists or none is known.
    NoValue,
    Failed,
}

impl RowKind {
    pub fn name(&self) -> &'static str {
        match self {
            RowKind::Solved => "solved",
            RowKind::Exact => "exact",
            RowKind::ContinuityLimit => "limit",
            RowKind::NoValue => "none",
            RowKind::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubordinationRow {
    pub param: Param,
    pub omega1: Option<SpherePoint>,
    pub omega2: Option<SpherePoint>,
    /// Defect of the defining equations; NaN when they cannot be evaluated
    /// at the computed point.
    pub residual: f64,
    pub iterations: usize,
    pub case: Option<DwCase>,
    pub kind: RowKind,
    pub error: Option<String>,
    /// The Denjoy-Wolff point in the solver's coordinates, for warm starts.
    #[serde(skip)]
    pub native: Option<C>,
}

impl SubordinationRow {
    fn failed(param: Param, e: impl ToString) -> Self {
        SubordinationRow {
            param,
            omega1: None,
            omega2: None,
            residual: f64::NAN,
            iterations: 0,
            case: None,
            kind: RowKind::Failed,
            error: Some(e.to_string()),
            native: None,
        }
    }

    fn exact(param: Param, omega1: Option<SpherePoint>, omega2: Option<SpherePoint>) -> Self {
        SubordinationRow {
            param,
            omega1,
            omega2,
            residual: 0.0,
            iterations: 0,
            case: None,
            kind: if omega1.is_some() || omega2.is_some() {
                RowKind::Exact
            } else {
                RowKind::NoValue
            },
            error: None,
            native: None,
        }
    }

    pub fn omega1_finite(&self) -> Option<C> {
        self.omega1.and_then(|p| p.as_finite())
    }

    pub fn omega2_finite(&self) -> Option<C> {
        self.omega2.and_then(|p| p.as_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinationOptions {
    pub dw: DwOptions,
    /// Seed each solve with the previous point of its row.
    pub warm_start: bool,
    /// Grid points per row; `None` treats the whole grid as one row.
    pub row_length: Option<usize>,
}

impl Default for SubordinationOptions {
    fn default() -> Self {
        SubordinationOptions {
            dw: DwOptions::default(),
            warm_start: true,
            row_length: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubordinationResult {
    pub setting: Setting,
    pub rows: Vec<SubordinationRow>,
}

impl SubordinationResult {
    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.kind == RowKind::Failed)
            .count()
    }

    pub fn write_csv<W: Write>(&self, out: W, comments: &[(String, String)]) -> io::Result<()> {
        let two = self.setting.two_variables();
        let mut headers = if two {
            vec!["z1_re", "z1_im", "z2_re", "z2_im"]
        } else {
            vec!["z_re", "z_im"]
        };
        headers.extend([
            "omega1_re",
            "omega1_im",
            "omega2_re",
            "omega2_im",
            "residual",
            "iterations",
            "case",
            "kind",
            "error",
        ]);
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut v: Vec<String> = point_fields(Some(r.param.z1)).to_vec();
                if two {
                    v.extend(point_fields(Some(r.param.z2)));
                }
                v.extend(point_fields(r.omega1));
                v.extend(point_fields(r.omega2));
                v.push(if r.residual.is_nan() {
                    String::new()
                } else {
                    fmt_f64(r.residual)
                });
                v.push(r.iterations.to_string());
                v.push(r.case.map(|c| c.name().to_string()).unwrap_or_default());
                v.push(r.kind.name().to_string());
                v.push(r.error.clone().unwrap_or_default());
                v
            })
            .collect();
        write_table(out, comments, &headers, &rows)
    }
}

/// `|psi(iy)/(iy)|` at [`GROWTH_HEIGHTS`]; must be non-increasing and end
/// below [`GROWTH_BOUND`].
pub fn check_growth(psi: &SelfMap) -> Result<[f64; 3], SubordinationError> {
    let mut ratios = [0.0; 3];
    for (r, &y) in ratios.iter_mut().zip(&GROWTH_HEIGHTS) {
        *r = match psi.evaluate(SpherePoint::Finite(C::new(0.0, y)))? {
            SpherePoint::Finite(v) => v.norm() / y,
            SpherePoint::Infinity => f64::INFINITY,
        };
    }
    let ok = ratios[1] <= ratios[0] && ratios[2] <= ratios[1] && ratios[2] < GROWTH_BOUND;
    if ok {
        Ok(ratios)
    } else {
        Err(SubordinationError::GrowthConditionViolated { ratios })
    }
}

/// Value at a point of the closed domain, falling back to the radial limit
/// at boundary points where the map cannot be evaluated directly.
pub fn eval_closure(m: &SelfMap, p: SpherePoint) -> Result<SpherePoint, MapError> {
    match m.evaluate(p) {
        Ok(v) => Ok(v),
        Err(e) => match p {
            SpherePoint::Finite(z) if m.domain().on_boundary(&p) => {
                radial_limit(m, z).map(SpherePoint::Finite).map_err(|_| e)
            }
            _ => Err(e),
        },
    }
}

fn add(a: C, p: SpherePoint) -> SpherePoint {
    match p {
        SpherePoint::Finite(v) => SpherePoint::Finite(a + v),
        SpherePoint::Infinity => SpherePoint::Infinity,
    }
}

fn mul(a: C, p: SpherePoint) -> Option<SpherePoint> {
    match p {
        SpherePoint::Finite(v) => Some(SpherePoint::Finite(a * v)),
        SpherePoint::Infinity if a == C::new(0.0, 0.0) => None,
        SpherePoint::Infinity => Some(SpherePoint::Infinity),
    }
}

fn gap(a: SpherePoint, b: SpherePoint) -> f64 {
    match (a, b) {
        (SpherePoint::Finite(x), SpherePoint::Finite(y)) => (x - y).norm(),
        (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        _ => f64::INFINITY,
    }
}

/// A family of maps together with the setting it is solved in.
#[derive(Debug, Clone)]
pub struct Subordinator {
    setting: Setting,
    family: MapFamily,
}

impl Subordinator {
    pub fn disk(phi: SelfMap) -> Result<Self, SubordinationError> {
        Ok(Subordinator {
            setting: Setting::DiskOnePhi,
            family: MapFamily::disk_multiplicative(phi)?,
        })
    }

    pub fn circle(
        phi1: SelfMap,
        phi2: SelfMap,
        diagonal: bool,
    ) -> Result<Self, SubordinationError> {
        Ok(Subordinator {
            setting: if diagonal {
                Setting::CircleTwoPhi
            } else {
                Setting::CircleTwoVar
            },
            family: MapFamily::circle_two_var(phi1, phi2)?,
        })
    }

    /// Checks the growth condition of both maps.
    pub fn halfplane(
        psi1: SelfMap,
        psi2: SelfMap,
        diagonal: bool,
    ) -> Result<Self, SubordinationError> {
        check_growth(&psi1)?;
        check_growth(&psi2)?;
        Ok(Subordinator {
            setting: if diagonal {
                Setting::HalfplaneOneVar
            } else {
                Setting::HalfplaneTwoVar
            },
            family: MapFamily::halfplane_additive(psi1, psi2)?,
        })
    }

    pub fn positive_line(f1: SelfMap, f2: SelfMap) -> Result<Self, SubordinationError> {
        Ok(Subordinator {
            setting: Setting::PositiveLine,
            family: MapFamily::positive_line(f1, f2)?,
        })
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn family(&self) -> &MapFamily {
        &self.family
    }

    fn normalize(&self, p: Param) -> Param {
        if self.setting.two_variables() {
            p
        } else {
            Param { z1: p.z1, z2: p.z1 }
        }
    }

    fn check_param(&self, p: &Param) -> Result<(), SubordinationError> {
        let ok = |z: &SpherePoint| match self.setting {
            Setting::DiskOnePhi | Setting::CircleTwoPhi | Setting::CircleTwoVar => {
                matches!(z, SpherePoint::Finite(_)) && DomainTag::Disk.in_closure(z)
            }
            Setting::HalfplaneTwoVar | Setting::HalfplaneOneVar => {
                DomainTag::HalfPlane.in_closure(z)
            }
            Setting::PositiveLine => match z {
                SpherePoint::Infinity => true,
                SpherePoint::Finite(v) => {
                    v.is_finite() && (v.im > 0.0 || (v.im == 0.0 && v.re >= 0.0))
                }
            },
        };
        if ok(&p.z1) && ok(&p.z2) {
            Ok(())
        } else {
            Err(SubordinationError::BadParameter(format!(
                "({}, {})",
                p.z1, p.z2
            )))
        }
    }

    /// An interior parameter at distance about `eps` from `p`: radially
    /// inward on the disk, vertically up on the half-plane.
    pub fn approach(&self, p: Param, eps: f64) -> Param {
        let step = |z: SpherePoint| match (self.family.parameter_domain(), z) {
            (_, SpherePoint::Infinity) => SpherePoint::Finite(C::new(0.0, 1.0 / eps)),
            (DomainTag::Disk, SpherePoint::Finite(v)) => SpherePoint::Finite(v * (1.0 - eps)),
            (_, SpherePoint::Finite(v)) => SpherePoint::Finite(v + C::new(0.0, eps)),
        };
        Param {
            z1: step(p.z1),
            z2: step(p.z2),
        }
    }

    pub fn solve_point(&self, p: Param, opts: &DwOptions) -> SubordinationRow {
        self.solve_inner(self.normalize(p), opts, true)
    }

    fn solve_inner(&self, p: Param, opts: &DwOptions, allow_limit: bool) -> SubordinationRow {
        if let Err(e) = self.check_param(&p) {
            return SubordinationRow::failed(p, e);
        }
        let res = match self.setting {
            Setting::DiskOnePhi => self.solve_disk(p, opts, allow_limit),
            Setting::CircleTwoPhi | Setting::CircleTwoVar => {
                self.solve_circle(p, opts, allow_limit)
            }
            Setting::HalfplaneTwoVar | Setting::HalfplaneOneVar => {
                self.solve_halfplane(p, opts, allow_limit)
            }
            Setting::PositiveLine => self.solve_positive(p, opts, allow_limit),
        };
        res.unwrap_or_else(|e| SubordinationRow::failed(p, e))
    }

    /// Denjoy-Wolff point of a member, or `None` when the member is the
    /// identity.
    fn member_point(
        &self,
        m: &SelfMap,
        opts: &DwOptions,
    ) -> Result<Option<(SpherePoint, usize, DwCase)>, SubordinationError> {
        let r = solve(m, opts)?;
        Ok(r.point.map(|pt| (pt, r.iterations, r.case)))
    }

    /// Row for a parameter whose member is the identity, from interior
    /// parameters approaching it.
    fn continuity_limit(
        &self,
        p: Param,
        opts: &DwOptions,
    ) -> Result<SubordinationRow, SubordinationError> {
        let mut v1 = Vec::new();
        let mut v2 = Vec::new();
        let mut iterations = 0;
        for &eps in &APPROACH_EPS {
            let r = self.solve_inner(self.approach(p, eps), opts, false);
            iterations += r.iterations;
            if let Some(e) = r.error {
                return Err(SubordinationError::BadParameter(format!(
                    "approach to the identity: {e}"
                )));
            }
            v1.push(r.omega1_finite());
            v2.push(r.omega2_finite());
        }
        let limit = |vs: Vec<Option<C>>| -> Option<(C, f64)> {
            let vs: Vec<C> = vs.into_iter().collect::<Option<_>>()?;
            let full = extrapolate_to_zero(&APPROACH_EPS, &vs);
            let tail = extrapolate_to_zero(&APPROACH_EPS[1..], &vs[1..]);
            Some((full, (full - tail).norm()))
        };
        let (o1, o2) = (limit(v1), limit(v2));
        let residual = o1.map_or(0.0, |x| x.1).max(o2.map_or(0.0, |x| x.1));
        Ok(SubordinationRow {
            param: p,
            omega1: o1.map(|x| SpherePoint::Finite(x.0)),
            omega2: o2.map(|x| SpherePoint::Finite(x.0)),
            residual,
            iterations,
            case: Some(DwCase::Identity),
            kind: if o1.is_some() || o2.is_some() {
                RowKind::ContinuityLimit
            } else {
                RowKind::NoValue
            },
            error: None,
            native: None,
        })
    }

    fn solved_row(
        p: Param,
        omega1: Option<SpherePoint>,
        omega2: Option<SpherePoint>,
        residual: f64,
        solved: (SpherePoint, usize, DwCase),
    ) -> SubordinationRow {
        SubordinationRow {
            param: p,
            omega1,
            omega2,
            residual,
            iterations: solved.1,
            case: Some(solved.2),
            kind: RowKind::Solved,
            error: None,
            native: solved.0.as_finite(),
        }
    }

    fn solve_disk(
        &self,
        p: Param,
        opts: &DwOptions,
        allow_limit: bool,
    ) -> Result<SubordinationRow, SubordinationError> {
        let z = p.z1.as_finite().expect("checked");
        if z == C::new(0.0, 0.0) {
            return Ok(SubordinationRow::exact(
                p,
                Some(SpherePoint::Finite(z)),
                None,
            ));
        }
        let m = self.family.build(z, z)?;
        let Some(solved) = self.member_point(&m, opts)? else {
            return if allow_limit {
                self.continuity_limit(p, opts)
            } else {
                Err(DwError::IdentityMap.into())
            };
        };
        let omega = solved.0;
        let residual = eval_closure(self.family.first(), omega)
            .ok()
            .and_then(|v| mul(z, v))
            .map_or(f64::NAN, |v| gap(omega, v));
        Ok(Self::solved_row(p, Some(omega), None, residual, solved))
    }

    fn solve_circle(
        &self,
        p: Param,
        opts: &DwOptions,
        allow_limit: bool,
    ) -> Result<SubordinationRow, SubordinationError> {
        let (z1, z2) = (
            p.z1.as_finite().expect("checked"),
            p.z2.as_finite().expect("checked"),
        );
        let phi1 = self.family.first();
        let phi2 = self.family.second().expect("two maps");
        let m = self.family.build(z1, z2)?;
        let Some(solved) = self.member_point(&m, opts)? else {
            return if allow_limit {
                self.continuity_limit(p, opts)
            } else {
                Err(DwError::IdentityMap.into())
            };
        };
        let omega2 = solved.0;
        let b = eval_closure(phi2, omega2).ok();
        let omega1 = b.and_then(|b| mul(z2, b));
        let a = omega1.and_then(|w| eval_closure(phi1, w).ok());
        let residual = match (omega1, a) {
            (Some(w1), Some(a)) => {
                let mut r = mul(z1, a).map_or(f64::INFINITY, |v| gap(omega2, v));
                if self.setting == Setting::CircleTwoPhi && z1 != C::new(0.0, 0.0) {
                    // omega1 phi1(omega1) = omega2 phi2(omega2) = omega1 omega2 / z
                    if let (Some(w1), Some(w2), Some(a), Some(b)) = (
                        w1.as_finite(),
                        omega2.as_finite(),
                        a.as_finite(),
                        b.and_then(|b| b.as_finite()),
                    ) {
                        let common = w1 * w2 / z1;
                        r = r
                            .max((w1 * a - common).norm())
                            .max((w2 * b - common).norm());
                    }
                }
                r
            }
            _ => f64::NAN,
        };
        Ok(Self::solved_row(p, omega1, Some(omega2), residual, solved))
    }

    fn solve_halfplane(
        &self,
        p: Param,
        opts: &DwOptions,
        allow_limit: bool,
    ) -> Result<SubordinationRow, SubordinationError> {
        let psi1 = self.family.first();
        let psi2 = self.family.second().expect("two maps");
        let (z1, z2) = match (p.z1, p.z2) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => {
                return Ok(SubordinationRow::exact(
                    p,
                    Some(SpherePoint::Infinity),
                    Some(SpherePoint::Infinity),
                ));
            }
            // omega2 -> infinity and omega1 -> z2 + psi2(inf)
            (SpherePoint::Infinity, SpherePoint::Finite(z2)) => {
                let o1 = psi2.value_at_infinity().map(|v| add(z2, v));
                return Ok(SubordinationRow::exact(p, o1, Some(SpherePoint::Infinity)));
            }
            // omega2 -> z1 + psi1(inf) when psi1(inf) exists and is nonzero
            (SpherePoint::Finite(z1), SpherePoint::Infinity) => {
                let o2 = psi1
                    .value_at_infinity()
                    .filter(|v| *v != SpherePoint::Finite(C::new(0.0, 0.0)))
                    .map(|v| add(z1, v));
                return Ok(SubordinationRow::exact(p, Some(SpherePoint::Infinity), o2));
            }
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => (a, b),
        };
        let m = self.family.build(z1, z2)?;
        let Some(solved) = self.member_point(&m, opts)? else {
            return if allow_limit {
                self.continuity_limit(p, opts)
            } else {
                Err(DwError::IdentityMap.into())
            };
        };
        let omega2 = solved.0;
        let b = eval_closure(psi2, omega2).ok();
        let omega1 = b.map(|b| add(z2, b));
        let a = omega1.and_then(|w| eval_closure(psi1, w).ok());
        let residual = match (omega1, a) {
            (Some(w1), Some(a)) => {
                let mut r = gap(omega2, add(z1, a));
                if self.setting == Setting::HalfplaneOneVar {
                    // omega1 + psi1(omega1) = omega2 + psi2(omega2) = omega1 + omega2 - z
                    if let (Some(w1), Some(w2), Some(a), Some(b)) = (
                        w1.as_finite(),
                        omega2.as_finite(),
                        a.as_finite(),
                        b.and_then(|b| b.as_finite()),
                    ) {
                        let common = w1 + w2 - z1;
                        r = r
                            .max((w1 + a - common).norm())
                            .max((w2 + b - common).norm());
                    }
                }
                r
            }
            _ => f64::NAN,
        };
        Ok(Self::solved_row(p, omega1, Some(omega2), residual, solved))
    }

    fn solve_positive(
        &self,
        p: Param,
        opts: &DwOptions,
        allow_limit: bool,
    ) -> Result<SubordinationRow, SubordinationError> {
        let f1 = self.family.first();
        let f2 = self.family.second().expect("two maps");
        let z = match p.z1 {
            SpherePoint::Infinity => {
                return Ok(SubordinationRow::exact(
                    p,
                    Some(SpherePoint::Infinity),
                    None,
                ));
            }
            SpherePoint::Finite(z) if z == C::new(0.0, 0.0) => {
                let zero = Some(SpherePoint::Finite(z));
                return Ok(SubordinationRow::exact(p, zero, zero));
            }
            SpherePoint::Finite(z) => z,
        };
        let companion = |omega: SpherePoint| f2.evaluate(omega).ok().and_then(|v| mul(z, v));
        let residual_at = |omega: SpherePoint, omega2: Option<SpherePoint>| {
            omega2
                .and_then(|w| f1.evaluate(w).ok())
                .and_then(|v| mul(z, v))
                .map_or(f64::NAN, |v| gap(omega, v))
        };
        if let Some(g) = self.family.build(z, z)?.constant_value() {
            let o2 = companion(g);
            let mut row = SubordinationRow::exact(p, Some(g), o2);
            row.residual = residual_at(g, o2);
            return Ok(row);
        }
        let theta = z.arg();
        let m = self.family.build_halfplane(z)?;
        let Some(solved) = self.member_point(&m, opts)? else {
            return if allow_limit {
                self.continuity_limit(p, opts)
            } else {
                Err(DwError::IdentityMap.into())
            };
        };
        let omega = match solved.0 {
            SpherePoint::Infinity => SpherePoint::Infinity,
            SpherePoint::Finite(l) => {
                SpherePoint::Finite(wedge_map_closure(l, theta).map_err(MapError::from)?)
            }
        };
        let o2 = companion(omega);
        let residual = residual_at(omega, o2);
        Ok(Self::solved_row(p, Some(omega), o2, residual, solved))
    }

    /// Solves every grid point. Rows of `row_length` consecutive points are
    /// solved concurrently; within a row each solve is seeded with the
    /// previous point when `warm_start` is set.
    pub fn solve_grid(&self, grid: &[Param], opts: &SubordinationOptions) -> SubordinationResult {
        let len = opts.row_length.unwrap_or(grid.len()).max(1);
        let rows: Vec<SubordinationRow> = grid
            .par_chunks(len)
            .flat_map_iter(|chunk| {
                let mut hint: Option<C> = None;
                let mut out = Vec::with_capacity(chunk.len());
                for &p in chunk {
                    let dw = if opts.warm_start {
                        opts.dw.with_start(hint.or(opts.dw.start))
                    } else {
                        opts.dw
                    };
                    let row = self.solve_point(p, &dw);
                    if row.case.is_some_and(|c| c != DwCase::InteriorRotation) {
                        hint = row.native.or(hint);
                    }
                    out.push(row);
                }
                out
            })
            .collect();
        SubordinationResult {
            setting: self.setting,
            rows,
        }
    }

    /// The row at a boundary parameter compared with values at interior
    /// parameters approaching it. Returns the row, the approach rows and
    /// the gap between the row and the extrapolated approach values.
    pub fn boundary_continuity(
        &self,
        p: Param,
        eps: &[f64],
        opts: &DwOptions,
    ) -> (SubordinationRow, Vec<SubordinationRow>, f64) {
        let row = self.solve_point(p, opts);
        let approach: Vec<SubordinationRow> = eps
            .iter()
            .map(|&e| self.solve_point(self.approach(p, e), opts))
            .collect();
        let pick = |r: &SubordinationRow| match self.setting {
            Setting::DiskOnePhi | Setting::PositiveLine => r.omega1_finite(),
            _ => r.omega2_finite(),
        };
        let vals: Option<Vec<C>> = approach.iter().map(pick).collect();
        let defect = match (vals, pick(&row)) {
            (Some(vs), Some(b)) if !vs.is_empty() => (extrapolate_to_zero(eps, &vs) - b).norm(),
            _ => f64::INFINITY,
        };
        (row, approach, defect)
    }
}

pub fn subordinate_disk(
    phi: SelfMap,
    grid: &[C],
    opts: &SubordinationOptions,
) -> Result<SubordinationResult, SubordinationError> {
    let s = Subordinator::disk(phi)?;
    let params: Vec<Param> = grid.iter().map(|&z| Param::one(z)).collect();
    Ok(s.solve_grid(&params, opts))
}

pub fn subordinate_circle_two_var(
    phi1: SelfMap,
    phi2: SelfMap,
    grid: &[(C, C)],
    opts: &SubordinationOptions,
) -> Result<SubordinationResult, SubordinationError> {
    let s = Subordinator::circle(phi1, phi2, false)?;
    let params: Vec<Param> = grid.iter().map(|&(a, b)| Param::two(a, b)).collect();
    Ok(s.solve_grid(&params, opts))
}

pub fn subordinate_circle_one_var(
    phi1: SelfMap,
    phi2: SelfMap,
    grid: &[C],
    opts: &SubordinationOptions,
) -> Result<SubordinationResult, SubordinationError> {
    let s = Subordinator::circle(phi1, phi2, true)?;
    let params: Vec<Param> = grid.iter().map(|&z| Param::one(z)).collect();
    Ok(s.solve_grid(&params, opts))
}

/// Two-variable solve on `grid`; with `diagonal` set only `z1` of each
/// parameter is used.
pub fn subordinate_halfplane(
    psi1: SelfMap,
    psi2: SelfMap,
    grid: &[Param],
    diagonal: bool,
    opts: &SubordinationOptions,
) -> Result<SubordinationResult, SubordinationError> {
    let s = Subordinator::halfplane(psi1, psi2, diagonal)?;
    Ok(s.solve_grid(grid, opts))
}

pub fn subordinate_positive_line(
    f1: SelfMap,
    f2: SelfMap,
    grid: &[SpherePoint],
    opts: &SubordinationOptions,
) -> Result<SubordinationResult, SubordinationError> {
    let s = Subordinator::positive_line(f1, f2)?;
    let params: Vec<Param> = grid.iter().map(|&z| Param { z1: z, z2: z }).collect();
    Ok(s.solve_grid(&params, opts))
}
