//! Free additive convolution on the real line and free multiplicative
//! convolution on the circle and on `[0, inf)`, computed from subordination
//! functions, with Stieltjes inversion to densities and atom detection.
//!
//! Unit point masses are handled exactly: they translate, rotate or scale
//! the other measure. Everything else goes through the subordination
//! solvers, evaluated at `x + i eps` (or `(1 - eps) e^{-i theta}` on the
//! circle) for each `eps` of the schedule and extrapolated to `eps = 0`.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::denjoy_wolff::DwOptions;
use crate::measures::{Atom, AtomPosition, MeasureError, MeasureRep, Support};
use crate::numerics::{richardson_windows_real, Extrapolated};
use crate::output::{fmt_f64, write_table};
use crate::selfmaps::{MapError, SelfMap};
use crate::subordination::{
    Param, SubordinationError, SubordinationOptions, SubordinationRow, Subordinator,
};

type C = Complex64;

pub const DEFAULT_EPS: [f64; 5] = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
/// Samples per Richardson window.
pub const RICHARDSON_WINDOW: usize = 3;
/// Detected atoms lighter than this are dropped.
pub const ATOM_MIN_MASS: f64 = 1e-6;
/// Extrapolation defect above which a grid point is flagged.
pub const FLAG_DEFECT: f64 = 1e-6;
/// Moments up to this order must vanish for a measure to count as Haar.
const HAAR_MOMENTS: i32 = 16;

#[derive(Debug, Error)]
pub enum FreeConvError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Subordination(#[from] SubordinationError),
    #[error("first moment {0} vanishes; only the Haar measure may have zero mean")]
    ZeroMean(C),
    #[error("the unit point mass at 0 is not allowed on the positive line")]
    PointMassAtZero,
    #[error("bad eps schedule: {0}")]
    BadSchedule(String),
    #[error("extrapolation failed at {x}: {reason}")]
    ExtrapolationDiverged { x: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `subordination`, or the exact rule used for point masses and Haar.
    pub method: String,
    /// Trapezoid integral of the density over the grid plus atom masses.
    pub total_mass: f64,
    pub mass_defect: f64,
    /// Grid points where a negative extrapolated density was set to zero.
    pub clamped: usize,
    /// Grid points whose extrapolation defect exceeds [`FLAG_DEFECT`].
    pub flagged: Vec<f64>,
    /// Grid points where the transform could not be evaluated.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralOutput {
    pub x_grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Per-point extrapolation defect.
    pub defect: Vec<f64>,
    /// `(location, mass)`; angles on the circle.
    pub atoms: Vec<(f64, f64)>,
    pub eps_schedule: Vec<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    atoms: Vec<AtomRecord>,
    eps_schedule: &'a [f64],
    diagnostics: &'a Diagnostics,
}

#[derive(Serialize)]
struct AtomRecord {
    location: f64,
    mass: f64,
}

impl SpectralOutput {
    pub fn write_csv<W: Write>(&self, out: W, comments: &[(String, String)]) -> io::Result<()> {
        let rows: Vec<Vec<String>> = self
            .x_grid
            .iter()
            .zip(&self.density)
            .zip(&self.defect)
            .map(|((x, d), e)| vec![fmt_f64(*x), fmt_f64(*d), fmt_f64(*e)])
            .collect();
        write_table(out, comments, &["x", "density", "defect"], &rows)
    }

    /// Atoms, eps schedule and diagnostics as JSON.
    pub fn sidecar_json(&self) -> String {
        let s = Sidecar {
            atoms: self
                .atoms
                .iter()
                .map(|&(location, mass)| AtomRecord { location, mass })
                .collect(),
            eps_schedule: &self.eps_schedule,
            diagnostics: &self.diagnostics,
        };
        serde_json::to_string_pretty(&s).expect("plain data serializes")
    }

    fn exact(x_grid: &[f64], density: Vec<f64>, atoms: Vec<(f64, f64)>, method: &str) -> Self {
        let mut out = SpectralOutput {
            x_grid: x_grid.to_vec(),
            defect: vec![0.0; density.len()],
            density,
            atoms,
            eps_schedule: Vec::new(),
            diagnostics: Diagnostics {
                method: method.into(),
                total_mass: 0.0,
                mass_defect: 0.0,
                clamped: 0,
                flagged: Vec::new(),
                failures: Vec::new(),
            },
        };
        out.tally_mass();
        out
    }

    fn tally_mass(&mut self) {
        let dens: f64 = self
            .x_grid
            .windows(2)
            .zip(self.density.windows(2))
            .filter(|(_, d)| d[0].is_finite() && d[1].is_finite())
            .map(|(x, d)| 0.5 * (x[1] - x[0]) * (d[0] + d[1]))
            .sum();
        let total = dens + self.atoms.iter().map(|a| a.1).sum::<f64>();
        self.diagnostics.total_mass = total;
        self.diagnostics.mass_defect = (total - 1.0).abs();
    }

    pub fn density_at(&self, x: f64) -> Option<f64> {
        self.x_grid
            .iter()
            .position(|&g| (g - x).abs() <= 1e-12 * x.abs().max(1.0))
            .map(|k| self.density[k])
    }
}

fn check_schedule(eps: &[f64]) -> Result<(), FreeConvError> {
    if eps.is_empty() {
        return Err(FreeConvError::BadSchedule("empty".into()));
    }
    if eps.iter().any(|&e| !(e >= 1e-9) || !e.is_finite()) {
        return Err(FreeConvError::BadSchedule(
            "every eps must be finite and >= 1e-9".into(),
        ));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FreeConvError::BadSchedule(
            "eps must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// `-(1/pi) Im G(x + i eps)` extrapolated to `eps = 0`; the defect is the
/// spread of the windowed extrapolants.
pub fn stieltjes_invert<E: ToString>(
    g: impl Fn(C) -> Result<C, E>,
    x: f64,
    eps: &[f64],
) -> Result<Extrapolated<f64>, FreeConvError> {
    check_schedule(eps)?;
    let mut vals = Vec::with_capacity(eps.len());
    for &e in eps {
        let v = g(C::new(x, e)).map_err(|err| FreeConvError::ExtrapolationDiverged {
            x,
            reason: err.to_string(),
        })?;
        vals.push(-v.im / PI);
    }
    let r = richardson_windows_real(eps, &vals, RICHARDSON_WINDOW);
    if !r.value.is_finite() {
        return Err(FreeConvError::ExtrapolationDiverged {
            x,
            reason: "non-finite extrapolant".into(),
        });
    }
    Ok(r)
}

/// Masses `lim eps (-Im G(a + i eps))` at the candidate locations; those
/// below [`ATOM_MIN_MASS`] or not evaluable are dropped.
pub fn detect_atoms<E>(
    g: impl Fn(C) -> Result<C, E>,
    candidates: &[f64],
    eps: &[f64],
) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &a in candidates {
        if out
            .iter()
            .any(|o| (o.0 - a).abs() <= 1e-12 * a.abs().max(1.0))
        {
            continue;
        }
        let vals: Option<Vec<f64>> = eps
            .iter()
            .map(|&e| g(C::new(a, e)).ok().map(|v| -e * v.im))
            .collect();
        let Some(vals) = vals else { continue };
        let m = richardson_windows_real(eps, &vals, RICHARDSON_WINDOW).value;
        if m.is_finite() && m >= ATOM_MIN_MASS {
            out.push((a, m.min(1.0)));
        }
    }
    out
}

/// Bounds `mean +- 4 std` of `mu1 ⊞ mu2`.
pub fn suggest_support(mu1: &MeasureRep, mu2: &MeasureRep) -> (f64, f64) {
    let mean = mu1.moment(1).re + mu2.moment(1).re;
    let var = (mu1.moment(2).re - mu1.moment(1).re.powi(2))
        + (mu2.moment(2).re - mu2.moment(1).re.powi(2));
    let sd = var.max(0.0).sqrt();
    (mean - 4.0 * sd, mean + 4.0 * sd)
}

fn finite_atoms(mu: &MeasureRep) -> Vec<(f64, f64)> {
    mu.atoms()
        .iter()
        .filter_map(|a| match a.position {
            AtomPosition::At(x) if a.mass > 0.0 => Some((x, a.mass)),
            _ => None,
        })
        .collect()
}

/// Locations `a op b` of pairs of atoms with `mu1{a} + mu2{b} > 1`, the only
/// places the convolution can have atoms.
fn atom_candidates(mu1: &MeasureRep, mu2: &MeasureRep, op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = Vec::new();
    for (a, ma) in finite_atoms(mu1) {
        for (b, mb) in finite_atoms(mu2) {
            if ma + mb > 1.0 + 1e-12 {
                out.push(op(a, b));
            }
        }
    }
    out
}

/// Solves the subordination problem on `eps.len()` rows of `xs.len()`
/// parameters each and maps every row through `f`.
fn sample_rows(
    sub: &Subordinator,
    params: Vec<Param>,
    row_length: usize,
    dw: &DwOptions,
    f: impl Fn(&SubordinationRow) -> Result<C, String>,
) -> Vec<Result<C, String>> {
    let opts = SubordinationOptions {
        dw: *dw,
        warm_start: true,
        row_length: Some(row_length),
    };
    sub.solve_grid(&params, &opts)
        .rows
        .iter()
        .map(|r| match &r.error {
            Some(e) => Err(e.clone()),
            None => f(r),
        })
        .collect()
}

/// Density and defect per grid point from samples laid out eps-major.
fn assemble(
    x_grid: &[f64],
    eps: &[f64],
    samples: &[Result<f64, String>],
    atoms: Vec<(f64, f64)>,
    method: &str,
) -> SpectralOutput {
    let n = x_grid.len();
    let mut density = Vec::with_capacity(n);
    let mut defect = Vec::with_capacity(n);
    let mut diagnostics = Diagnostics {
        method: method.into(),
        total_mass: 0.0,
        mass_defect: 0.0,
        clamped: 0,
        flagged: Vec::new(),
        failures: Vec::new(),
    };
    for (k, &x) in x_grid.iter().enumerate() {
        let vals: Result<Vec<f64>, String> =
            (0..eps.len()).map(|e| samples[e * n + k].clone()).collect();
        match vals {
            Ok(vals) => {
                let r = richardson_windows_real(eps, &vals, RICHARDSON_WINDOW);
                let mut v = r.value;
                if v < 0.0 {
                    v = 0.0;
                    diagnostics.clamped += 1;
                }
                if r.defect > FLAG_DEFECT {
                    diagnostics.flagged.push(x);
                }
                density.push(v);
                defect.push(r.defect);
            }
            Err(e) => {
                diagnostics.failures.push(format!("{x}: {e}"));
                density.push(f64::NAN);
                defect.push(f64::NAN);
            }
        }
    }
    let mut out = SpectralOutput {
        x_grid: x_grid.to_vec(),
        density,
        defect,
        atoms,
        eps_schedule: eps.to_vec(),
        diagnostics,
    };
    out.tally_mass();
    out
}

// ---------------------------------------------------------------------------
// additive

/// `mu1 ⊞ mu2` through the diagonal half-plane subordination of
/// `psi_j = F_j - z`.
#[derive(Debug, Clone)]
pub struct AdditiveConvolution {
    mu1: MeasureRep,
    mu2: MeasureRep,
    sub: Subordinator,
}

impl AdditiveConvolution {
    pub fn new(mu1: MeasureRep, mu2: MeasureRep) -> Result<Self, FreeConvError> {
        let psi1 = SelfMap::f_shift(mu1.clone())?;
        let psi2 = SelfMap::f_shift(mu2.clone())?;
        Ok(AdditiveConvolution {
            mu1,
            mu2,
            sub: Subordinator::halfplane(psi1, psi2, true)?,
        })
    }

    pub fn subordinator(&self) -> &Subordinator {
        &self.sub
    }

    pub fn subordination(&self, z: C, dw: &DwOptions) -> SubordinationRow {
        self.sub.solve_point(Param::one(z), dw)
    }

    /// `F = omega1 + omega2 - z`.
    pub fn f_transform(&self, z: C, dw: &DwOptions) -> Result<C, String> {
        let r = self.subordination(z, dw);
        f_from_row(&r, z)
    }

    pub fn cauchy(&self, z: C, dw: &DwOptions) -> Result<C, String> {
        self.f_transform(z, dw).map(|f| f.inv())
    }

    /// Density on `x_grid` and atoms.
    pub fn spectral(
        &self,
        x_grid: &[f64],
        eps: &[f64],
        dw: &DwOptions,
    ) -> Result<SpectralOutput, FreeConvError> {
        check_schedule(eps)?;
        let params: Vec<Param> = eps
            .iter()
            .flat_map(|&e| x_grid.iter().map(move |&x| Param::one(C::new(x, e))))
            .collect();
        let g = sample_rows(&self.sub, params, x_grid.len().max(1), dw, |r| {
            let z = r.param.z1.as_finite().expect("finite");
            f_from_row(r, z).map(|f| f.inv())
        });
        let samples: Vec<Result<f64, String>> =
            g.into_iter().map(|v| v.map(|g| -g.im / PI)).collect();
        let candidates = atom_candidates(&self.mu1, &self.mu2, |a, b| a + b);
        let atoms = detect_atoms(|z| self.cauchy(z, dw), &candidates, eps);
        Ok(assemble(x_grid, eps, &samples, atoms, "subordination"))
    }
}

fn f_from_row(r: &SubordinationRow, z: C) -> Result<C, String> {
    if let Some(e) = &r.error {
        return Err(e.clone());
    }
    match (r.omega1_finite(), r.omega2_finite()) {
        (Some(a), Some(b)) => Ok(a + b - z),
        _ => Err(format!("no finite subordination value at {z}")),
    }
}

fn require_real_probability(mu: &MeasureRep) -> Result<(), FreeConvError> {
    if mu.support() != Support::RealLine {
        return Err(MeasureError::WrongSupport {
            expected: "the real line",
            got: mu.support(),
        }
        .into());
    }
    mu.require_probability()?;
    Ok(())
}

/// The measure `mu` pushed forward by `x -> a x + b` (with angles wrapped
/// on the circle), sampled on `x_grid`.
fn affine_image(
    mu: &MeasureRep,
    scale: f64,
    shift: f64,
    x_grid: &[f64],
) -> (Vec<f64>, Vec<(f64, f64)>) {
    let circle = mu.support() == Support::Circle;
    let density = x_grid
        .iter()
        .map(|&x| {
            let Some(d) = mu.density() else { return 0.0 };
            let t = (x - shift) / scale;
            let v = if circle {
                [t, t - 2.0 * PI, t + 2.0 * PI]
                    .iter()
                    .map(|&s| d.value_at(s))
                    .fold(0.0, f64::max)
            } else {
                d.value_at(t)
            };
            v / scale
        })
        .collect();
    let atoms = finite_atoms(mu)
        .into_iter()
        .map(|(x, m)| {
            let y = scale * x + shift;
            (if circle { wrap_angle(y) } else { y }, m)
        })
        .collect();
    (density, atoms)
}

fn wrap_angle(t: f64) -> f64 {
    let w = (t + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Density of `mu1 ⊞ mu2` on `x_grid`. Unit point masses translate the
/// other measure exactly.
pub fn free_additive_convolve(
    mu1: &MeasureRep,
    mu2: &MeasureRep,
    x_grid: &[f64],
    eps: &[f64],
    dw: &DwOptions,
) -> Result<SpectralOutput, FreeConvError> {
    require_real_probability(mu1)?;
    require_real_probability(mu2)?;
    check_schedule(eps)?;
    match (mu1.unit_point_mass(), mu2.unit_point_mass()) {
        (Some(a), Some(b)) => Ok(SpectralOutput::exact(
            x_grid,
            vec![0.0; x_grid.len()],
            vec![(a + b, 1.0)],
            "point-mass",
        )),
        (Some(a), None) => {
            let (d, atoms) = affine_image(mu2, 1.0, a, x_grid);
            Ok(SpectralOutput::exact(x_grid, d, atoms, "translation"))
        }
        (None, Some(b)) => {
            let (d, atoms) = affine_image(mu1, 1.0, b, x_grid);
            Ok(SpectralOutput::exact(x_grid, d, atoms, "translation"))
        }
        (None, None) => {
            AdditiveConvolution::new(mu1.clone(), mu2.clone())?.spectral(x_grid, eps, dw)
        }
    }
}

// ---------------------------------------------------------------------------
// circle

/// True when the first [`HAAR_MOMENTS`] moments vanish.
pub fn is_haar(mu: &MeasureRep) -> bool {
    mu.support() == Support::Circle && (1..=HAAR_MOMENTS).all(|k| mu.moment(k).norm() <= 1e-12)
}

/// `mu1 ⊠ mu2` on the circle through the diagonal two-map subordination of
/// `phi_j = eta_j/lambda`.
#[derive(Debug, Clone)]
pub struct CircleConvolution {
    sub: Subordinator,
}

impl CircleConvolution {
    /// Rejects zero-mean measures; see [`free_mult_convolve_circle`] for
    /// the Haar case.
    pub fn new(mu1: &MeasureRep, mu2: &MeasureRep) -> Result<Self, FreeConvError> {
        for mu in [mu1, mu2] {
            if mu.support() != Support::Circle {
                return Err(MeasureError::WrongSupport {
                    expected: "the circle",
                    got: mu.support(),
                }
                .into());
            }
            mu.require_probability()?;
            let m = mu.moment(1);
            if m.norm() <= 1e-12 {
                return Err(FreeConvError::ZeroMean(m));
            }
        }
        Self::from_maps(
            SelfMap::eta_ratio_measure(mu1.clone())?,
            SelfMap::eta_ratio_measure(mu2.clone())?,
        )
    }

    /// From the maps `phi_j = eta_j/lambda` directly.
    pub fn from_maps(phi1: SelfMap, phi2: SelfMap) -> Result<Self, FreeConvError> {
        Ok(CircleConvolution {
            sub: Subordinator::circle(phi1, phi2, true)?,
        })
    }

    pub fn subordinator(&self) -> &Subordinator {
        &self.sub
    }

    /// `eta(z) = omega1 omega2 / z`, with `eta(0) = 0`.
    pub fn eta(&self, z: C, dw: &DwOptions) -> Result<C, String> {
        if z == C::new(0.0, 0.0) {
            return Ok(z);
        }
        eta_from_circle_row(&self.sub.solve_point(Param::one(z), dw), z)
    }

    pub fn psi(&self, z: C, dw: &DwOptions) -> Result<C, String> {
        self.eta(z, dw).map(|e| e / (1.0 - e))
    }

    fn spectral(
        &self,
        angles: &[f64],
        eps: &[f64],
        candidates: &[f64],
        dw: &DwOptions,
    ) -> Result<SpectralOutput, FreeConvError> {
        check_schedule(eps)?;
        let params: Vec<Param> = eps
            .iter()
            .flat_map(|&e| {
                angles
                    .iter()
                    .map(move |&t| Param::one(C::from_polar(1.0 - e, -t)))
            })
            .collect();
        let psi = sample_rows(&self.sub, params, angles.len().max(1), dw, |r| {
            let z = r.param.z1.as_finite().expect("finite");
            eta_from_circle_row(r, z).map(|e| e / (1.0 - e))
        });
        let samples: Vec<Result<f64, String>> = psi
            .into_iter()
            .map(|v| v.map(|p| (1.0 + 2.0 * p.re) / (2.0 * PI)))
            .collect();
        // map a + i eps to the radius (1 - eps) e^{-ia} so detect_atoms can
        // read the mass off Im of the rescaled transform
        let g = |w: C| -> Result<C, String> {
            let p = self.psi(C::from_polar(1.0 - w.im, -w.re), dw)?;
            Ok(C::new(0.0, -(1.0 + 2.0 * p.re) / 2.0))
        };
        let atoms = detect_atoms(g, candidates, eps);
        Ok(assemble(angles, eps, &samples, atoms, "subordination"))
    }
}

fn eta_from_circle_row(r: &SubordinationRow, z: C) -> Result<C, String> {
    if let Some(e) = &r.error {
        return Err(e.clone());
    }
    match (r.omega1_finite(), r.omega2_finite()) {
        (Some(a), Some(b)) => Ok(a * b / z),
        _ => Err(format!("no subordination value at {z}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleOutput {
    pub z_grid: Vec<C>,
    /// `eta` of the convolution at `z_grid`; `None` where it failed.
    pub eta: Vec<Option<C>>,
    /// Density in the angle.
    pub spectral: SpectralOutput,
}

/// `eta` of `mu1 ⊠ mu2` on `z_grid` and its angular density on `angles`.
/// A Haar factor gives Haar; unit point masses rotate the other measure.
pub fn free_mult_convolve_circle(
    mu1: &MeasureRep,
    mu2: &MeasureRep,
    z_grid: &[C],
    angles: &[f64],
    eps: &[f64],
    dw: &DwOptions,
) -> Result<CircleOutput, FreeConvError> {
    for mu in [mu1, mu2] {
        if mu.support() != Support::Circle {
            return Err(MeasureError::WrongSupport {
                expected: "the circle",
                got: mu.support(),
            }
            .into());
        }
        mu.require_probability()?;
    }
    check_schedule(eps)?;
    if is_haar(mu1) || is_haar(mu2) {
        return Ok(CircleOutput {
            z_grid: z_grid.to_vec(),
            eta: vec![Some(C::new(0.0, 0.0)); z_grid.len()],
            spectral: SpectralOutput::exact(
                angles,
                vec![1.0 / (2.0 * PI); angles.len()],
                vec![],
                "haar",
            ),
        });
    }
    let rotate = |mu: &MeasureRep, u: f64| -> Result<CircleOutput, FreeConvError> {
        let e = C::from_polar(1.0, u);
        let eta = z_grid
            .iter()
            .map(|&z| mu.eta_transform(e * z).ok())
            .collect();
        let (d, atoms) = affine_image(mu, 1.0, u, angles);
        Ok(CircleOutput {
            z_grid: z_grid.to_vec(),
            eta,
            spectral: SpectralOutput::exact(angles, d, atoms, "rotation"),
        })
    };
    match (mu1.unit_point_mass(), mu2.unit_point_mass()) {
        (Some(u), Some(v)) => {
            let e = C::from_polar(1.0, u + v);
            Ok(CircleOutput {
                z_grid: z_grid.to_vec(),
                eta: z_grid.iter().map(|&z| Some(e * z)).collect(),
                spectral: SpectralOutput::exact(
                    angles,
                    vec![0.0; angles.len()],
                    vec![(wrap_angle(u + v), 1.0)],
                    "point-mass",
                ),
            })
        }
        (Some(u), None) => rotate(mu2, u),
        (None, Some(v)) => rotate(mu1, v),
        (None, None) => {
            let conv = CircleConvolution::new(mu1, mu2)?;
            let eta = z_grid.iter().map(|&z| conv.eta(z, dw).ok()).collect();
            let candidates = atom_candidates(mu1, mu2, |a, b| wrap_angle(a + b));
            let spectral = conv.spectral(angles, eps, &candidates, dw)?;
            Ok(CircleOutput {
                z_grid: z_grid.to_vec(),
                eta,
                spectral,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// positive line

/// `mu1 ⊠ mu2` on `[0, inf)` through the positive-line subordination of the
/// eta-ratios `f_j = eta_j/lambda`.
#[derive(Debug, Clone)]
pub struct PositiveConvolution {
    sub: Subordinator,
}

impl PositiveConvolution {
    pub fn new(mu1: &MeasureRep, mu2: &MeasureRep) -> Result<Self, FreeConvError> {
        for mu in [mu1, mu2] {
            require_positive_probability(mu)?;
        }
        Self::from_maps(
            SelfMap::eta_ratio_measure(mu1.clone())?,
            SelfMap::eta_ratio_measure(mu2.clone())?,
        )
    }

    pub fn from_maps(f1: SelfMap, f2: SelfMap) -> Result<Self, FreeConvError> {
        Ok(PositiveConvolution {
            sub: Subordinator::positive_line(f1, f2)?,
        })
    }

    pub fn subordinator(&self) -> &Subordinator {
        &self.sub
    }

    /// `eta(z) = omega f2(omega)` for `z` in the closed upper half-plane.
    pub fn eta(&self, z: C, dw: &DwOptions) -> Result<C, String> {
        if z == C::new(0.0, 0.0) {
            return Ok(z);
        }
        eta_from_positive_row(&self.sub.solve_point(Param::one(z), dw), z)
    }

    /// `psi = eta/(1 - eta)` anywhere off `(0, inf)`, by symmetry in the
    /// lower half-plane.
    pub fn psi(&self, z: C, dw: &DwOptions) -> Result<C, String> {
        if z.im < 0.0 {
            return self.psi(z.conj(), dw).map(|p| p.conj());
        }
        self.eta(z, dw).map(|e| e / (1.0 - e))
    }

    /// `G(z) = (1 + psi(1/z))/z` for `Im z > 0`.
    pub fn cauchy(&self, z: C, dw: &DwOptions) -> Result<C, String> {
        self.psi(z.inv(), dw).map(|p| (1.0 + p) / z)
    }

    fn spectral(
        &self,
        x_grid: &[f64],
        eps: &[f64],
        candidates: &[f64],
        dw: &DwOptions,
    ) -> Result<SpectralOutput, FreeConvError> {
        check_schedule(eps)?;
        // psi(1/z) = conj(psi(1/conj z)) and 1/conj z lies in the upper half-plane
        let params: Vec<Param> = eps
            .iter()
            .flat_map(|&e| x_grid.iter().map(move |&x| Param::one(C::new(x, -e).inv())))
            .collect();
        let g = sample_rows(&self.sub, params, x_grid.len().max(1), dw, |r| {
            let w = r.param.z1.as_finite().expect("finite");
            let p = eta_from_positive_row(r, w).map(|e| e / (1.0 - e))?.conj();
            Ok((1.0 + p) * w.conj())
        });
        let samples: Vec<Result<f64, String>> =
            g.into_iter().map(|v| v.map(|g| -g.im / PI)).collect();
        let atoms = detect_atoms(|z| self.cauchy(z, dw), candidates, eps);
        Ok(assemble(x_grid, eps, &samples, atoms, "subordination"))
    }
}

fn eta_from_positive_row(r: &SubordinationRow, z: C) -> Result<C, String> {
    if let Some(e) = &r.error {
        return Err(e.clone());
    }
    match (r.omega1_finite(), r.omega2_finite()) {
        (Some(w), Some(w2)) => Ok(w * w2 / z),
        _ => Err(format!("no subordination value at {z}")),
    }
}

fn require_positive_probability(mu: &MeasureRep) -> Result<(), FreeConvError> {
    if mu.support() != Support::PositiveLine {
        return Err(MeasureError::WrongSupport {
            expected: "the positive line",
            got: mu.support(),
        }
        .into());
    }
    mu.require_probability()?;
    if mu.unit_point_mass() == Some(0.0) {
        return Err(FreeConvError::PointMassAtZero);
    }
    Ok(())
}

/// Density of `mu1 ⊠ mu2` on `x_grid` (in `[0, inf)`). Unit point masses
/// scale the other measure exactly.
pub fn free_mult_convolve_positive(
    mu1: &MeasureRep,
    mu2: &MeasureRep,
    x_grid: &[f64],
    eps: &[f64],
    dw: &DwOptions,
) -> Result<SpectralOutput, FreeConvError> {
    require_positive_probability(mu1)?;
    require_positive_probability(mu2)?;
    check_schedule(eps)?;
    match (mu1.unit_point_mass(), mu2.unit_point_mass()) {
        (Some(a), Some(b)) => Ok(SpectralOutput::exact(
            x_grid,
            vec![0.0; x_grid.len()],
            vec![(a * b, 1.0)],
            "point-mass",
        )),
        (Some(a), None) => {
            let (d, atoms) = affine_image(mu2, a, 0.0, x_grid);
            Ok(SpectralOutput::exact(x_grid, d, atoms, "scaling"))
        }
        (None, Some(b)) => {
            let (d, atoms) = affine_image(mu1, b, 0.0, x_grid);
            Ok(SpectralOutput::exact(x_grid, d, atoms, "scaling"))
        }
        (None, None) => {
            let conv = PositiveConvolution::new(mu1, mu2)?;
            let mut candidates = atom_candidates(mu1, mu2, |a, b| a * b);
            let zero_mass = |mu: &MeasureRep| {
                mu.atoms()
                    .iter()
                    .filter(|a| a.position == AtomPosition::At(0.0))
                    .map(|a| a.mass)
                    .sum::<f64>()
            };
            if zero_mass(mu1) > 0.0 || zero_mass(mu2) > 0.0 {
                candidates.push(0.0);
            }
            conv.spectral(x_grid, eps, &candidates, dw)
        }
    }
}

/// Turns a spectral output back into a measure on the same grid.
pub fn to_measure(out: &SpectralOutput, support: Support) -> Result<MeasureRep, MeasureError> {
    let atoms = out.atoms.iter().map(|&(x, m)| Atom::at(x, m)).collect();
    let density = if out.x_grid.len() >= 2 {
        Some(crate::measures::Density {
            grid: out.x_grid.clone(),
            values: out
                .density
                .iter()
                .map(|v| if v.is_finite() { v.max(0.0) } else { 0.0 })
                .collect(),
        })
    } else {
        None
    };
    MeasureRep::new(support, atoms, density)
}
