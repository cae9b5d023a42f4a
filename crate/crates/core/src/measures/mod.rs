//! Finite positive Borel measures on the real line (plus the point at
//! infinity), the unit circle and the positive half-line, together with the
//! integral transforms built on them.
//!
//! A measure is a finite list of atoms plus an optional piecewise-linear
//! density on an explicit grid. Integrals against the density use a 16-point
//! Gauss-Legendre rule on every grid cell; a cell lying close to a pole of
//! the integrand is bisected until the pole is well outside the Bernstein
//! ellipse of each piece, which keeps full accuracy when transforms are
//! evaluated a short distance from the support.

pub mod catalog;
pub mod spec_file;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domains::{SpherePoint, BOUNDARY_TOL};
use crate::numerics::gl16;

/// Tolerance on total mass for probability measures.
pub const PROBABILITY_TOL: f64 = 1e-10;

/// Pole-to-cell distance, in half-widths, below which a cell is bisected.
const NEAR_FIELD_RATIO: f64 = 3.0;
const MAX_BISECTION_DEPTH: u32 = 60;

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("invalid measure: {0}")]
    Invalid(String),
    #[error("evaluation point {0} touches the support of the measure")]
    PointOnSupport(C),
    #[error("total mass {0} is not 1 within {PROBABILITY_TOL}")]
    NotProbability(f64),
    #[error("operation needs a measure on {expected}, got {got}")]
    WrongSupport {
        expected: &'static str,
        got: Support,
    },
    #[error("1 + psi vanishes at {0}")]
    Degenerate(C),
    #[error("kernel {kernel:?} is undefined for an atom at infinity")]
    KernelAtInfinity { kernel: Kernel },
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Support {
    RealLine,
    Circle,
    PositiveLine,
}

impl Support {
    pub fn name(&self) -> &'static str {
        match self {
            Support::RealLine => "real-line",
            Support::Circle => "circle",
            Support::PositiveLine => "positive-line",
        }
    }

    pub fn parse(s: &str) -> Option<Support> {
        match s {
            "real-line" => Some(Support::RealLine),
            "circle" => Some(Support::Circle),
            "positive-line" => Some(Support::PositiveLine),
            _ => None,
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where an atom sits. On the circle the coordinate is an angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AtomPosition {
    At(f64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: AtomPosition,
    pub mass: f64,
}

impl Atom {
    pub fn at(x: f64, mass: f64) -> Self {
        Atom {
            position: AtomPosition::At(x),
            mass,
        }
    }
}

/// Piecewise-linear density on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl Density {
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Linear interpolation; zero outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let k = g.partition_point(|&t| t <= x);
        if k == 0 {
            return self.values[0];
        }
        if k >= g.len() {
            return self.values[g.len() - 1];
        }
        let (a, b) = (g[k - 1], g[k]);
        let s = (x - a) / (b - a);
        self.values[k - 1] * (1.0 - s) + self.values[k] * s
    }
}

/// The fixed kernel family accepted by [`MeasureRep::integrate_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    /// `(1 + t z)/(t - z)`; equals `z` at an atom at infinity.
    Nevanlinna,
    /// `1/(z - t)`.
    Cauchy,
    /// `t z/(1 - t z)`.
    EtaPsi,
    /// `(1 + t^2)/(t (t - z))`.
    ClassF,
    /// `(1 + t^2)/(t^2 + y^2)` with `y = Im z`; equals 1 at infinity.
    ImagIdentity,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    a: f64,
    b: f64,
    ra: f64,
    rb: f64,
}

/// A finite positive Borel measure: atoms plus an optional density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureRep {
    support: Support,
    atoms: Vec<Atom>,
    density: Option<Density>,
    total_mass: f64,
    #[serde(skip)]
    nodes: Vec<(C, f64)>,
    #[serde(skip)]
    cells: Vec<Cell>,
}

impl PartialEq for MeasureRep {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support && self.atoms == other.atoms && self.density == other.density
    }
}

impl MeasureRep {
    /// Validates and builds a measure. `total_mass` is computed.
    pub fn new(
        support: Support,
        atoms: Vec<Atom>,
        density: Option<Density>,
    ) -> Result<Self, MeasureError> {
        let bad = |msg: String| Err(MeasureError::Invalid(msg));
        for a in &atoms {
            if !(a.mass.is_finite() && a.mass >= 0.0) {
                return bad(format!("atom mass {} is not a nonnegative number", a.mass));
            }
            match (support, a.position) {
                (Support::RealLine, AtomPosition::Infinity) => {}
                (_, AtomPosition::Infinity) => {
                    return bad(format!("atom at infinity is not allowed on the {support}"));
                }
                (_, AtomPosition::At(x)) if !x.is_finite() => {
                    return bad(format!("atom location {x} is not finite"));
                }
                (Support::PositiveLine, AtomPosition::At(x)) if x < 0.0 => {
                    return bad(format!("atom at {x} is not in [0, inf)"));
                }
                (Support::Circle, AtomPosition::At(x)) if !(x > -PI && x <= PI) => {
                    return bad(format!("circle atom angle {x} is outside (-pi, pi]"));
                }
                _ => {}
            }
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].iter().any(|b| b.position == a.position) {
                return bad(format!("duplicate atom location {:?}", a.position));
            }
        }
        if let Some(d) = &density {
            if d.grid.len() != d.values.len() {
                return bad("density grid and values differ in length".into());
            }
            if d.grid.len() < 2 {
                return bad("density grid needs at least two points".into());
            }
            if d.grid.iter().any(|x| !x.is_finite()) || d.values.iter().any(|v| !v.is_finite()) {
                return bad("density grid and values must be finite".into());
            }
            if d.grid.windows(2).any(|w| w[1] <= w[0]) {
                return bad("density grid is not strictly increasing".into());
            }
            if d.values.iter().any(|&v| v < 0.0) {
                return bad("density values must be nonnegative".into());
            }
            match support {
                Support::PositiveLine if d.grid[0] < 0.0 => {
                    return bad("positive-line density grid starts below 0".into());
                }
                Support::Circle if d.grid[0] < -PI || d.grid[d.grid.len() - 1] > PI => {
                    return bad("circle density grid must lie in [-pi, pi]".into());
                }
                _ => {}
            }
        }
        let total_mass = atoms.iter().map(|a| a.mass).sum::<f64>()
            + density.as_ref().map_or(0.0, Density::integral);
        let mut m = MeasureRep {
            support,
            atoms,
            density,
            total_mass,
            nodes: Vec::new(),
            cells: Vec::new(),
        };
        m.build_nodes();
        Ok(m)
    }

    pub fn zero(support: Support) -> Self {
        MeasureRep::new(support, Vec::new(), None).expect("empty measure is valid")
    }

    pub fn point_mass(support: Support, x: f64, mass: f64) -> Result<Self, MeasureError> {
        MeasureRep::new(support, vec![Atom::at(x, mass)], None)
    }

    /// Samples `f` on `grid` as a piecewise-linear density.
    pub fn from_density_fn(
        support: Support,
        grid: Vec<f64>,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, MeasureError> {
        let values = grid.iter().map(|&x| f(x).max(0.0)).collect();
        MeasureRep::new(support, Vec::new(), Some(Density { grid, values }))
    }

    fn build_nodes(&mut self) {
        let (gx, gw) = gl16();
        self.nodes.clear();
        self.cells.clear();
        let Some(d) = &self.density else { return };
        for k in 0..d.grid.len() - 1 {
            let cell = Cell {
                a: d.grid[k],
                b: d.grid[k + 1],
                ra: d.values[k],
                rb: d.values[k + 1],
            };
            if cell.ra == 0.0 && cell.rb == 0.0 {
                continue;
            }
            self.cells.push(cell);
            let hw = 0.5 * (cell.b - cell.a);
            let mid = 0.5 * (cell.a + cell.b);
            for (x, w) in gx.iter().zip(gw) {
                let s = 0.5 * (1.0 + x);
                let rho = cell.ra * (1.0 - s) + cell.rb * s;
                self.nodes
                    .push((self.coord_to_point(mid + hw * x), w * hw * rho));
            }
        }
    }

    #[inline]
    fn coord_to_point(&self, x: f64) -> C {
        match self.support {
            Support::Circle => C::from_polar(1.0, x),
            _ => C::new(x, 0.0),
        }
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Location of an atom as a point of the sphere (circle atoms become
    /// unimodular numbers).
    pub fn atom_location(&self, atom: &Atom) -> SpherePoint {
        match atom.position {
            AtomPosition::Infinity => SpherePoint::Infinity,
            AtomPosition::At(x) => SpherePoint::Finite(self.coord_to_point(x)),
        }
    }

    pub fn mass_at_infinity(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.position == AtomPosition::Infinity)
            .map(|a| a.mass)
            .sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass - 1.0).abs() <= PROBABILITY_TOL
    }

    pub fn require_probability(&self) -> Result<(), MeasureError> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(MeasureError::NotProbability(self.total_mass))
        }
    }

    /// Returns `Some(x)` when the measure is a unit point mass at `x`.
    pub fn unit_point_mass(&self) -> Option<f64> {
        if self.density.as_ref().is_some_and(|d| d.integral() > 0.0) {
            return None;
        }
        let mut charged = self.atoms.iter().filter(|a| a.mass > 0.0);
        match (charged.next(), charged.next()) {
            (Some(a), None) if (a.mass - 1.0).abs() <= PROBABILITY_TOL => match a.position {
                AtomPosition::At(x) => Some(x),
                AtomPosition::Infinity => None,
            },
            _ => None,
        }
    }

    /// A copy rescaled to total mass one. Never applied implicitly.
    pub fn normalized(&self) -> Result<Self, MeasureError> {
        if !(self.total_mass > 0.0) {
            return Err(MeasureError::Invalid(
                "cannot normalize the zero measure".into(),
            ));
        }
        self.scaled(1.0 / self.total_mass)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, MeasureError> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                position: a.position,
                mass: a.mass * factor,
            })
            .collect();
        let density = self.density.as_ref().map(|d| Density {
            grid: d.grid.clone(),
            values: d.values.iter().map(|v| v * factor).collect(),
        });
        MeasureRep::new(self.support, atoms, density)
    }

    /// Raw moment `int t^k dmu` over the finite part (circle: `int zeta^k`).
    pub fn moment(&self, k: i32) -> C {
        let mut acc = C::new(0.0, 0.0);
        for a in &self.atoms {
            if let AtomPosition::At(x) = a.position {
                acc += self.coord_to_point(x).powi(k) * a.mass;
            }
        }
        for &(t, w) in &self.nodes {
            acc += t.powi(k) * w;
        }
        acc
    }

    /// Distance from `p` to the closed support, measured in the plane.
    pub fn distance_to_support(&self, p: C) -> f64 {
        let mut d = f64::INFINITY;
        for a in &self.atoms {
            if let AtomPosition::At(x) = a.position {
                d = d.min((p - self.coord_to_point(x)).norm());
            }
        }
        if let Some(dens) = &self.density {
            let (lo, hi) = (dens.grid[0], dens.grid[dens.grid.len() - 1]);
            let dd = match self.support {
                Support::Circle => {
                    let ang = p.arg();
                    if ang >= lo && ang <= hi {
                        (p.norm() - 1.0).abs()
                    } else {
                        (p - C::from_polar(1.0, lo))
                            .norm()
                            .min((p - C::from_polar(1.0, hi)).norm())
                    }
                }
                _ => {
                    if p.re >= lo && p.re <= hi {
                        p.im.abs()
                    } else {
                        (p - lo).norm().min((p - hi).norm())
                    }
                }
            };
            d = d.min(dd);
        }
        d
    }

    fn check_pole(&self, pole: C) -> Result<(), MeasureError> {
        if !pole.is_finite() {
            return Ok(());
        }
        if self.distance_to_support(pole) <= BOUNDARY_TOL * pole.norm().max(1.0) {
            Err(MeasureError::PointOnSupport(pole))
        } else {
            Ok(())
        }
    }

    /// Pole of a kernel expressed in the grid coordinate. On the circle,
    /// `e^{i theta} = p` gives `theta = arg(p) - i ln|p|` modulo `2 pi`.
    #[inline]
    fn pole_coord(&self, pole: C) -> C {
        match self.support {
            Support::Circle => C::new(pole.arg(), -pole.norm().ln()),
            _ => pole,
        }
    }

    #[inline]
    fn is_near(&self, pole_coords: &[C], mid: f64, hw: f64) -> bool {
        let reach = NEAR_FIELD_RATIO * hw;
        pole_coords.iter().any(|&p| {
            let mut d = (p.re - mid).abs();
            if self.support == Support::Circle {
                d %= 2.0 * PI;
                d = d.min(2.0 * PI - d);
            }
            d < reach && d.hypot(p.im) < reach
        })
    }

    /// Integrates a kernel jet `t -> (k(t), dk/dz(t))` against the density
    /// part. `poles` are the kernel singularities in `t`.
    fn integrate_density<K>(&self, poles: &[C], kernel: &K) -> (C, C)
    where
        K: Fn(C) -> (C, C),
    {
        let mut v = C::new(0.0, 0.0);
        let mut dv = C::new(0.0, 0.0);
        if self.cells.is_empty() {
            return (v, dv);
        }
        let pc: Vec<C> = poles
            .iter()
            .filter(|p| p.is_finite())
            .map(|&p| self.pole_coord(p))
            .collect();
        for (ci, cell) in self.cells.iter().enumerate() {
            let hw = 0.5 * (cell.b - cell.a);
            let mid = 0.5 * (cell.a + cell.b);
            if self.is_near(&pc, mid, hw) {
                let (a, b) = self.integrate_cell(*cell, &pc, kernel, MAX_BISECTION_DEPTH);
                v += a;
                dv += b;
            } else {
                for &(t, w) in &self.nodes[ci * 16..ci * 16 + 16] {
                    let (k, dk) = kernel(t);
                    v += k * w;
                    dv += dk * w;
                }
            }
        }
        (v, dv)
    }

    fn integrate_cell<K>(&self, cell: Cell, pc: &[C], kernel: &K, depth: u32) -> (C, C)
    where
        K: Fn(C) -> (C, C),
    {
        let hw = 0.5 * (cell.b - cell.a);
        let mid = 0.5 * (cell.a + cell.b);
        if depth > 0 && self.is_near(pc, mid, hw) {
            let rm = 0.5 * (cell.ra + cell.rb);
            let left = Cell {
                a: cell.a,
                b: mid,
                ra: cell.ra,
                rb: rm,
            };
            let right = Cell {
                a: mid,
                b: cell.b,
                ra: rm,
                rb: cell.rb,
            };
            let (l, dl) = self.integrate_cell(left, pc, kernel, depth - 1);
            let (r, dr) = self.integrate_cell(right, pc, kernel, depth - 1);
            return (l + r, dl + dr);
        }
        let (gx, gw) = gl16();
        let mut v = C::new(0.0, 0.0);
        let mut dv = C::new(0.0, 0.0);
        for (x, w) in gx.iter().zip(gw) {
            let s = 0.5 * (1.0 + x);
            let rho = cell.ra * (1.0 - s) + cell.rb * s;
            let (k, dk) = kernel(self.coord_to_point(mid + hw * x));
            v += k * (w * hw * rho);
            dv += dk * (w * hw * rho);
        }
        (v, dv)
    }

    /// Atom sum for finite atoms plus the value assigned to an atom at
    /// infinity (`None` if the kernel has no value there).
    fn integrate_atoms<K>(&self, kernel: &K, at_infinity: Option<(C, C)>) -> Result<(C, C), Kernel>
    where
        K: Fn(C) -> (C, C),
    {
        let mut v = C::new(0.0, 0.0);
        let mut dv = C::new(0.0, 0.0);
        for a in &self.atoms {
            if a.mass == 0.0 {
                continue;
            }
            let (k, dk) = match a.position {
                AtomPosition::At(x) => kernel(self.coord_to_point(x)),
                AtomPosition::Infinity => match at_infinity {
                    Some(kd) => kd,
                    None => return Err(Kernel::Cauchy),
                },
            };
            v += k * a.mass;
            dv += dk * a.mass;
        }
        Ok((v, dv))
    }

    fn integrate_jet<K>(
        &self,
        poles: &[C],
        kernel: K,
        at_infinity: Option<(C, C)>,
        kind: Kernel,
    ) -> Result<(C, C), MeasureError>
    where
        K: Fn(C) -> (C, C),
    {
        for &p in poles {
            self.check_pole(p)?;
        }
        let (av, adv) = self
            .integrate_atoms(&kernel, at_infinity)
            .map_err(|_| MeasureError::KernelAtInfinity { kernel: kind })?;
        let (dv, ddv) = self.integrate_density(poles, &kernel);
        Ok((av + dv, adv + ddv))
    }

    /// `int K(t, z) dmu(t)` for one of the fixed kernels, together with its
    /// derivative in `z` (zero for [`Kernel::ImagIdentity`]).
    pub fn integrate_kernel_jet(&self, kernel: Kernel, z: C) -> Result<(C, C), MeasureError> {
        let one = C::new(1.0, 0.0);
        let zero = C::new(0.0, 0.0);
        match kernel {
            Kernel::Nevanlinna => self.integrate_jet(
                &[z],
                |t| {
                    let d = t - z;
                    ((one + t * z) / d, (one + t * t) / (d * d))
                },
                Some((z, one)),
                kernel,
            ),
            Kernel::Cauchy => self.integrate_jet(
                &[z],
                |t| {
                    let r = (z - t).inv();
                    (r, -r * r)
                },
                Some((zero, zero)),
                kernel,
            ),
            Kernel::EtaPsi => {
                let poles: Vec<C> = if z == zero { vec![] } else { vec![z.inv()] };
                self.integrate_jet(
                    &poles,
                    |t| {
                        let r = (one - t * z).inv();
                        (t * z * r, t * r * r)
                    },
                    None,
                    kernel,
                )
            }
            Kernel::ClassF => self.integrate_jet(
                &[z, zero],
                |t| {
                    let r = (t - z).inv();
                    let c = (one + t * t) / t;
                    (c * r, c * r * r)
                },
                None,
                kernel,
            ),
            Kernel::ImagIdentity => {
                let y = z.im;
                self.integrate_jet(
                    &[C::new(0.0, y), C::new(0.0, -y)],
                    |t| ((one + t * t) / (t * t + y * y), zero),
                    Some((one, zero)),
                    kernel,
                )
            }
        }
    }

    pub fn integrate_kernel(&self, kernel: Kernel, z: C) -> Result<C, MeasureError> {
        self.integrate_kernel_jet(kernel, z).map(|(v, _)| v)
    }

    fn require_support(
        &self,
        allowed: &[Support],
        expected: &'static str,
    ) -> Result<(), MeasureError> {
        if allowed.contains(&self.support) {
            Ok(())
        } else {
            Err(MeasureError::WrongSupport {
                expected,
                got: self.support,
            })
        }
    }

    /// Cauchy transform `G(z) = int dmu(t)/(z - t)` of a probability
    /// measure on the real or positive line, with its derivative.
    pub fn cauchy_transform_jet(&self, z: C) -> Result<(C, C), MeasureError> {
        self.require_support(
            &[Support::RealLine, Support::PositiveLine],
            "the real or positive line",
        )?;
        self.require_probability()?;
        if self.mass_at_infinity() > 0.0 {
            return Err(MeasureError::Invalid(
                "probability measure with mass at infinity".into(),
            ));
        }
        self.integrate_kernel_jet(Kernel::Cauchy, z)
    }

    pub fn cauchy_transform(&self, z: C) -> Result<C, MeasureError> {
        self.cauchy_transform_jet(z).map(|(g, _)| g)
    }

    /// `F(z) - z` with `F = 1/G`, the self-map of the upper half-plane used
    /// for additive subordination.
    pub fn f_shift_jet(&self, z: C) -> Result<(C, C), MeasureError> {
        let (g, dg) = self.cauchy_transform_jet(z)?;
        if g == C::new(0.0, 0.0) {
            return Err(MeasureError::Degenerate(z));
        }
        let f = g.inv();
        Ok((f - z, -dg * f * f - 1.0))
    }

    fn require_multiplicative(&self) -> Result<(), MeasureError> {
        self.require_support(
            &[Support::Circle, Support::PositiveLine],
            "the circle or positive line",
        )
    }

    /// Moment transform `psi(z) = int t z/(1 - t z) dmu(t)`.
    pub fn psi_transform(&self, z: C) -> Result<C, MeasureError> {
        self.require_multiplicative()?;
        self.integrate_kernel(Kernel::EtaPsi, z)
    }

    /// `eta = psi/(1 + psi)`.
    pub fn eta_transform(&self, z: C) -> Result<C, MeasureError> {
        let psi = self.psi_transform(z)?;
        let den = psi + 1.0;
        if den.norm() <= BOUNDARY_TOL {
            return Err(MeasureError::Degenerate(z));
        }
        Ok(psi / den)
    }

    /// `eta(z)/z` and its derivative, computed from
    /// `h(z) = int t/(1 - t z) dmu` as `h/(1 + z h)` so there is no
    /// cancellation at `z = 0`.
    pub fn eta_ratio_jet(&self, z: C) -> Result<(C, C), MeasureError> {
        self.require_multiplicative()?;
        self.require_probability()?;
        let one = C::new(1.0, 0.0);
        let poles: Vec<C> = if z == C::new(0.0, 0.0) {
            vec![]
        } else {
            vec![z.inv()]
        };
        let (h, dh) = self.integrate_jet(
            &poles,
            |t| {
                let r = (one - t * z).inv();
                (t * r, t * t * r * r)
            },
            None,
            Kernel::EtaPsi,
        )?;
        let den = one + z * h;
        if den.norm() <= BOUNDARY_TOL {
            return Err(MeasureError::Degenerate(z));
        }
        Ok((h / den, (dh - h * h) / (den * den)))
    }
}

/// Nevanlinna data `(alpha, beta, sigma)` of the self-map
/// `psi(z) = alpha z + beta + int (1 + t z)/(t - z) dsigma(t)` of the upper
/// half-plane. `sigma` carries no mass at infinity; that mass is `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NevanlinnaData {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: MeasureRep,
}

impl NevanlinnaData {
    pub fn new(alpha: f64, beta: f64, sigma: MeasureRep) -> Result<Self, MeasureError> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(MeasureError::Invalid(format!(
                "alpha = {alpha} must be >= 0"
            )));
        }
        if !beta.is_finite() {
            return Err(MeasureError::Invalid(format!(
                "beta = {beta} must be finite"
            )));
        }
        if sigma.support() != Support::RealLine {
            return Err(MeasureError::WrongSupport {
                expected: "the real line",
                got: sigma.support(),
            });
        }
        if sigma.mass_at_infinity() > 0.0 {
            return Err(MeasureError::Invalid(
                "sigma must not charge infinity; use alpha".into(),
            ));
        }
        Ok(NevanlinnaData { alpha, beta, sigma })
    }

    /// `alpha = 1`, `beta = 0`, `sigma(R) = 0`.
    pub fn is_identity(&self) -> bool {
        self.alpha == 1.0 && self.beta == 0.0 && self.sigma.total_mass() == 0.0
    }

    pub fn eval_jet(&self, z: C) -> Result<(C, C), MeasureError> {
        let (v, d) = self.sigma.integrate_kernel_jet(Kernel::Nevanlinna, z)?;
        Ok((z * self.alpha + self.beta + v, d + self.alpha))
    }

    pub fn eval(&self, z: C) -> Result<C, MeasureError> {
        self.eval_jet(z).map(|(v, _)| v)
    }

    /// `alpha + int (1 + t^2)/(t^2 + y^2) dsigma`, which equals 1 exactly
    /// when `iy` is a fixed point.
    pub fn imag_identity(&self, y: f64) -> Result<f64, MeasureError> {
        let v = self
            .sigma
            .integrate_kernel(Kernel::ImagIdentity, C::new(0.0, y))?;
        Ok(self.alpha + v.re)
    }
}

/// Data `(beta, sigma)` of a ratio `f(lambda) = eta(lambda)/lambda` of the
/// class of eta-transforms of measures on `[0, inf)`:
/// `f(lambda) = beta + int (1 + t^2)/(t (t - lambda)) dsigma(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFData {
    pub beta: f64,
    pub sigma: MeasureRep,
    inv_t_integral: f64,
}

impl ClassFData {
    pub fn new(beta: f64, sigma: MeasureRep) -> Result<Self, MeasureError> {
        let d = Self::build(beta, sigma)?;
        if d.sigma.total_mass() <= 0.0 {
            return Err(MeasureError::Invalid(
                "sigma must be a nonzero measure".into(),
            ));
        }
        Ok(d)
    }

    /// The ratio of a point mass `delta_a`: `f = a`, `sigma = 0`.
    pub fn point_mass(a: f64) -> Result<Self, MeasureError> {
        Self::build(a, MeasureRep::zero(Support::PositiveLine))
    }

    fn build(beta: f64, sigma: MeasureRep) -> Result<Self, MeasureError> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(MeasureError::Invalid(format!("beta = {beta} must be >= 0")));
        }
        if sigma.support() != Support::PositiveLine {
            return Err(MeasureError::WrongSupport {
                expected: "the positive line",
                got: sigma.support(),
            });
        }
        for a in sigma.atoms() {
            if let AtomPosition::At(x) = a.position {
                if x <= 0.0 && a.mass > 0.0 {
                    return Err(MeasureError::Invalid("sigma must live on (0, inf)".into()));
                }
            }
        }
        if let Some(d) = sigma.density() {
            if d.grid[0] <= 0.0 {
                return Err(MeasureError::Invalid(
                    "sigma density grid must start above 0".into(),
                ));
            }
        }
        let mut inv_t_integral = 0.0;
        for a in sigma.atoms() {
            if let AtomPosition::At(x) = a.position {
                if a.mass > 0.0 {
                    inv_t_integral += a.mass / x;
                }
            }
        }
        inv_t_integral += sigma.nodes.iter().map(|(t, w)| w / t.re).sum::<f64>();
        if !inv_t_integral.is_finite() {
            return Err(MeasureError::Invalid("int (1/t) dsigma diverges".into()));
        }
        Ok(ClassFData {
            beta,
            sigma,
            inv_t_integral,
        })
    }

    pub fn is_point_mass(&self) -> bool {
        self.sigma.total_mass() == 0.0
    }

    pub fn inv_t_integral(&self) -> f64 {
        self.inv_t_integral
    }

    /// `int (1 + t^2)/t dsigma`; `-` of it is `lim eta(x)` as `x -> -inf`
    /// when `beta = 0`.
    pub fn tail_integral(&self) -> f64 {
        let mut acc = 0.0;
        for a in self.sigma.atoms() {
            if let AtomPosition::At(x) = a.position {
                if a.mass > 0.0 {
                    acc += a.mass * (1.0 + x * x) / x;
                }
            }
        }
        acc + self
            .sigma
            .nodes
            .iter()
            .map(|(t, w)| w * (1.0 + t.re * t.re) / t.re)
            .sum::<f64>()
    }

    pub fn f_ratio_jet(&self, lambda: C) -> Result<(C, C), MeasureError> {
        let (v, d) = self.sigma.integrate_kernel_jet(Kernel::ClassF, lambda)?;
        Ok((v + self.beta, d))
    }

    pub fn f_ratio(&self, lambda: C) -> Result<C, MeasureError> {
        self.f_ratio_jet(lambda).map(|(v, _)| v)
    }

    /// `eta(lambda) = lambda f(lambda)`.
    pub fn eta(&self, lambda: C) -> Result<C, MeasureError> {
        Ok(lambda * self.f_ratio(lambda)?)
    }
}

/// Oracle-free check of the total-mass bookkeeping: atom masses plus the
/// trapezoid integral of the density.
pub fn mass_defect(m: &MeasureRep) -> f64 {
    let recomputed: f64 =
        m.atoms().iter().map(|a| a.mass).sum::<f64>() + m.density().map_or(0.0, Density::integral);
    (recomputed - m.total_mass()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn uniform_half() -> MeasureRep {
        MeasureRep::new(
            Support::RealLine,
            vec![],
            Some(Density {
                grid: vec![-1.0, 1.0],
                values: vec![0.5, 0.5],
            }),
        )
        .unwrap()
    }

    #[test]
    fn single_atom_nevanlinna_kernel() {
        let m = MeasureRep::point_mass(Support::RealLine, 0.0, 1.0).unwrap();
        let v = m.integrate_kernel(Kernel::Nevanlinna, c(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!((v - c(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_measure_integrates_to_zero() {
        let m = MeasureRep::zero(Support::RealLine);
        for k in [
            Kernel::Nevanlinna,
            Kernel::Cauchy,
            Kernel::EtaPsi,
            Kernel::ClassF,
        ] {
            assert_eq!(m.integrate_kernel(k, c(0.3, 0.7)).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn uniform_density_cauchy_closed_form() {
        // int_{-1}^{1} (1/2)/(i - t) dt = -i pi/4
        let v = uniform_half()
            .integrate_kernel(Kernel::Cauchy, c(0.0, 1.0))
            .unwrap();
        assert_abs_diff_eq!((v - c(0.0, -PI / 4.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn near_support_evaluation_stays_accurate() {
        // int_{-1}^{1} (1/2)/(z - t) dt = (1/2) log((z + 1)/(z - 1))
        let m = uniform_half();
        for eps in [1e-3, 1e-6, 1e-9] {
            let z = c(0.3, eps);
            let exact = 0.5 * ((z + 1.0) / (z - 1.0)).ln();
            let v = m.integrate_kernel(Kernel::Cauchy, z).unwrap();
            // G(x + i eps) has x-derivative of size 1/eps, so rounding of the
            // abscissa alone costs about ulp(0.3)/eps
            let tol = 1e-12 * exact.norm().max(1.0) + 1e-16 / eps;
            assert!((v - exact).norm() < tol, "eps={eps}");
        }
    }

    #[test]
    fn touching_the_support_is_an_error() {
        let m = uniform_half();
        assert!(matches!(
            m.integrate_kernel(Kernel::Cauchy, c(0.2, 0.0)),
            Err(MeasureError::PointOnSupport(_))
        ));
        let a = MeasureRep::point_mass(Support::RealLine, 2.0, 1.0).unwrap();
        assert!(a.integrate_kernel(Kernel::Cauchy, c(2.0, 0.0)).is_err());
        assert!(a.integrate_kernel(Kernel::Cauchy, c(3.0, 0.0)).is_ok());
    }

    #[test]
    fn cauchy_transform_examples() {
        let d0 = MeasureRep::point_mass(Support::RealLine, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            (d0.cauchy_transform(c(0.0, 1.0)).unwrap() - c(0.0, -1.0)).norm(),
            0.0
        );
        let a = 0.7;
        let da = MeasureRep::point_mass(Support::RealLine, a, 1.0).unwrap();
        let z = c(1.5, 1e-3);
        let g = da.cauchy_transform(z).unwrap();
        assert_abs_diff_eq!((g - (z - a).inv()).norm(), 0.0, epsilon = 1e-12);
        let half = MeasureRep::point_mass(Support::RealLine, 0.0, 0.5).unwrap();
        assert!(matches!(
            half.cauchy_transform(c(0.0, 1.0)),
            Err(MeasureError::NotProbability(_))
        ));
        let circle = MeasureRep::point_mass(Support::Circle, 0.0, 1.0).unwrap();
        assert!(circle.cauchy_transform(c(0.0, 1.0)).is_err());
    }

    #[test]
    fn eta_examples() {
        let a = 2.5;
        let m = MeasureRep::point_mass(Support::PositiveLine, a, 1.0).unwrap();
        for z in [c(-1.0, 0.0), c(0.2, 0.4), c(-3.0, 2.0)] {
            assert_abs_diff_eq!(
                (m.eta_transform(z).unwrap() - z * a).norm(),
                0.0,
                epsilon = 1e-14
            );
            let (r, dr) = m.eta_ratio_jet(z).unwrap();
            assert_abs_diff_eq!((r - a).norm(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(dr.norm(), 0.0, epsilon = 1e-13);
        }
        let d1 = MeasureRep::point_mass(Support::Circle, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            (d1.psi_transform(c(0.5, 0.0)).unwrap() - 1.0).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            (d1.eta_transform(c(0.5, 0.0)).unwrap() - 0.5).norm(),
            0.0,
            epsilon = 1e-15
        );
        let haar = catalog::haar(64).unwrap();
        for z in [c(0.3, 0.1), c(-0.5, 0.5), c(0.0, -0.8)] {
            assert!(haar.eta_transform(z).unwrap().norm() < 1e-13);
        }
        let real = MeasureRep::point_mass(Support::RealLine, 1.0, 1.0).unwrap();
        assert!(real.psi_transform(c(0.1, 0.1)).is_err());
    }

    #[test]
    fn degenerate_eta() {
        // psi(z) = z/(1 - z) for delta_1 on the circle; 1 + psi = 1/(1 - z) never vanishes,
        // but a two-point measure can hit -1.
        let m = MeasureRep::new(
            Support::Circle,
            vec![Atom::at(0.0, 0.5), Atom::at(PI, 0.5)],
            None,
        )
        .unwrap();
        // psi(z) = z^2/(1 - z^2); 1 + psi = 1/(1 - z^2) is never zero inside the disk.
        assert!(m.eta_transform(c(0.5, 0.0)).is_ok());
        let ratio = m.eta_ratio_jet(c(0.0, 0.0)).unwrap().0;
        assert_abs_diff_eq!(ratio.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn f_ratio_examples() {
        let f_const = ClassFData::point_mass(1.7).unwrap();
        assert_eq!(f_const.f_ratio(c(0.3, 0.9)).unwrap(), c(1.7, 0.0));
        let d1 = ClassFData::new(
            0.0,
            MeasureRep::point_mass(Support::PositiveLine, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(
            (d1.f_ratio(c(-1.0, 0.0)).unwrap() - 1.0).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            (d1.f_ratio(c(0.0, 1.0)).unwrap() - c(1.0, 1.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
        let x = c(-2.3, 0.7);
        assert_abs_diff_eq!(
            (d1.f_ratio(x.conj()).unwrap() - d1.f_ratio(x).unwrap().conj()).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            d1.f_ratio(c(1.0, 0.0)),
            Err(MeasureError::PointOnSupport(_))
        ));
        assert_abs_diff_eq!(d1.tail_integral(), 2.0);
        assert_abs_diff_eq!(d1.inv_t_integral(), 1.0);
        assert!(ClassFData::new(0.0, MeasureRep::zero(Support::PositiveLine)).is_err());
        let bad =
            MeasureRep::from_density_fn(Support::PositiveLine, vec![0.0, 1.0], |_| 1.0).unwrap();
        assert!(ClassFData::new(0.0, bad).is_err());
    }

    #[test]
    fn nevanlinna_identity_criterion() {
        let zero = MeasureRep::zero(Support::RealLine);
        assert!(NevanlinnaData::new(1.0, 0.0, zero.clone())
            .unwrap()
            .is_identity());
        assert!(!NevanlinnaData::new(1.0, 0.1, zero.clone())
            .unwrap()
            .is_identity());
        assert!(!NevanlinnaData::new(0.9, 0.0, zero).unwrap().is_identity());
        let tiny = MeasureRep::point_mass(Support::RealLine, 3.0, 1e-300).unwrap();
        assert!(!NevanlinnaData::new(1.0, 0.0, tiny).unwrap().is_identity());
        let inf = MeasureRep::new(
            Support::RealLine,
            vec![Atom {
                position: AtomPosition::Infinity,
                mass: 1.0,
            }],
            None,
        )
        .unwrap();
        assert!(NevanlinnaData::new(0.0, 0.0, inf.clone()).is_err());
        // an atom at infinity contributes z to the Nevanlinna kernel and 1 to the identity kernel
        assert_eq!(
            inf.integrate_kernel(Kernel::Nevanlinna, c(0.2, 3.0))
                .unwrap(),
            c(0.2, 3.0)
        );
        assert_eq!(
            inf.integrate_kernel(Kernel::ImagIdentity, c(0.0, 3.0))
                .unwrap(),
            c(1.0, 0.0)
        );
        assert!(inf.integrate_kernel(Kernel::EtaPsi, c(0.0, 3.0)).is_err());
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(MeasureRep::point_mass(Support::RealLine, 0.0, -1.0).is_err());
        assert!(MeasureRep::point_mass(Support::PositiveLine, -1.0, 1.0).is_err());
        assert!(MeasureRep::point_mass(Support::Circle, 4.0, 1.0).is_err());
        assert!(MeasureRep::new(
            Support::RealLine,
            vec![Atom::at(1.0, 0.5), Atom::at(1.0, 0.5)],
            None
        )
        .is_err());
        let d = Density {
            grid: vec![0.0, 0.0],
            values: vec![1.0, 1.0],
        };
        assert!(MeasureRep::new(Support::RealLine, vec![], Some(d)).is_err());
        let d = Density {
            grid: vec![0.0, 1.0],
            values: vec![1.0, -1.0],
        };
        assert!(MeasureRep::new(Support::RealLine, vec![], Some(d)).is_err());
    }

    #[test]
    fn mass_bookkeeping() {
        let m = MeasureRep::new(
            Support::RealLine,
            vec![Atom::at(3.0, 0.25)],
            Some(Density {
                grid: vec![0.0, 1.0, 2.0],
                values: vec![0.0, 0.75, 0.0],
            }),
        )
        .unwrap();
        assert_abs_diff_eq!(m.total_mass(), 1.0, epsilon = 1e-15);
        assert!(mass_defect(&m) < 1e-10);
        assert!(m.is_probability());
        assert_abs_diff_eq!(m.moment(0).re, 1.0, epsilon = 1e-14);
        let scaled = m.scaled(2.0).unwrap();
        assert!(!scaled.is_probability());
        assert!(scaled.normalized().unwrap().is_probability());
        assert_eq!(m.unit_point_mass(), None);
        assert_eq!(
            MeasureRep::point_mass(Support::RealLine, 2.0, 1.0)
                .unwrap()
                .unit_point_mass(),
            Some(2.0)
        );
    }

    #[test]
    fn kernel_derivatives_match_difference_quotients() {
        let m = catalog::semicircle(1.0, 201).unwrap();
        let z = c(0.4, 0.6);
        let h = 1e-5;
        for k in [Kernel::Nevanlinna, Kernel::Cauchy] {
            let (_, d) = m.integrate_kernel_jet(k, z).unwrap();
            let fd = (m.integrate_kernel(k, z + h).unwrap()
                - m.integrate_kernel(k, z - h).unwrap())
                / (2.0 * h);
            assert!((d - fd).norm() < 1e-8, "{k:?}");
        }
        let p = catalog::marchenko_pastur(1.0, 400).unwrap();
        let (_, d) = p.eta_ratio_jet(z).unwrap();
        let fd =
            (p.eta_ratio_jet(z + h).unwrap().0 - p.eta_ratio_jet(z - h).unwrap().0) / (2.0 * h);
        assert!((d - fd).norm() < 1e-8);
    }
}
