//! Points of the Riemann sphere, the three working domains, the Cayley
//! transform between the upper half-plane and the disk, and the wedge maps
//! that straighten an angular sector of the upper half-plane.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative distance below which a point counts as lying on a boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("NaN is not a point of the Riemann sphere")]
    NotANumber,
    #[error("point {0} is not in the open upper half-plane")]
    NotInUpperHalfPlane(Complex64),
    #[error("point {point} is outside the wedge arg > {theta}")]
    OutsideWedge { point: Complex64, theta: f64 },
    #[error("wedge angle {0} is outside [0, pi)")]
    BadAngle(f64),
}

/// A point of the Riemann sphere: a finite complex number or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(z: Complex64) -> Result<Self, DomainError> {
        if z.re.is_nan() || z.im.is_nan() {
            Err(DomainError::NotANumber)
        } else if !z.is_finite() {
            Ok(SpherePoint::Infinity)
        } else {
            Ok(SpherePoint::Finite(z))
        }
    }

    pub fn real(x: f64) -> Result<Self, DomainError> {
        Self::finite(Complex64::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Chordal distance on the unit sphere; finite for every pair of points.
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        match (*self, *other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
            }
        }
    }
}

impl From<Complex64> for SpherePoint {
    /// Non-finite components collapse to infinity; NaN is the caller's bug.
    fn from(z: Complex64) -> Self {
        debug_assert!(!z.re.is_nan() && !z.im.is_nan());
        if z.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            SpherePoint::Infinity => write!(f, "inf"),
        }
    }
}

/// The domains on which self-maps live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainTag {
    /// The open unit disk.
    Disk,
    /// The open upper half-plane.
    HalfPlane,
    /// The plane slit along `[0, +inf)`.
    SlitPlane,
}

impl DomainTag {
    /// Membership in the open domain, with a point within [`BOUNDARY_TOL`]
    /// (relative) of the boundary counted as outside.
    pub fn contains(&self, p: &SpherePoint) -> bool {
        let Some(z) = p.as_finite() else {
            return false;
        };
        match self {
            DomainTag::Disk => z.norm() < 1.0 - BOUNDARY_TOL,
            DomainTag::HalfPlane => z.im > BOUNDARY_TOL * z.norm().max(1.0),
            DomainTag::SlitPlane => z.re < 0.0 || z.im.abs() > BOUNDARY_TOL * z.norm().max(1.0),
        }
    }

    pub fn on_boundary(&self, p: &SpherePoint) -> bool {
        let Some(z) = p.as_finite() else {
            return !matches!(self, DomainTag::Disk);
        };
        match self {
            DomainTag::Disk => (z.norm() - 1.0).abs() <= BOUNDARY_TOL,
            DomainTag::HalfPlane => z.im.abs() <= BOUNDARY_TOL * z.norm().max(1.0),
            DomainTag::SlitPlane => z.re >= 0.0 && z.im.abs() <= BOUNDARY_TOL * z.norm().max(1.0),
        }
    }

    pub fn in_closure(&self, p: &SpherePoint) -> bool {
        self.contains(p) || self.on_boundary(p)
    }

    /// Whether values landing in `self` may be fed to a map defined on `target`.
    pub fn fits_into(&self, target: DomainTag) -> bool {
        matches!(
            (self, target),
            (DomainTag::Disk, DomainTag::Disk)
                | (DomainTag::HalfPlane, DomainTag::HalfPlane)
                | (DomainTag::HalfPlane, DomainTag::SlitPlane)
                | (DomainTag::SlitPlane, DomainTag::SlitPlane)
        )
    }
}

/// `z -> (z - i)/(z + i)`, extended to the closed half-plane with `inf -> 1`.
pub fn cayley(z: SpherePoint) -> SpherePoint {
    match z {
        SpherePoint::Infinity => SpherePoint::Finite(Complex64::new(1.0, 0.0)),
        SpherePoint::Finite(z) => {
            let den = z + I;
            if den == Complex64::new(0.0, 0.0) {
                SpherePoint::Infinity
            } else {
                SpherePoint::from((z - I) / den)
            }
        }
    }
}

/// Inverse Cayley transform `w -> i(1 + w)/(1 - w)`, with `1 -> inf`.
pub fn cayley_inv(w: SpherePoint) -> SpherePoint {
    match w {
        SpherePoint::Infinity => SpherePoint::Finite(-I),
        SpherePoint::Finite(w) => {
            let den = Complex64::new(1.0, 0.0) - w;
            if den == Complex64::new(0.0, 0.0) {
                SpherePoint::Infinity
            } else {
                SpherePoint::from(I * (1.0 + w) / den)
            }
        }
    }
}

/// Finite-point Cayley transform used on hot paths.
#[inline]
pub fn cayley_c(z: Complex64) -> Complex64 {
    (z - I) / (z + I)
}

#[inline]
pub fn cayley_inv_c(w: Complex64) -> Complex64 {
    I * (1.0 + w) / (1.0 - w)
}

/// `1 - |cayley(z)|` computed without cancellation for points near the real
/// axis: `1 - |w|^2 = 4 Im z / |z + i|^2`.
pub fn disk_defect_from_half_plane(z: SpherePoint) -> f64 {
    match z {
        SpherePoint::Infinity => 0.0,
        SpherePoint::Finite(z) => {
            let d = 4.0 * z.im / (z + I).norm_sqr();
            let w = cayley_c(z).norm();
            d / (1.0 + w)
        }
    }
}

fn check_angle(theta: f64) -> Result<f64, DomainError> {
    if (0.0..PI).contains(&theta) {
        Ok(1.0 - theta / PI)
    } else {
        Err(DomainError::BadAngle(theta))
    }
}

/// The conformal map `u(lambda) = -(-lambda)^(1 - theta/pi)` from the upper
/// half-plane onto the wedge `{arg > theta}`, principal branch.
pub fn wedge_map(lambda: Complex64, theta: f64) -> Result<Complex64, DomainError> {
    let p = check_angle(theta)?;
    if !(lambda.im > 0.0) {
        return Err(DomainError::NotInUpperHalfPlane(lambda));
    }
    if p == 1.0 {
        return Ok(lambda);
    }
    Ok(-(-lambda).powf(p))
}

/// Extension of [`wedge_map`] to the closed half-plane, real points taken as
/// limits from above: negative reals stay on the negative axis, positive
/// reals land on the ray `arg = theta`.
pub fn wedge_map_closure(lambda: Complex64, theta: f64) -> Result<Complex64, DomainError> {
    let p = check_angle(theta)?;
    if lambda.im > 0.0 {
        return wedge_map(lambda, theta);
    }
    if lambda.im < 0.0 {
        return Err(DomainError::NotInUpperHalfPlane(lambda));
    }
    let r = lambda.re.abs().powf(p);
    if lambda.re <= 0.0 {
        Ok(Complex64::new(-r, 0.0))
    } else {
        Ok(Complex64::from_polar(r, theta))
    }
}

/// Inverse of [`wedge_map`]: the wedge `{theta < arg < pi}` back onto the
/// upper half-plane.
pub fn wedge_map_inv(w: Complex64, theta: f64) -> Result<Complex64, DomainError> {
    let p = check_angle(theta)?;
    let arg = w.arg();
    if !(w.im > 0.0 && arg > theta) {
        return Err(DomainError::OutsideWedge { point: w, theta });
    }
    if p == 1.0 {
        return Ok(w);
    }
    Ok(-(-w).powf(1.0 / p))
}

/// Unchecked wedge pair used inside composite maps, where iterates may sit
/// a rounding error outside the open wedge.
#[inline]
pub(crate) fn wedge_forward_raw(lambda: Complex64, p: f64) -> (Complex64, Complex64) {
    if p == 1.0 {
        return (lambda, Complex64::new(1.0, 0.0));
    }
    let m = -lambda;
    let v = m.powf(p);
    // d/dlambda [-(-lambda)^p] = p (-lambda)^(p-1)
    (-v, p * v / m)
}

#[inline]
pub(crate) fn wedge_inverse_raw(w: Complex64, p: f64) -> (Complex64, Complex64) {
    if p == 1.0 {
        return (w, Complex64::new(1.0, 0.0));
    }
    let m = -w;
    let v = m.powf(1.0 / p);
    (-v, v / (p * m))
}
