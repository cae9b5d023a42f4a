//! Evaluable analytic self-maps of the disk, the upper half-plane and the
//! slit plane, and the parametrized families whose Denjoy-Wolff points are
//! subordination functions.
//!
//! Every body evaluates to a value together with its complex derivative, so
//! the fixed-point solver can take Newton steps on any map built here.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::domains::{
    wedge_forward_raw, wedge_inverse_raw, DomainError, DomainTag, SpherePoint, BOUNDARY_TOL,
};
use crate::measures::{
    AtomPosition, ClassFData, MeasureError, MeasureRep, NevanlinnaData, Support, PROBABILITY_TOL,
};
use crate::numerics::extrapolate_to_zero;

type C = Complex64;

const ZERO: C = C { re: 0.0, im: 0.0 };
const ONE: C = C { re: 1.0, im: 0.0 };

/// Step schedule for radial and vertical-ray limits at boundary points.
pub const RADIAL_STEPS: [f64; 3] = [1e-3, 1e-5, 1e-7];
/// Agreement required between successive radial extrapolants.
pub const RADIAL_AGREEMENT: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("point {0} is outside the closure of the {1:?} domain")]
    DomainViolation(SpherePoint, DomainTag),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("evaluation overflowed at {0}")]
    Overflow(C),
    #[error("invalid map: {0}")]
    Invalid(String),
    #[error("value {value} left the wedge arg > {theta}")]
    WedgeViolation { value: C, theta: f64 },
    #[error("no limit at {point}: extrapolants disagree by {defect:e}")]
    NoLimit { point: SpherePoint, defect: f64 },
}

/// The closed-form or transform-backed rule of a [`SelfMap`].
#[derive(Debug, Clone)]
pub enum Body {
    Constant(SpherePoint),
    Affine {
        a: C,
        b: C,
    },
    Moebius {
        a: C,
        b: C,
        c: C,
        d: C,
    },
    /// Coefficients in increasing degree.
    Polynomial(Vec<C>),
    Nevanlinna(NevanlinnaData),
    /// `f(lambda) = eta(lambda)/lambda` from its class-F data.
    EtaRatio(ClassFData),
    /// `F_mu(z) - z` for a probability measure on the real line.
    FShift(MeasureRep),
    /// `eta_mu(lambda)/lambda` for a probability measure on the circle or
    /// the positive half-line.
    EtaRatioMeasure(MeasureRep),
    /// Applied left to right.
    Composite(Vec<SelfMap>),
    /// `lambda -> inner(mu lambda)/mu` with `|mu| = 1`.
    ScaledRotation {
        mu: C,
        inner: SelfMap,
    },
    /// `lambda -> factor * inner(lambda)`.
    Scaled {
        factor: C,
        inner: SelfMap,
    },
    /// `lambda -> shift + inner(lambda)`.
    Shifted {
        shift: C,
        inner: SelfMap,
    },
    /// `lambda -> numerator / inner(lambda)`.
    Quotient {
        numerator: C,
        inner: SelfMap,
    },
    /// `u^{-1}(inner(u(lambda)))` with `u` the wedge map of angle `theta`.
    WedgeConjugate {
        theta: f64,
        inner: SelfMap,
    },
}

/// An analytic map of `domain` into the closure of its codomain.
#[derive(Debug, Clone)]
pub struct SelfMap {
    domain: DomainTag,
    body: Arc<Body>,
}

fn in_closed_wedge(v: C, theta: f64) -> bool {
    if v.im < -1e-9 * v.norm() {
        return false;
    }
    v.re < 0.0 || theta == 0.0 || v.arg() >= theta - 1e-9
}

fn finite_or_overflow(v: C, at: C) -> Result<C, MapError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(MapError::Overflow(at))
    }
}

/// Deterministic points spread over a domain (golden-angle spiral on the
/// disk, pushed to the other domains by conformal maps).
pub fn sample_points(domain: DomainTag, n: usize) -> Vec<C> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let r = ((k as f64 + 0.5) / n as f64).sqrt() * (1.0 - 1e-6);
            let w = C::from_polar(r, k as f64 * golden);
            match domain {
                DomainTag::Disk => w,
                DomainTag::HalfPlane => crate::domains::cayley_inv_c(w),
                DomainTag::SlitPlane => {
                    // the square of the upper half-plane is the slit plane
                    let z = crate::domains::cayley_inv_c(w);
                    z * z
                }
            }
        })
        .collect()
}

impl SelfMap {
    fn raw(domain: DomainTag, body: Body) -> Self {
        SelfMap {
            domain,
            body: Arc::new(body),
        }
    }

    /// Builds a closed-form map and checks it on sampled points.
    fn checked(domain: DomainTag, body: Body) -> Result<Self, MapError> {
        let m = Self::raw(domain, body);
        validate_self_map(&m, 1000)?;
        Ok(m)
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn codomain(&self) -> DomainTag {
        self.domain
    }

    pub fn constant(domain: DomainTag, value: SpherePoint) -> Result<Self, MapError> {
        if !domain.in_closure(&value) {
            return Err(MapError::DomainViolation(value, domain));
        }
        Ok(Self::raw(domain, Body::Constant(value)))
    }

    pub fn affine(domain: DomainTag, a: C, b: C) -> Result<Self, MapError> {
        Self::checked(domain, Body::Affine { a, b })
    }

    pub fn moebius(domain: DomainTag, a: C, b: C, c: C, d: C) -> Result<Self, MapError> {
        if a * d - b * c == ZERO {
            return Err(MapError::Invalid("moebius map with ad - bc = 0".into()));
        }
        Self::checked(domain, Body::Moebius { a, b, c, d })
    }

    pub fn polynomial(domain: DomainTag, coeffs: Vec<C>) -> Result<Self, MapError> {
        if coeffs.is_empty() {
            return Err(MapError::Invalid(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        Self::checked(domain, Body::Polynomial(coeffs))
    }

    pub fn nevanlinna(data: NevanlinnaData) -> Self {
        Self::raw(DomainTag::HalfPlane, Body::Nevanlinna(data))
    }

    pub fn eta_ratio(data: ClassFData) -> Self {
        Self::raw(DomainTag::SlitPlane, Body::EtaRatio(data))
    }

    /// `psi = F_mu - z`; `mu` must be a probability measure on the real line.
    pub fn f_shift(mu: MeasureRep) -> Result<Self, MapError> {
        if mu.support() != Support::RealLine {
            return Err(MeasureError::WrongSupport {
                expected: "the real line",
                got: mu.support(),
            }
            .into());
        }
        mu.require_probability()?;
        if mu.mass_at_infinity() > 0.0 {
            return Err(MapError::Invalid("measure charges infinity".into()));
        }
        Ok(Self::raw(DomainTag::HalfPlane, Body::FShift(mu)))
    }

    /// `eta_mu(lambda)/lambda`, a self-map of the disk for circle measures
    /// and a slit-plane map for measures on `[0, inf)`.
    pub fn eta_ratio_measure(mu: MeasureRep) -> Result<Self, MapError> {
        mu.require_probability()?;
        let domain = match mu.support() {
            Support::Circle => DomainTag::Disk,
            Support::PositiveLine => DomainTag::SlitPlane,
            Support::RealLine => {
                return Err(MeasureError::WrongSupport {
                    expected: "the circle or positive line",
                    got: Support::RealLine,
                }
                .into())
            }
        };
        Ok(Self::raw(domain, Body::EtaRatioMeasure(mu)))
    }

    pub fn composite(parts: Vec<SelfMap>) -> Result<Self, MapError> {
        let Some(first) = parts.first() else {
            return Err(MapError::Invalid("empty composite".into()));
        };
        let domain = first.domain;
        for w in parts.windows(2) {
            if !w[0].codomain().fits_into(w[1].domain) {
                return Err(MapError::Invalid(format!(
                    "cannot feed a {:?} map into a {:?} map",
                    w[0].codomain(),
                    w[1].domain
                )));
            }
        }
        Ok(Self::raw(domain, Body::Composite(parts)))
    }

    pub fn scaled_rotation(mu: C, inner: SelfMap) -> Result<Self, MapError> {
        if (mu.norm() - 1.0).abs() > BOUNDARY_TOL || inner.domain != DomainTag::Disk {
            return Err(MapError::Invalid(
                "scaled rotation needs |mu| = 1 and a disk map".into(),
            ));
        }
        Ok(Self::raw(
            DomainTag::Disk,
            Body::ScaledRotation { mu, inner },
        ))
    }

    /// `factor * inner`. On the disk `|factor| <= 1`; on the half-plane
    /// `factor > 0`; on the slit plane `factor` lies in the closed upper
    /// half-plane (the map then preserves the wedge above `arg factor`).
    pub fn scaled(factor: C, inner: SelfMap) -> Result<Self, MapError> {
        let ok = match inner.domain {
            DomainTag::Disk => factor.norm() <= 1.0 + BOUNDARY_TOL,
            DomainTag::HalfPlane => factor.im == 0.0 && factor.re >= 0.0,
            DomainTag::SlitPlane => factor.im >= 0.0 && factor != ZERO,
        };
        if !ok || !factor.is_finite() {
            return Err(MapError::Invalid(format!(
                "factor {factor} does not preserve the {:?} domain",
                inner.domain
            )));
        }
        Ok(Self::raw(inner.domain, Body::Scaled { factor, inner }))
    }

    /// `shift + inner` on the half-plane, `Im shift >= 0`.
    pub fn shifted(shift: C, inner: SelfMap) -> Result<Self, MapError> {
        if inner.domain != DomainTag::HalfPlane || shift.im < 0.0 || !shift.is_finite() {
            return Err(MapError::Invalid(
                "shift needs a half-plane map and Im shift >= 0".into(),
            ));
        }
        Ok(Self::raw(
            DomainTag::HalfPlane,
            Body::Shifted { shift, inner },
        ))
    }

    pub fn quotient(numerator: C, inner: SelfMap) -> Self {
        Self::raw(inner.domain, Body::Quotient { numerator, inner })
    }

    /// Conjugates a wedge-preserving slit-plane map to a self-map of the
    /// upper half-plane.
    pub fn wedge_conjugate(theta: f64, inner: SelfMap) -> Result<Self, MapError> {
        if !(0.0..PI).contains(&theta) {
            return Err(DomainError::BadAngle(theta).into());
        }
        Ok(Self::raw(
            DomainTag::HalfPlane,
            Body::WedgeConjugate { theta, inner },
        ))
    }

    /// Value and derivative at a finite point.
    pub fn eval_jet(&self, z: C) -> Result<(C, C), MapError> {
        let (v, d) = match &*self.body {
            Body::Constant(SpherePoint::Finite(g)) => (*g, ZERO),
            Body::Constant(SpherePoint::Infinity) => return Err(MapError::Overflow(z)),
            Body::Affine { a, b } => (a * z + b, *a),
            Body::Moebius { a, b, c, d } => {
                let den = c * z + d;
                if den == ZERO {
                    return Err(MapError::Overflow(z));
                }
                ((a * z + b) / den, (a * d - b * c) / (den * den))
            }
            Body::Polynomial(cs) => {
                let mut v = ZERO;
                let mut dv = ZERO;
                for c in cs.iter().rev() {
                    dv = dv * z + v;
                    v = v * z + c;
                }
                (v, dv)
            }
            Body::Nevanlinna(n) => n.eval_jet(z)?,
            Body::EtaRatio(f) => f.f_ratio_jet(z)?,
            Body::FShift(mu) => mu.f_shift_jet(z)?,
            Body::EtaRatioMeasure(mu) => mu.eta_ratio_jet(z)?,
            Body::Composite(parts) => {
                let mut v = z;
                let mut d = ONE;
                for p in parts {
                    let (pv, pd) = p.eval_jet(v)?;
                    v = pv;
                    d *= pd;
                }
                (v, d)
            }
            Body::ScaledRotation { mu, inner } => {
                let (v, d) = inner.eval_jet(mu * z)?;
                (v / mu, d)
            }
            Body::Scaled { factor, inner } => {
                let (v, d) = inner.eval_jet(z)?;
                (factor * v, factor * d)
            }
            Body::Shifted { shift, inner } => {
                let (v, d) = inner.eval_jet(z)?;
                (shift + v, d)
            }
            Body::Quotient { numerator, inner } => {
                let (v, d) = inner.eval_jet(z)?;
                if v == ZERO {
                    return Err(MapError::Overflow(z));
                }
                let q = numerator / v;
                (q, -q * d / v)
            }
            Body::WedgeConjugate { theta, inner } => {
                let p = 1.0 - theta / PI;
                let (w, dw) = wedge_forward_raw(z, p);
                let (v, dv) = inner.eval_jet(w)?;
                if !in_closed_wedge(v, *theta) {
                    return Err(MapError::WedgeViolation {
                        value: v,
                        theta: *theta,
                    });
                }
                let (r, dr) = wedge_inverse_raw(v, p);
                (r, dr * dv * dw)
            }
        };
        Ok((finite_or_overflow(v, z)?, d))
    }

    pub fn eval(&self, z: C) -> Result<C, MapError> {
        self.eval_jet(z).map(|(v, _)| v)
    }

    /// Evaluates at a point of the closed domain. Infinity is handled by the
    /// known behaviour of each body; overflow becomes infinity on unbounded
    /// codomains.
    pub fn evaluate(&self, p: SpherePoint) -> Result<SpherePoint, MapError> {
        if !self.domain.in_closure(&p) && self.domain != DomainTag::SlitPlane {
            return Err(MapError::DomainViolation(p, self.domain));
        }
        match p {
            SpherePoint::Infinity => self.value_at_infinity().ok_or(MapError::NoLimit {
                point: SpherePoint::Infinity,
                defect: f64::INFINITY,
            }),
            SpherePoint::Finite(z) => match self.eval(z) {
                Ok(v) => Ok(SpherePoint::Finite(v)),
                Err(MapError::Overflow(_)) if self.codomain() != DomainTag::Disk => {
                    Ok(SpherePoint::Infinity)
                }
                Err(e) => Err(e),
            },
        }
    }

    /// The value at infinity when it follows from the structure of the body
    /// (vertical-ray limit for half-plane maps).
    pub fn value_at_infinity(&self) -> Option<SpherePoint> {
        use SpherePoint::{Finite, Infinity};
        match &*self.body {
            Body::Constant(g) => Some(*g),
            Body::Affine { a, b } => Some(if *a != ZERO { Infinity } else { Finite(*b) }),
            Body::Moebius { a, b, c, d } => Some(if *c != ZERO {
                Finite(a / c)
            } else if *a != ZERO {
                Infinity
            } else {
                Finite(b / d)
            }),
            Body::Polynomial(cs) => {
                let deg = cs.iter().rposition(|c| *c != ZERO);
                Some(match deg {
                    Some(k) if k >= 1 => Infinity,
                    Some(k) => Finite(cs[k]),
                    None => Finite(ZERO),
                })
            }
            Body::Nevanlinna(n) => {
                if n.alpha > 0.0 {
                    Some(Infinity)
                } else {
                    // (1 + t z)/(t - z) -> -t along the imaginary axis
                    Some(Finite(C::new(n.beta - n.sigma.moment(1).re, 0.0)))
                }
            }
            // F(z) - z -> -mean for compactly supported measures
            Body::FShift(mu) => Some(Finite(-mu.moment(1))),
            Body::EtaRatio(f) => Some(Finite(C::new(f.beta, 0.0))),
            Body::EtaRatioMeasure(_) => None,
            Body::Composite(parts) => {
                let mut v = Infinity;
                for p in parts {
                    v = p.evaluate(v).ok()?;
                }
                Some(v)
            }
            Body::ScaledRotation { .. } => None,
            Body::Scaled { factor, inner } => match inner.value_at_infinity()? {
                Infinity if *factor == ZERO => Some(Finite(ZERO)),
                Infinity => Some(Infinity),
                Finite(v) => Some(Finite(factor * v)),
            },
            Body::Shifted { shift, inner } => match inner.value_at_infinity()? {
                Infinity => Some(Infinity),
                Finite(v) => Some(Finite(shift + v)),
            },
            Body::Quotient { numerator, inner } => match inner.value_at_infinity()? {
                Infinity => Some(Finite(ZERO)),
                Finite(v) if v == ZERO => Some(Infinity),
                Finite(v) => Some(Finite(numerator / v)),
            },
            Body::WedgeConjugate { .. } => None,
        }
    }

    /// `Some(gamma)` when the map is constant by construction.
    pub fn constant_value(&self) -> Option<SpherePoint> {
        use SpherePoint::Finite;
        match &*self.body {
            Body::Constant(g) => Some(*g),
            Body::Affine { a, b } if *a == ZERO => Some(Finite(*b)),
            Body::Polynomial(cs) if cs.iter().skip(1).all(|c| *c == ZERO) => Some(Finite(cs[0])),
            Body::Nevanlinna(n) if n.alpha == 0.0 && n.sigma.total_mass() == 0.0 => {
                Some(Finite(C::new(n.beta, 0.0)))
            }
            Body::EtaRatio(f) if f.is_point_mass() => Some(Finite(C::new(f.beta, 0.0))),
            Body::FShift(mu) => mu.unit_point_mass().map(|a| Finite(C::new(-a, 0.0))),
            Body::EtaRatioMeasure(mu) => {
                let a = mu.unit_point_mass()?;
                Some(Finite(match mu.support() {
                    Support::Circle => C::from_polar(1.0, a),
                    _ => C::new(a, 0.0),
                }))
            }
            Body::Composite(parts) => {
                let k = parts.iter().rposition(|p| p.constant_value().is_some())?;
                let mut v = parts[k].constant_value()?;
                for p in &parts[k + 1..] {
                    v = p.evaluate(v).ok()?;
                }
                Some(v)
            }
            Body::Scaled { factor, .. } if *factor == ZERO => Some(Finite(ZERO)),
            Body::Scaled { factor, inner } => match inner.constant_value()? {
                Finite(v) => Some(Finite(factor * v)),
                SpherePoint::Infinity => Some(SpherePoint::Infinity),
            },
            Body::Shifted { shift, inner } => match inner.constant_value()? {
                Finite(v) => Some(Finite(shift + v)),
                SpherePoint::Infinity => Some(SpherePoint::Infinity),
            },
            Body::ScaledRotation { mu, inner } => match inner.constant_value()? {
                Finite(v) => Some(Finite(v / mu)),
                SpherePoint::Infinity => None,
            },
            Body::Quotient { numerator, inner } => match inner.constant_value()? {
                Finite(v) if v == ZERO => Some(SpherePoint::Infinity),
                Finite(v) => Some(Finite(numerator / v)),
                SpherePoint::Infinity => Some(Finite(ZERO)),
            },
            Body::WedgeConjugate { theta, inner } => match inner.constant_value()? {
                Finite(v) => Some(Finite(wedge_inverse_raw(v, 1.0 - theta / PI).0)),
                SpherePoint::Infinity => Some(SpherePoint::Infinity),
            },
            _ => None,
        }
    }

    /// The map as a 2x2 matrix `[a, b, c, d]` when it is a non-degenerate
    /// fractional linear map by construction.
    pub fn as_moebius(&self) -> Option<[C; 4]> {
        let mul = |p: [C; 4], q: [C; 4]| {
            [
                p[0] * q[0] + p[1] * q[2],
                p[0] * q[1] + p[1] * q[3],
                p[2] * q[0] + p[3] * q[2],
                p[2] * q[1] + p[3] * q[3],
            ]
        };
        let m = match &*self.body {
            Body::Affine { a, b } => [*a, *b, ZERO, ONE],
            Body::Moebius { a, b, c, d } => [*a, *b, *c, *d],
            Body::Polynomial(cs) => {
                if cs.len() > 2 && cs[2..].iter().any(|c| *c != ZERO) {
                    return None;
                }
                [cs.get(1).copied().unwrap_or(ZERO), cs[0], ZERO, ONE]
            }
            Body::Nevanlinna(n) if n.sigma.total_mass() == 0.0 => {
                [C::new(n.alpha, 0.0), C::new(n.beta, 0.0), ZERO, ONE]
            }
            Body::Composite(parts) => {
                let mut acc = [ONE, ZERO, ZERO, ONE];
                for p in parts {
                    acc = mul(p.as_moebius()?, acc);
                }
                acc
            }
            Body::ScaledRotation { mu, inner } => {
                let m = inner.as_moebius()?;
                mul([mu.inv(), ZERO, ZERO, ONE], mul(m, [*mu, ZERO, ZERO, ONE]))
            }
            Body::Scaled { factor, inner } => mul([*factor, ZERO, ZERO, ONE], inner.as_moebius()?),
            Body::Shifted { shift, inner } => mul([ONE, *shift, ZERO, ONE], inner.as_moebius()?),
            Body::Quotient { numerator, inner } => {
                mul([ZERO, *numerator, ONE, ZERO], inner.as_moebius()?)
            }
            Body::WedgeConjugate { theta, inner } if *theta == 0.0 => inner.as_moebius()?,
            _ => return None,
        };
        if m[0] * m[3] - m[1] * m[2] == ZERO {
            None
        } else {
            Some(m)
        }
    }

    /// `lim psi(iy)/(iy)` when the body determines it: the point mass of the
    /// Nevanlinna measure at infinity.
    pub fn structural_alpha(&self) -> Option<f64> {
        match &*self.body {
            Body::Nevanlinna(n) => Some(n.alpha),
            Body::FShift(_) | Body::Constant(_) => Some(0.0),
            Body::Affine { a, .. } if a.im == 0.0 && a.re >= 0.0 => Some(a.re),
            Body::Shifted { inner, .. } => inner.structural_alpha(),
            Body::Scaled { factor, inner } if factor.im == 0.0 => {
                Some(factor.re * inner.structural_alpha()?)
            }
            Body::Composite(parts) if parts.iter().all(|p| p.domain == DomainTag::HalfPlane) => {
                let mut a = 1.0;
                for p in parts {
                    a *= p.structural_alpha()?;
                }
                Some(a)
            }
            _ => None,
        }
    }

    /// True iff the map is the identity: the exact criterion for Nevanlinna
    /// data and fractional linear bodies, comparison at five points otherwise.
    pub fn is_identity(&self) -> bool {
        match &*self.body {
            Body::Nevanlinna(n) => return n.is_identity(),
            Body::Constant(_) | Body::EtaRatio(_) | Body::FShift(_) | Body::EtaRatioMeasure(_) => {
                return false
            }
            _ => {}
        }
        if self.constant_value().is_some() {
            return false;
        }
        if let Some([a, b, c, d]) = self.as_moebius() {
            return b == ZERO && c == ZERO && a == d;
        }
        let probes = match self.domain {
            DomainTag::Disk => [
                C::new(0.0, 0.0),
                C::new(0.3, 0.1),
                C::new(-0.2, 0.5),
                C::new(0.1, -0.6),
                C::new(-0.7, -0.2),
            ],
            _ => [
                C::new(0.0, 1.0),
                C::new(0.5, 0.3),
                C::new(-1.3, 2.0),
                C::new(2.2, 0.7),
                C::new(-0.4, 5.0),
            ],
        };
        probes.iter().all(|&p| match self.eval(p) {
            Ok(v) => (v - p).norm() <= 1e-14 * p.norm().max(1.0),
            Err(_) => false,
        })
    }
}

/// Checks that sampled interior points land in the closed codomain.
pub fn validate_self_map(m: &SelfMap, samples: usize) -> Result<(), MapError> {
    for z in sample_points(m.domain, samples) {
        let v = match m.evaluate(SpherePoint::Finite(z)) {
            Ok(v) => v,
            Err(MapError::Overflow(_)) => SpherePoint::Infinity,
            Err(e) => return Err(e),
        };
        let ok = match (m.codomain(), v) {
            (DomainTag::Disk, SpherePoint::Finite(w)) => w.norm() <= 1.0 + 1e-12,
            (DomainTag::Disk, SpherePoint::Infinity) => false,
            (DomainTag::HalfPlane, SpherePoint::Finite(w)) => w.im >= -1e-12 * w.norm().max(1.0),
            _ => true,
        };
        if !ok {
            return Err(MapError::Invalid(format!(
                "sample {z} is sent to {v}, outside the closed {:?} codomain",
                m.codomain()
            )));
        }
    }
    Ok(())
}

/// Limit of the map at a boundary point along the radius (disk) or the
/// vertical ray (half-plane and slit plane), by Richardson extrapolation
/// over [`RADIAL_STEPS`].
pub fn radial_limit(m: &SelfMap, boundary: C) -> Result<C, MapError> {
    let probe = |h: f64| match m.domain {
        DomainTag::Disk => boundary * (1.0 - h),
        _ => boundary + C::new(0.0, h),
    };
    let mut vals = Vec::with_capacity(RADIAL_STEPS.len());
    for &h in &RADIAL_STEPS {
        vals.push(m.eval(probe(h))?);
    }
    // the full extrapolant against the one from the two smallest steps
    let full = extrapolate_to_zero(&RADIAL_STEPS, &vals);
    let n = vals.len();
    let tail = extrapolate_to_zero(&RADIAL_STEPS[n - 2..], &vals[n - 2..]);
    let defect = (full - tail).norm();
    if !(defect <= RADIAL_AGREEMENT * full.norm().max(1.0)) {
        return Err(MapError::NoLimit {
            point: SpherePoint::Finite(boundary),
            defect,
        });
    }
    Ok(full)
}

/// Which of the four parametrized families a [`MapFamily`] builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `phi_z(lambda) = z phi(lambda)`.
    DiskMultiplicative,
    /// `phi_{z1,z2}(lambda) = z1 phi1(z2 phi2(lambda))`.
    CircleTwoVar,
    /// `phi_{z1,z2}(lambda) = z1 + psi1(z2 + psi2(lambda))`.
    HalfplaneAdditive,
    /// `phi_z(lambda) = z f1(z f2(lambda))`.
    PositiveLine,
}

#[derive(Debug, Clone)]
pub struct MapFamily {
    pub kind: FamilyKind,
    first: SelfMap,
    second: Option<SelfMap>,
}

fn require_domain(m: &SelfMap, d: DomainTag) -> Result<(), MapError> {
    if m.domain == d {
        Ok(())
    } else {
        Err(MapError::Invalid(format!(
            "expected a {d:?} map, got a {:?} map",
            m.domain
        )))
    }
}

impl MapFamily {
    pub fn disk_multiplicative(phi: SelfMap) -> Result<Self, MapError> {
        require_domain(&phi, DomainTag::Disk)?;
        Ok(MapFamily {
            kind: FamilyKind::DiskMultiplicative,
            first: phi,
            second: None,
        })
    }

    pub fn circle_two_var(phi1: SelfMap, phi2: SelfMap) -> Result<Self, MapError> {
        require_domain(&phi1, DomainTag::Disk)?;
        require_domain(&phi2, DomainTag::Disk)?;
        Ok(MapFamily {
            kind: FamilyKind::CircleTwoVar,
            first: phi1,
            second: Some(phi2),
        })
    }

    pub fn halfplane_additive(psi1: SelfMap, psi2: SelfMap) -> Result<Self, MapError> {
        require_domain(&psi1, DomainTag::HalfPlane)?;
        require_domain(&psi2, DomainTag::HalfPlane)?;
        Ok(MapFamily {
            kind: FamilyKind::HalfplaneAdditive,
            first: psi1,
            second: Some(psi2),
        })
    }

    /// `f1`, `f2` must be eta-ratio maps of measures on `[0, inf)`.
    pub fn positive_line(f1: SelfMap, f2: SelfMap) -> Result<Self, MapError> {
        for f in [&f1, &f2] {
            let ok = match f.body() {
                Body::EtaRatio(_) => true,
                Body::EtaRatioMeasure(mu) => mu.support() == Support::PositiveLine,
                _ => false,
            };
            if !ok {
                return Err(MapError::Invalid(
                    "positive-line families need eta-ratio maps".into(),
                ));
            }
        }
        Ok(MapFamily {
            kind: FamilyKind::PositiveLine,
            first: f1,
            second: Some(f2),
        })
    }

    pub fn first(&self) -> &SelfMap {
        &self.first
    }

    pub fn second(&self) -> Option<&SelfMap> {
        self.second.as_ref()
    }

    /// Domain whose closure holds the parameters.
    pub fn parameter_domain(&self) -> DomainTag {
        match self.kind {
            FamilyKind::DiskMultiplicative | FamilyKind::CircleTwoVar => DomainTag::Disk,
            FamilyKind::HalfplaneAdditive | FamilyKind::PositiveLine => DomainTag::HalfPlane,
        }
    }

    /// The member with parameters `(z1, z2)`; one-parameter kinds use `z1`.
    /// Positive-line members are returned unconjugated, as slit-plane maps.
    pub fn build(&self, z1: C, z2: C) -> Result<SelfMap, MapError> {
        match self.kind {
            FamilyKind::DiskMultiplicative => SelfMap::scaled(z1, self.first.clone()),
            FamilyKind::CircleTwoVar => {
                let phi2 = self.second.clone().expect("two maps");
                SelfMap::composite(vec![
                    SelfMap::scaled(z2, phi2)?,
                    SelfMap::scaled(z1, self.first.clone())?,
                ])
            }
            FamilyKind::HalfplaneAdditive => {
                let psi2 = self.second.clone().expect("two maps");
                SelfMap::composite(vec![
                    SelfMap::shifted(z2, psi2)?,
                    SelfMap::shifted(z1, self.first.clone())?,
                ])
            }
            FamilyKind::PositiveLine => {
                let f2 = self.second.clone().expect("two maps");
                SelfMap::composite(vec![
                    SelfMap::scaled(z1, f2)?,
                    SelfMap::scaled(z1, self.first.clone())?,
                ])
            }
        }
    }

    /// The member as a self-map of the upper half-plane: positive-line
    /// members are conjugated by the wedge map of angle `arg z`.
    pub fn build_halfplane(&self, z: C) -> Result<SelfMap, MapError> {
        match self.kind {
            FamilyKind::PositiveLine => {
                let theta = z.arg();
                if !(z.im > 0.0 || (z.im == 0.0 && z.re > 0.0)) {
                    return Err(MapError::Invalid(format!(
                        "parameter {z} is not in H or (0, inf)"
                    )));
                }
                SelfMap::wedge_conjugate(theta, self.build(z, z)?)
            }
            _ => self.build(z, z),
        }
    }
}

/// The two ends of a positive-line family: the constant map `phi_0 = 0`
/// and `phi_inf = gamma/f2`, or the constant infinity map when `gamma`
/// is infinite. `gamma` is the limit of `eta_1` along the negative axis.
pub fn family_boundary_limits(
    fam: &MapFamily,
) -> Result<(SelfMap, SelfMap, SpherePoint), MapError> {
    if fam.kind != FamilyKind::PositiveLine {
        return Err(MapError::Invalid(
            "boundary limits are defined for positive-line families".into(),
        ));
    }
    let phi0 = SelfMap::constant(DomainTag::SlitPlane, SpherePoint::Finite(ZERO))?;
    let gamma = eta_limit_at_minus_infinity(fam.first())?;
    let phi_inf = match gamma {
        SpherePoint::Infinity => SelfMap::constant(DomainTag::SlitPlane, SpherePoint::Infinity)?,
        SpherePoint::Finite(g) => SelfMap::quotient(g, fam.second().expect("two maps").clone()),
    };
    Ok((phi0, phi_inf, gamma))
}

/// `lim eta(x)` as `x -> -inf` for an eta-ratio map `f = eta/lambda`.
pub fn eta_limit_at_minus_infinity(f: &SelfMap) -> Result<SpherePoint, MapError> {
    match f.body() {
        Body::EtaRatio(d) => {
            if d.beta > 0.0 {
                Ok(SpherePoint::Infinity)
            } else {
                Ok(SpherePoint::Finite(C::new(-d.tail_integral(), 0.0)))
            }
        }
        Body::EtaRatioMeasure(mu) => {
            // psi(x) -> -mu((0, inf)), so eta -> -(1 - m0)/m0 with m0 = mu({0})
            let m0: f64 = mu
                .atoms()
                .iter()
                .filter(|a| a.position == AtomPosition::At(0.0))
                .map(|a| a.mass)
                .sum();
            if m0 <= PROBABILITY_TOL {
                Ok(SpherePoint::Infinity)
            } else {
                Ok(SpherePoint::Finite(C::new(-(1.0 - m0) / m0, 0.0)))
            }
        }
        _ => Err(MapError::Invalid("not an eta-ratio map".into())),
    }
}
