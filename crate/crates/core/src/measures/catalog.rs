//! Standard measures sampled onto grids. Grids are clustered toward
//! square-root edges so the piecewise-linear density tracks the true one
//! closely; every builder returns an explicitly normalized measure.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Atom, Density, MeasureError, MeasureRep, Support};

/// Semicircle law of variance `var` on a Chebyshev-clustered grid of `n`
/// points.
pub fn semicircle(var: f64, n: usize) -> Result<MeasureRep, MeasureError> {
    if !(var > 0.0) || n < 3 {
        return Err(MeasureError::Invalid(
            "semicircle needs var > 0 and n >= 3".into(),
        ));
    }
    let r = 2.0 * var.sqrt();
    let grid: Vec<f64> = (0..n)
        .map(|k| -r * (PI * k as f64 / (n - 1) as f64).cos())
        .collect();
    let values = grid
        .iter()
        .map(|&x| ((r * r - x * x).max(0.0)).sqrt() / (2.0 * PI * var))
        .collect();
    MeasureRep::new(Support::RealLine, vec![], Some(Density { grid, values }))?.normalized()
}

/// Marchenko-Pastur law with ratio `ratio <= 1` (no atom at zero) on `n`
/// points clustered at both edges. At ratio 1 the density has an inverse
/// square-root singularity at 0; the first cell then carries its exact mass.
pub fn marchenko_pastur(ratio: f64, n: usize) -> Result<MeasureRep, MeasureError> {
    if !(ratio > 0.0 && ratio <= 1.0) || n < 3 {
        return Err(MeasureError::Invalid(
            "marchenko-pastur needs 0 < ratio <= 1, n >= 3".into(),
        ));
    }
    let a = (1.0 - ratio.sqrt()).powi(2);
    let b = (1.0 + ratio.sqrt()).powi(2);
    let rho = |x: f64| {
        if x <= a || x >= b {
            0.0
        } else {
            ((b - x) * (x - a)).sqrt() / (2.0 * PI * ratio * x)
        }
    };
    // x = a + (b - a) sin^2(phi) with phi quadratically clustered at 0, so the
    // cells near a possible 1/sqrt(x) edge carry little mass
    let phi_at = |k: usize| 0.5 * PI * (k as f64 / (n - 1) as f64).powi(2);
    let grid: Vec<f64> = (0..n)
        .map(|k| a + (b - a) * phi_at(k).sin().powi(2))
        .collect();
    let mut values: Vec<f64> = grid.iter().map(|&x| rho(x)).collect();
    if a == 0.0 {
        // mass of [0, 4 sin^2 phi] is (2/pi)(phi + sin phi cos phi) when ratio = 1
        let phi1 = phi_at(1);
        let m0 = 2.0 / PI * (phi1 + phi1.sin() * phi1.cos());
        values[0] = (2.0 * m0 / grid[1] - values[1]).max(0.0);
    }
    MeasureRep::new(
        Support::PositiveLine,
        vec![],
        Some(Density { grid, values }),
    )?
    .normalized()
}

/// Uniform (Haar) probability measure on the circle, `n` grid points.
pub fn haar(n: usize) -> Result<MeasureRep, MeasureError> {
    let n = n.max(2);
    let grid: Vec<f64> = (0..n)
        .map(|k| -PI + 2.0 * PI * k as f64 / (n - 1) as f64)
        .collect();
    let values = vec![1.0 / (2.0 * PI); n];
    MeasureRep::new(Support::Circle, vec![], Some(Density { grid, values }))?.normalized()
}

/// Wrapped Cauchy (Poisson) law on the circle with moments `alpha^k`, so that
/// its eta-transform is `alpha z`.
pub fn wrapped_cauchy(alpha: Complex64, n: usize) -> Result<MeasureRep, MeasureError> {
    if !(alpha.norm() < 1.0) || n < 3 {
        return Err(MeasureError::Invalid(
            "wrapped cauchy needs |alpha| < 1".into(),
        ));
    }
    let grid: Vec<f64> = (0..n)
        .map(|k| -PI + 2.0 * PI * k as f64 / (n - 1) as f64)
        .collect();
    let values = grid
        .iter()
        .map(|&t| {
            let e = Complex64::from_polar(1.0, -t);
            (1.0 - alpha.norm_sqr()) / (2.0 * PI * (1.0 - alpha * e).norm_sqr())
        })
        .collect();
    MeasureRep::new(Support::Circle, vec![], Some(Density { grid, values }))?.normalized()
}

/// Two-point law `p delta_a + (1 - p) delta_b`.
pub fn two_point(support: Support, a: f64, b: f64, p: f64) -> Result<MeasureRep, MeasureError> {
    MeasureRep::new(support, vec![Atom::at(a, p), Atom::at(b, 1.0 - p)], None)
}

/// The symmetric Bernoulli law `(delta_{-1} + delta_1)/2`.
pub fn bernoulli() -> MeasureRep {
    two_point(Support::RealLine, -1.0, 1.0, 0.5).expect("valid atoms")
}
