//! Small numerical kernels shared by the other modules.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

/// Gauss-Legendre order used for every density cell.
pub const GL_ORDER: usize = 16;

/// Nodes and weights of the Gauss-Legendre rule of order `n` on `[-1, 1]`,
/// by Newton iteration on the Legendre three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// The order-16 rule, computed once.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Value at `h = 0` of the interpolating polynomial through `(hs[k], vs[k])`
/// (Neville's scheme).
pub fn extrapolate_to_zero<T>(hs: &[f64], vs: &[T]) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    assert_eq!(hs.len(), vs.len());
    assert!(!hs.is_empty());
    let n = hs.len();
    let mut p: Vec<T> = vs.to_vec();
    for level in 1..n {
        for i in 0..n - level {
            let hi = hs[i];
            let hj = hs[i + level];
            // P(0) = (0 - hj) P_i / (hi - hj) + (hi - 0) P_{i+1} / (hi - hj)
            p[i] = p[i] * (-hj / (hi - hj)) + p[i + 1] * (hi / (hi - hj));
        }
    }
    p[0]
}

/// Outcome of a sliding-window Richardson extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolated<T> {
    pub value: T,
    /// Largest distance between the final extrapolant and the ones from
    /// earlier windows.
    pub defect: f64,
}

/// Extrapolates each consecutive window of `window` samples and reports the
/// finest window's value together with the spread of all windows.
pub fn richardson_windows(hs: &[f64], vs: &[Complex64], window: usize) -> Extrapolated<Complex64> {
    let n = hs.len();
    let w = window.clamp(1, n);
    let estimates: Vec<Complex64> = (0..=n - w)
        .map(|s| extrapolate_to_zero(&hs[s..s + w], &vs[s..s + w]))
        .collect();
    let value = *estimates.last().unwrap();
    let defect = estimates
        .iter()
        .map(|e| (*e - value).norm())
        .fold(0.0, f64::max);
    Extrapolated { value, defect }
}

/// Real-valued convenience wrapper around [`richardson_windows`].
pub fn richardson_windows_real(hs: &[f64], vs: &[f64], window: usize) -> Extrapolated<f64> {
    let cv: Vec<Complex64> = vs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let e = richardson_windows(hs, &cv, window);
    Extrapolated {
        value: e.value.re,
        defect: e.defect,
    }
}

/// Inclusive arithmetic grid `start, start + step, ...` up to `stop`
/// (tolerant of rounding at the far end).
pub fn linspace_step(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0);
    let n = ((stop - start) / step + 1e-9).floor();
    if n < 0.0 {
        return Vec::new();
    }
    (0..=n as usize).map(|k| start + k as f64 * step).collect()
}
