//! Denjoy-Wolff points of analytic self-maps of the disk and the upper
//! half-plane, subordination functions obtained as families of such points,
//! and the free additive and multiplicative convolutions they compute.

pub mod denjoy_wolff;
pub mod domains;
pub mod freeconv;
pub mod measures;
pub mod numerics;
pub mod output;
pub mod selfmaps;
pub mod subordination;

pub use num_complex::Complex64;
