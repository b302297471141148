//! Dense complex linear algebra and amplitude sampling.

mod amplitude;
mod eigen;
mod grid;
mod matrix;
mod svd;

pub use amplitude::{normalize, sample_amplitude, AmplitudeMatrix};
pub use eigen::{hermitian_eig, EigenSystem};
pub use grid::Grid;
pub use matrix::CMatrix;
pub use svd::{svd, Svd};

pub use num_complex::Complex64 as C64;

/// Discrete inner product `⟨a|b⟩ = Σ conj(a_j) b_j`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a complex vector.
pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
