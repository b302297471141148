//! Schmidt-mode extraction for amplitudes of two continuous variables.
//!
//! An amplitude `ψ(p, q)` is sampled on a uniform `n × n` mesh, normalized in
//! the discrete Frobenius sense and split into paired modes by a singular
//! value decomposition:
//!
//! ```text
//! ψ(p_j, q_k) = Σ_m √λ_m · u_m(p_j) · v_m(q_k)
//! ```
//!
//! The crate is organized bottom-up:
//!
//! * [`tensor`] holds the dense complex matrix type, grids, amplitude sampling
//!   and the two decompositions everything else rests on (cyclic Jacobi for
//!   Hermitian matrices, Golub–Kahan SVD for general ones).
//! * [`schmidt`] turns an SVD into weights, gauge-fixed mode pairs, the
//!   Schmidt number and the entanglement entropy.
//! * [`atom_photon`] and [`spdc`] are the physical models.
//! * [`polarization`] builds the biphoton polarization density matrix from the
//!   coherence of an SPDC amplitude.

pub mod atom_photon;
pub mod error;
pub mod polarization;
pub mod schmidt;
pub mod spdc;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;
