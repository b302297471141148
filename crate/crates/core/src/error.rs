use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("amplitude is not finite at node ({row}, {col}) (p = {p}, q = {q})")]
    NonFiniteAmplitude { row: usize, col: usize, p: f64, q: f64 },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("cannot normalize an all-zero matrix")]
    ZeroMatrix,

    #[error("matrix is not Hermitian (max deviation {deviation:e}, allowed {allowed:e})")]
    NotHermitian { deviation: f64, allowed: f64 },

    #[error("amplitude matrix is not normalized (Frobenius norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical convergence failure: {0}")]
    Convergence(String),

    #[error(
        "grid too coarse: sinc phase advances {phase_step:.3} rad per step (limit {limit:.3}); use n >= {required_n}"
    )]
    Resolution { phase_step: f64, limit: f64, required_n: usize },
}

impl Error {
    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence(_) | Error::Resolution { .. })
    }
}
