use num_complex::Complex64 as C64;

use super::{CMatrix, Grid};
use crate::{Error, Result};

/// Samples `ψ(p_j, q_k)` of an amplitude on a [`Grid`].
///
/// Rows follow the p axis and columns the q axis. The `normalized` flag is set
/// only by [`normalize`] (or by constructors that verified unit norm).
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeMatrix {
    grid: Grid,
    entries: CMatrix,
    normalized: bool,
}

impl AmplitudeMatrix {
    /// Wraps an existing matrix. Fails on shape mismatch or non-finite entries.
    pub fn from_matrix(grid: Grid, entries: CMatrix) -> Result<Self> {
        if entries.rows() != grid.n() || entries.cols() != grid.n() {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", grid.n()),
                found: format!("{}x{}", entries.rows(), entries.cols()),
            });
        }
        if let Some((row, col)) = entries.find_non_finite() {
            return Err(Error::NonFiniteEntry { row, col });
        }
        Ok(AmplitudeMatrix { grid, entries, normalized: false })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.frobenius_norm()
    }

    /// `ψ(q, p)` on the transposed grid. Keeps the normalization flag.
    pub fn transpose(&self) -> AmplitudeMatrix {
        AmplitudeMatrix {
            grid: self.grid.transposed(),
            entries: self.entries.transpose(),
            normalized: self.normalized,
        }
    }

    pub(crate) fn with_flag(grid: Grid, entries: CMatrix, normalized: bool) -> Self {
        AmplitudeMatrix { grid, entries, normalized }
    }
}

/// Evaluates `f` at every mesh node; `entries[j1][j2] = f(p_{j1}, q_{j2})`.
pub fn sample_amplitude<F>(f: F, grid: &Grid) -> Result<AmplitudeMatrix>
where
    F: Fn(f64, f64) -> C64,
{
    let n = grid.n();
    let ps = grid.p_nodes();
    let qs = grid.q_nodes();
    let mut data = Vec::with_capacity(n * n);
    for (row, &p) in ps.iter().enumerate() {
        for (col, &q) in qs.iter().enumerate() {
            let z = f(p, q);
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFiniteAmplitude { row, col, p, q });
            }
            data.push(z);
        }
    }
    let entries = CMatrix::from_vec(n, n, data)?;
    Ok(AmplitudeMatrix { grid: *grid, entries, normalized: false })
}

/// Scales the matrix to unit Frobenius norm.
pub fn normalize(a: &AmplitudeMatrix) -> Result<AmplitudeMatrix> {
    let norm = a.entries.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    if !norm.is_finite() {
        return Err(Error::InvalidParameter(format!("matrix norm is not finite ({norm})")));
    }
    let entries = if a.normalized && (norm - 1.0).abs() <= 1e-15 {
        a.entries.clone()
    } else {
        a.entries.scale(C64::new(1.0 / norm, 0.0))
    };
    Ok(AmplitudeMatrix { grid: a.grid, entries, normalized: true })
}
