use crate::{Error, Result};

/// Uniform `n × n` mesh over `[p_min, p_max] × [q_min, q_max]`.
///
/// Node `j` sits at `p_min + j·Δp` with `Δp = (p_max − p_min)/(n − 1)`, so
/// both window edges are mesh nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    p_min: f64,
    p_max: f64,
    q_min: f64,
    q_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(p_min: f64, p_max: f64, q_min: f64, q_max: f64, n: usize) -> Result<Self> {
        if ![p_min, p_max, q_min, q_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("window bounds must be finite".into()));
        }
        if p_min >= p_max {
            return Err(Error::InvalidGrid(format!(
                "p window is inverted or empty: [{p_min}, {p_max}]"
            )));
        }
        if q_min >= q_max {
            return Err(Error::InvalidGrid(format!(
                "q window is inverted or empty: [{q_min}, {q_max}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points per axis, got {n}")));
        }
        Ok(Grid { p_min, p_max, q_min, q_max, n })
    }

    /// Same window on both axes.
    pub fn square(min: f64, max: f64, n: usize) -> Result<Self> {
        Self::new(min, max, min, max, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p_range(&self) -> (f64, f64) {
        (self.p_min, self.p_max)
    }

    pub fn q_range(&self) -> (f64, f64) {
        (self.q_min, self.q_max)
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n - 1) as f64
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n - 1) as f64
    }

    pub fn p(&self, j: usize) -> f64 {
        // pin the last node to the window edge exactly
        if j + 1 == self.n {
            self.p_max
        } else {
            self.p_min + j as f64 * self.dp()
        }
    }

    pub fn q(&self, j: usize) -> f64 {
        if j + 1 == self.n {
            self.q_max
        } else {
            self.q_min + j as f64 * self.dq()
        }
    }

    pub fn p_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.p(j)).collect()
    }

    pub fn q_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.q(j)).collect()
    }

    /// Whether the p and q windows coincide, which makes `ψ(q, p)` a sample of
    /// the same mesh.
    pub fn is_symmetric(&self) -> bool {
        let scale = self.p_max.abs().max(self.p_min.abs()).max(1.0);
        (self.p_min - self.q_min).abs() <= 1e-12 * scale
            && (self.p_max - self.q_max).abs() <= 1e-12 * scale
    }

    /// Grid with the p and q windows exchanged.
    pub fn transposed(&self) -> Grid {
        Grid { p_min: self.q_min, p_max: self.q_max, q_min: self.p_min, q_max: self.p_max, n: self.n }
    }
}
