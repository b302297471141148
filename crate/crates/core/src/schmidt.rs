//! Schmidt decomposition of a sampled two-variable amplitude.
//!
//! For a normalized matrix `Ψ` the decomposition is the SVD `Ψ = U·S·V`:
//! columns of `U` are the p-modes, rows of `V` the q-modes and the squared
//! singular values are the weights `λ_k`. Two routes are provided: a direct
//! SVD (default) and the Gram route, which diagonalizes `M = Ψ·Ψ⁺` and then
//! recovers the q-modes as `V = D^{-1/2}·U⁺·Ψ`. The Gram route squares the
//! condition number, so it serves as a cross-check.

use num_complex::Complex64 as C64;

use crate::tensor::{hermitian_eig, inner, norm, svd, AmplitudeMatrix, CMatrix, Grid};
use crate::{Error, Result};

/// Tolerance on `Σ λ_k = 1` accepted by the spectrum measures.
const WEIGHT_SUM_TOLERANCE: f64 = 1e-10;

/// Phase convention for mode pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// Largest-modulus component of every p-mode made real and positive; the
    /// paired q-mode takes the inverse phase.
    #[default]
    LargestReal,
    /// Phases as produced by the decomposition.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    #[default]
    Direct,
    /// Eigen-decomposition of `Ψ·Ψ⁺` followed by `V = D^{-1/2}·U⁺·Ψ`.
    Gram,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionOptions {
    /// Drop weights with `λ_k / λ_1` below this value.
    pub truncation_relative_threshold: f64,
    /// Added to `λ_k` before inverting in the Gram route.
    pub regularization_epsilon: f64,
    pub gauge: Gauge,
    pub route: Route,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        DecompositionOptions {
            truncation_relative_threshold: 1e-14,
            regularization_epsilon: 1e-12,
            gauge: Gauge::LargestReal,
            route: Route::Direct,
        }
    }
}

impl DecompositionOptions {
    pub fn validate(&self) -> Result<()> {
        let t = self.truncation_relative_threshold;
        if !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "truncation threshold must lie in [0, 1), got {t}"
            )));
        }
        let e = self.regularization_epsilon;
        if !(1e-16..=1e-10).contains(&e) {
            return Err(Error::InvalidParameter(format!(
                "regularization epsilon must lie in [1e-16, 1e-10], got {e}"
            )));
        }
        Ok(())
    }
}

/// K, S and rank of a weight spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSummary {
    pub rank: usize,
    pub schmidt_number: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone)]
pub struct SchmidtResult {
    /// Retained weights, non-increasing, renormalized to sum to one.
    pub lambdas: Vec<f64>,
    /// All singular values of the normalized input, including discarded ones.
    pub singular_values: Vec<f64>,
    /// p-modes (columns of `U`), one per retained weight.
    pub modes_p: Vec<Vec<C64>>,
    /// q-modes (rows of `V`), paired with `modes_p`.
    pub modes_q: Vec<Vec<C64>>,
    pub rank: usize,
    pub schmidt_number: f64,
    /// Entanglement entropy in bits.
    pub entropy: f64,
    /// `‖Ψ − Σ √λ_k u_k v_k‖_F / ‖Ψ‖_F` over the retained terms, using the
    /// singular values before renormalization.
    pub reconstruction_error: f64,
    /// Weight mass removed by truncation.
    pub discarded_weight: f64,
    /// K, S and rank over every non-zero singular value.
    pub untruncated: SpectrumSummary,
}

impl SchmidtResult {
    /// Keeps only the leading `r` mode pairs.
    pub fn truncated(&self, r: usize) -> Result<SchmidtResult> {
        if r == 0 {
            return Err(Error::InvalidParameter("cannot truncate to rank 0".into()));
        }
        let r = r.min(self.rank);
        let dropped: f64 = self.singular_values[r..self.rank].iter().map(|s| s * s).sum();
        let kept: f64 = self.singular_values[..r].iter().map(|s| s * s).sum();
        let lambdas: Vec<f64> = self.singular_values[..r].iter().map(|s| s * s / kept).collect();
        Ok(SchmidtResult {
            schmidt_number: schmidt_number(&lambdas)?,
            entropy: entanglement_entropy(&lambdas)?,
            lambdas,
            singular_values: self.singular_values.clone(),
            modes_p: self.modes_p[..r].to_vec(),
            modes_q: self.modes_q[..r].to_vec(),
            rank: r,
            reconstruction_error: (self.reconstruction_error.powi(2) + dropped).sqrt(),
            discarded_weight: self.discarded_weight + dropped,
            untruncated: self.untruncated,
        })
    }

    /// `Σ_{k<r} σ_k²` over the untruncated spectrum.
    pub fn captured_weight(&self, r: usize) -> f64 {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        let part: f64 = self.singular_values.iter().take(r).map(|s| s * s).sum();
        part / total
    }
}

/// Splits a normalized amplitude into weights and paired modes.
pub fn schmidt_decompose(a: &AmplitudeMatrix, opts: &DecompositionOptions) -> Result<SchmidtResult> {
    opts.validate()?;
    if a.n() == 0 {
        return Err(Error::InvalidParameter("empty amplitude matrix".into()));
    }
    let norm_a = a.frobenius_norm();
    if !a.is_normalized() || (norm_a - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::NotNormalized { norm: norm_a });
    }
    let psi = a.entries();

    let (u, singular_values, v) = match opts.route {
        Route::Direct => {
            let d = svd(psi)?;
            (d.u, d.singular_values, d.v)
        }
        Route::Gram => gram_route(psi, opts.regularization_epsilon)?,
    };

    let lambda_max = singular_values[0] * singular_values[0];
    let rank = singular_values
        .iter()
        .take_while(|&&s| {
            let l = s * s;
            l > 0.0 && l >= opts.truncation_relative_threshold * lambda_max
        })
        .count();
    if rank == 0 {
        return Err(Error::ZeroMatrix);
    }

    let mut modes_p: Vec<Vec<C64>> = (0..rank).map(|k| u.col(k)).collect();
    let mut modes_q: Vec<Vec<C64>> = (0..rank).map(|k| v.row(k).to_vec()).collect();
    if opts.gauge == Gauge::LargestReal {
        for (up, vq) in modes_p.iter_mut().zip(modes_q.iter_mut()) {
            fix_gauge(up, vq);
        }
    }

    let reconstruction_error = residual(psi, &singular_values[..rank], &modes_p, &modes_q) / norm_a;

    let kept: f64 = singular_values[..rank].iter().map(|s| s * s).sum();
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    let lambdas: Vec<f64> = singular_values[..rank].iter().map(|s| s * s / kept).collect();

    let all: Vec<f64> =
        singular_values.iter().map(|s| s * s / total).filter(|&l| l > 0.0).collect();
    let untruncated = SpectrumSummary {
        rank: all.len(),
        schmidt_number: schmidt_number(&all)?,
        entropy: entanglement_entropy(&all)?,
    };

    Ok(SchmidtResult {
        schmidt_number: schmidt_number(&lambdas)?,
        entropy: entanglement_entropy(&lambdas)?,
        lambdas,
        singular_values,
        modes_p,
        modes_q,
        rank,
        reconstruction_error,
        discarded_weight: (total - kept).max(0.0) / total,
        untruncated,
    })
}

/// `(U, σ, V)` from the eigen-decomposition of `Ψ·Ψ⁺`.
fn gram_route(psi: &CMatrix, epsilon: f64) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let m = psi.matmul(&psi.adjoint())?;
    let eig = hermitian_eig(&m)?;
    let n = psi.rows();
    let lambdas: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let uh_psi = eig.eigenvectors.adjoint().matmul(psi)?;
    let v = CMatrix::from_fn(n, psi.cols(), |k, j| uh_psi[(k, j)] / (lambdas[k] + epsilon).sqrt());
    let sigmas = lambdas.iter().map(|l| l.sqrt()).collect();
    Ok((eig.eigenvectors, sigmas, v))
}

fn fix_gauge(up: &mut [C64], vq: &mut [C64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (j, z) in up.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best = j;
        }
    }
    if best_mag <= 0.0 {
        return;
    }
    let phase = up[best] / best_mag;
    let inv = phase.conj();
    up.iter_mut().for_each(|z| *z *= inv);
    up[best] = C64::new(best_mag, 0.0);
    vq.iter_mut().for_each(|z| *z *= phase);
}

fn residual(psi: &CMatrix, sigmas: &[f64], modes_p: &[Vec<C64>], modes_q: &[Vec<C64>]) -> f64 {
    let n = psi.rows();
    let mut total = 0.0;
    let mut row = vec![C64::new(0.0, 0.0); psi.cols()];
    for i in 0..n {
        row.copy_from_slice(psi.row(i));
        for ((s, up), vq) in sigmas.iter().zip(modes_p).zip(modes_q) {
            let a = up[i] * s;
            for (r, b) in row.iter_mut().zip(vq) {
                *r -= a * b;
            }
        }
        total += row.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    total.sqrt()
}

fn check_weights(lambdas: &[f64]) -> Result<f64> {
    if let Some(bad) = lambdas.iter().find(|l| !l.is_finite() || **l < 0.0) {
        return Err(Error::InvalidParameter(format!("weights must be finite and non-negative, got {bad}")));
    }
    let sum: f64 = lambdas.iter().sum();
    if sum == 0.0 {
        return Err(Error::InvalidParameter("all weights are zero".into()));
    }
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::InvalidParameter(format!("weights must sum to 1, got {sum}")));
    }
    Ok(sum)
}

/// Effective number of modes `K = 1 / Σ λ_k²`.
pub fn schmidt_number(lambdas: &[f64]) -> Result<f64> {
    check_weights(lambdas)?;
    Ok(1.0 / lambdas.iter().map(|l| l * l).sum::<f64>())
}

/// Entanglement entropy `S = −Σ λ_k log₂ λ_k` in bits, with `0·log 0 = 0`.
pub fn entanglement_entropy(lambdas: &[f64]) -> Result<f64> {
    check_weights(lambdas)?;
    let s: f64 = lambdas.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum();
    Ok(s.max(0.0))
}

/// Reassembles `Σ √λ_k u_k ⊗ v_k` from the retained terms, using the singular
/// values of the input (so truncation error is visible in the result).
pub fn reconstruct(result: &SchmidtResult, grid: &Grid) -> Result<AmplitudeMatrix> {
    let n = grid.n();
    let bad = result
        .modes_p
        .iter()
        .chain(&result.modes_q)
        .find(|m| m.len() != n);
    if let Some(m) = bad {
        return Err(Error::DimensionMismatch {
            expected: format!("modes of length {n}"),
            found: format!("length {}", m.len()),
        });
    }
    let mut out = CMatrix::zeros(n, n);
    for k in 0..result.rank {
        let s = result.singular_values[k];
        for i in 0..n {
            let a = result.modes_p[k][i] * s;
            for (j, b) in result.modes_q[k].iter().enumerate() {
                out[(i, j)] += a * b;
            }
        }
    }
    let normalized = (out.frobenius_norm() - 1.0).abs() <= 1e-12;
    let a = AmplitudeMatrix::from_matrix(*grid, out)?;
    Ok(AmplitudeMatrix::with_flag(*grid, a.into_entries(), normalized))
}

/// Discrete overlap `⟨a|b⟩` of two modes, each scaled to unit norm first.
pub fn mode_overlap(a: &[C64], b: &[C64]) -> Result<C64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("length {}", a.len()),
            found: format!("length {}", b.len()),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidParameter("overlap with a zero vector".into()));
    }
    Ok(inner(a, b) / (na * nb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::normalize;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn amp(m: CMatrix) -> AmplitudeMatrix {
        let n = m.rows();
        let g = Grid::square(0.0, 1.0, n).unwrap();
        normalize(&AmplitudeMatrix::from_matrix(g, m).unwrap()).unwrap()
    }

    fn two_mode() -> AmplitudeMatrix {
        let s = 1.0 / 2f64.sqrt();
        let u1 = [c(s, 0.0), c(s, 0.0), c(0.0, 0.0)];
        let u2 = [c(0.0, s), c(0.0, -s), c(0.0, 0.0)];
        let v1 = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let v2 = [c(0.0, 0.0), c(0.0, 0.6), c(0.8, 0.0)];
        amp(CMatrix::from_fn(3, 3, |i, j| (u1[i] * v1[j] + u2[i] * v2[j]) * s))
    }

    #[test]
    fn product_state() {
        let u = [c(0.6, 0.0), c(0.0, 0.8)];
        let v = [c(0.0, 1.0), c(0.0, 0.0)];
        let r = schmidt_decompose(&amp(CMatrix::from_fn(2, 2, |i, j| u[i] * v[j])), &Default::default())
            .unwrap();
        assert_eq!(r.rank, 1);
        assert!((r.lambdas[0] - 1.0).abs() < 1e-15);
        assert!((r.schmidt_number - 1.0).abs() < 1e-15);
        assert_eq!(r.entropy, 0.0);
    }

    #[test]
    fn maximally_entangled_pair() {
        let r = schmidt_decompose(&two_mode(), &Default::default()).unwrap();
        assert_eq!(r.rank, 2);
        assert!((r.lambdas[0] - 0.5).abs() < 1e-14 && (r.lambdas[1] - 0.5).abs() < 1e-14);
        assert!((r.schmidt_number - 2.0).abs() < 1e-13);
        assert!((r.entropy - 1.0).abs() < 1e-13);
        assert!(r.reconstruction_error < 1e-14);
    }

    #[test]
    fn rank_one_truncation_error() {
        let r = schmidt_decompose(&two_mode(), &Default::default()).unwrap();
        let t = r.truncated(1).unwrap();
        let rec = reconstruct(&t, &Grid::square(0.0, 1.0, 3).unwrap()).unwrap();
        let err = rec.entries().sub(two_mode().entries()).unwrap().frobenius_norm();
        assert!((err - 0.5f64.sqrt()).abs() < 1e-14, "{err}");
        assert!((t.reconstruction_error - 0.5f64.sqrt()).abs() < 1e-14);
        assert_eq!(t.lambdas, vec![1.0]);
        assert!((r.captured_weight(1) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gauge_makes_peak_real() {
        let r = schmidt_decompose(&two_mode(), &Default::default()).unwrap();
        for up in &r.modes_p {
            let max = up.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let peak = up.iter().find(|z| z.norm() == max).unwrap();
            assert!(peak.im == 0.0 && peak.re > 0.0);
        }
    }

    #[test]
    fn gram_route_agrees() {
        let a = two_mode();
        let direct = schmidt_decompose(&a, &Default::default()).unwrap();
        let opts = DecompositionOptions { route: Route::Gram, ..Default::default() };
        let gram = schmidt_decompose(&a, &opts).unwrap();
        assert_eq!(direct.rank, gram.rank);
        for (x, y) in direct.lambdas.iter().zip(&gram.lambdas) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(gram.reconstruction_error < 1e-10);
    }

    #[test]
    fn rejects_unnormalized_input() {
        let g = Grid::square(0.0, 1.0, 2).unwrap();
        let a = AmplitudeMatrix::from_matrix(g, CMatrix::identity(2)).unwrap();
        assert!(matches!(
            schmidt_decompose(&a, &Default::default()),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn rejects_bad_options() {
        let mut o = DecompositionOptions { truncation_relative_threshold: 1.0, ..Default::default() };
        assert!(o.validate().is_err());
        o.truncation_relative_threshold = 0.0;
        o.regularization_epsilon = 1e-9;
        assert!(o.validate().is_err());
    }

    #[test]
    fn spectrum_measures() {
        assert_eq!(schmidt_number(&[1.0]).unwrap(), 1.0);
        assert_eq!(schmidt_number(&[0.5, 0.5]).unwrap(), 2.0);
        assert!((schmidt_number(&[0.7, 0.3]).unwrap() - 1.0 / 0.58).abs() < 1e-14);
        assert!((1.0f64 / 0.58 - 1.72414).abs() < 1e-5);
        assert_eq!(entanglement_entropy(&[1.0]).unwrap(), 0.0);
        assert_eq!(entanglement_entropy(&[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(entanglement_entropy(&[0.25; 4]).unwrap(), 2.0);
        assert_eq!(entanglement_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!(schmidt_number(&[0.0, 0.0]).is_err());
        assert!(entanglement_entropy(&[1.2, -0.2]).is_err());
    }

    #[test]
    fn overlaps() {
        let a = vec![c(0.6, 0.0), c(0.0, 0.8)];
        assert!((mode_overlap(&a, &a).unwrap() - 1.0).norm() < 1e-15);
        let b = vec![c(0.0, 0.8), c(0.6, 0.0)];
        let ab = mode_overlap(&vec![c(1.0, 0.0), c(0.0, 0.0)], &vec![c(0.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(ab.norm(), 0.0);
        for k in 0..12 {
            let phase = C64::from_polar(1.0, 0.55 * k as f64);
            let rot: Vec<C64> = a.iter().map(|z| z * phase).collect();
            assert!((mode_overlap(&a, &rot).unwrap().norm() - 1.0).abs() < 1e-15);
        }
        assert!(mode_overlap(&a, &b[..1]).is_err());
        assert!(mode_overlap(&a, &[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }
}
