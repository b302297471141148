//! Two-photon polarization state after tracing out frequencies.
//!
//! For a biphoton whose ordinary and extraordinary photons are split and
//! symmetrized, the 4×4 polarization density matrix in the basis
//! `|HH⟩, |HV⟩, |VH⟩, |VV⟩` is fixed by a single number, the coherence
//! `F = Σ ψ(p,q)·ψ*(q,p)`: the overlap between the amplitude and its mirror
//! image, with elementwise (not Hermitian) conjugation.

use num_complex::Complex64 as C64;

use crate::schmidt::SchmidtResult;
use crate::tensor::{hermitian_eig, AmplitudeMatrix, CMatrix};
use crate::{Error, Result};

/// Basis labels in matrix order.
pub const BASIS: [&str; 4] = ["HH", "HV", "VH", "VV"];

/// Slack on `|F| ≤ 1` from rounding in the sum.
const COHERENCE_SLACK: f64 = 1e-12;
/// Imaginary parts of F above this are flagged in reports.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// `Σ_{j,k} A[j][k]·conj(A[k][j])`.
///
/// The amplitude must be normalized and sampled on identical p and q windows,
/// so that the transpose is the same function with its arguments exchanged.
pub fn coherence(a: &AmplitudeMatrix) -> Result<C64> {
    if !a.is_normalized() {
        return Err(Error::NotNormalized { norm: a.frobenius_norm() });
    }
    if !a.grid().is_symmetric() {
        let g = a.grid();
        return Err(Error::InvalidGrid(format!(
            "coherence needs identical p and q windows, got p in [{}, {}] and q in [{}, {}]",
            g.p_range().0,
            g.p_range().1,
            g.q_range().0,
            g.q_range().1
        )));
    }
    let m = a.entries();
    let n = m.rows();
    let mut f = C64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            f += m[(j, k)] * m[(k, j)].conj();
        }
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationDensityMatrix {
    rho: CMatrix,
}

impl PolarizationDensityMatrix {
    /// `½·[[0,0,0,0],[0,1,F,0],[0,F*,1,0],[0,0,0,0]]`.
    pub fn new(f: C64) -> Result<Self> {
        if !(f.re.is_finite() && f.im.is_finite()) || f.norm() > 1.0 + COHERENCE_SLACK {
            return Err(Error::InvalidParameter(format!("coherence must satisfy |F| <= 1, got {f}")));
        }
        let mut rho = CMatrix::zeros(4, 4);
        rho[(1, 1)] = C64::new(0.5, 0.0);
        rho[(2, 2)] = C64::new(0.5, 0.0);
        rho[(1, 2)] = f * 0.5;
        rho[(2, 1)] = f.conj() * 0.5;
        Ok(PolarizationDensityMatrix { rho })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.rho[(i, j)]
    }
}

/// Shorthand for [`PolarizationDensityMatrix::new`].
pub fn polarization_density_matrix(f: C64) -> Result<PolarizationDensityMatrix> {
    PolarizationDensityMatrix::new(f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub state: [C64; 4],
}

/// The symmetric and antisymmetric Bell-like states `(|HV⟩ ± |VH⟩)/√2`
/// with weights `(1 ± F)/2`.
pub fn mixture_decomposition(f: f64) -> Result<[MixtureComponent; 2]> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter(format!("mixture decomposition needs F in [0, 1], got {f}")));
    }
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    Ok([
        MixtureComponent { weight: 0.5 * (1.0 + f), state: [z, h, h, z] },
        MixtureComponent { weight: 0.5 * (1.0 - f), state: [z, h, -h, z] },
    ])
}

/// `Σ w_i |v_i⟩⟨v_i|`.
pub fn reassemble(components: &[MixtureComponent]) -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| {
        components.iter().map(|c| c.state[i] * c.state[j].conj() * c.weight).sum()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixDiagnostics {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    /// Eigenvalues in non-increasing order.
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub purity: f64,
}

impl DensityMatrixDiagnostics {
    /// Unit trace, Hermitian and positive semidefinite, all within 1e-12.
    pub fn is_valid(&self) -> bool {
        self.trace_deviation <= 1e-12 && self.hermiticity_deviation <= 1e-12 && self.min_eigenvalue >= -1e-12
    }
}

/// Trace, Hermiticity, spectrum and purity `Tr(ρ²)` of a 4×4 matrix.
pub fn density_matrix_checks(rho: &CMatrix) -> Result<DensityMatrixDiagnostics> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4".into(),
            found: format!("{}x{}", rho.rows(), rho.cols()),
        });
    }
    let trace_deviation = (rho.trace() - C64::new(1.0, 0.0)).norm();
    let hermiticity_deviation = rho.hermiticity_deviation();
    let purity = rho.matmul(rho)?.trace().re;
    // the spectrum of the Hermitian part; a non-Hermitian input is already
    // reported through the deviation above
    let herm = CMatrix::from_fn(4, 4, |i, j| (rho[(i, j)] + rho[(j, i)].conj()) * 0.5);
    let eigenvalues = hermitian_eig(&herm)?.eigenvalues;
    let min_eigenvalue = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DensityMatrixDiagnostics { trace_deviation, hermiticity_deviation, eigenvalues, min_eigenvalue, purity })
}

/// Coherence, polarization state and frequency-entanglement summary of one
/// biphoton amplitude.
#[derive(Debug, Clone)]
pub struct CoherenceReport {
    pub f: C64,
    pub weight_plus: f64,
    pub weight_minus: f64,
    pub rho: PolarizationDensityMatrix,
    pub diagnostics: DensityMatrixDiagnostics,
    pub lambdas: Vec<f64>,
    pub schmidt_number: f64,
    pub entropy: f64,
    pub warnings: Vec<String>,
}

/// Builds the full report from a normalized amplitude and its decomposition.
pub fn coherence_report(a: &AmplitudeMatrix, schmidt: &SchmidtResult) -> Result<CoherenceReport> {
    let f = coherence(a)?;
    let rho = PolarizationDensityMatrix::new(f)?;
    let diagnostics = density_matrix_checks(rho.matrix())?;
    let mut warnings = Vec::new();
    if f.im.abs() > IMAGINARY_TOLERANCE {
        warnings.push(format!(
            "coherence has a non-negligible imaginary part ({:e}); mixture weights use Re F",
            f.im
        ));
    }
    if f.re < 0.0 {
        warnings.push(format!("coherence has a negative real part ({})", f.re));
    }
    Ok(CoherenceReport {
        f,
        weight_plus: 0.5 * (1.0 + f.re),
        weight_minus: 0.5 * (1.0 - f.re),
        rho,
        diagnostics,
        lambdas: schmidt.lambdas.clone(),
        schmidt_number: schmidt.schmidt_number,
        entropy: schmidt.entropy,
        warnings,
    })
}
