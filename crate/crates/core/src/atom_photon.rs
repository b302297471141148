//! Atom–photon entanglement after spontaneous emission.
//!
//! Everything is expressed through three dimensionless numbers: the atomic
//! constant `ξ₀ = (Mc²/ħω)(γ/ω)`, the momentum-spread parameter
//! `η = v_rec/(γ a₀)` and the time `τ = γt`. Two amplitude models are
//! provided, one in coordinates (photon position `p`, atom position `q`) and
//! one in momenta (photon detuning `ν`, atom momentum `π`).

use num_complex::Complex64 as C64;

use crate::schmidt::{schmidt_decompose, DecompositionOptions, SchmidtResult};
use crate::tensor::{inner, normalize, sample_amplitude, AmplitudeMatrix, Grid};
use crate::{Error, Result};

/// Half-width of the default photon-detuning window.
pub const MOMENTUM_NU_HALF_WIDTH: f64 = 60.0;
/// Half-width of the default atom-momentum window.
pub const MOMENTUM_PI_HALF_WIDTH: f64 = 6.0;
/// Length of the coordinate window behind the light front (`e^{-20}` decay).
pub const COORD_P_SPAN: f64 = 40.0;
/// Gaussian widths kept on each side of the q window.
pub const COORD_Q_MARGIN_WIDTHS: f64 = 6.0;
/// Maximum spectrum drift tolerated when the window is enlarged.
pub const DRIFT_TOLERANCE: f64 = 1e-6;
/// Below this τ the coordinate amplitude is outside its validity range.
pub const COORD_MIN_TAU: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomPhotonParams {
    xi0: f64,
    eta: f64,
    tau: f64,
}

impl AtomPhotonParams {
    pub fn new(xi0: f64, eta: f64, tau: f64) -> Result<Self> {
        for (name, v) in [("xi0", xi0), ("eta", eta), ("tau", tau)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(AtomPhotonParams { xi0, eta, tau })
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.xi0, self.eta, tau)
    }

    /// Warnings about using the coordinate model at these parameters.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.tau < COORD_MIN_TAU {
            w.push(format!(
                "tau = {} is below {COORD_MIN_TAU}; the coordinate amplitude assumes tau >> 1",
                self.tau
            ));
        }
        w
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

/// Coordinate amplitude
/// `θ(τ−p)·exp(−(τ−p)/2)·exp(−η²(p+q)² / (2(1 + iτη²ξ₀)))`, unnormalized.
///
/// The step is closed at the light front: `θ(0) = 1`.
pub fn coord_amplitude(params: &AtomPhotonParams, p: f64, q: f64) -> Result<C64> {
    finite("p", p)?;
    finite("q", q)?;
    Ok(coord_value(params, p, q))
}

fn coord_value(params: &AtomPhotonParams, p: f64, q: f64) -> C64 {
    let AtomPhotonParams { xi0, eta, tau } = *params;
    if p > tau {
        return C64::new(0.0, 0.0);
    }
    let decay = (-(tau - p) / 2.0).exp();
    let s = p + q;
    let spread = C64::new(1.0, tau * eta * eta * xi0);
    let exponent = -C64::new(eta * eta * s * s, 0.0) / (spread * 2.0);
    exponent.exp() * decay
}

/// Momentum amplitude `exp(−π²/2) / (ν + 1/(2ξ₀) − ηπ + i/2)`, unnormalized.
pub fn momentum_amplitude(params: &AtomPhotonParams, nu: f64, pi: f64) -> Result<C64> {
    finite("nu", nu)?;
    finite("pi", pi)?;
    Ok(momentum_value(params, nu, pi))
}

fn momentum_value(params: &AtomPhotonParams, nu: f64, pi: f64) -> C64 {
    let denom = C64::new(nu + 1.0 / (2.0 * params.xi0) - params.eta * pi, 0.5);
    C64::new((-pi * pi / 2.0).exp(), 0.0) / denom
}

/// `ξ₀ ≈ α·M/m = (M/m)/137` from the atom-to-electron mass ratio.
pub fn xi0_estimate(mass_ratio: f64) -> Result<f64> {
    if !(mass_ratio.is_finite() && mass_ratio > 0.0) {
        return Err(Error::InvalidParameter(format!("mass ratio must be positive, got {mass_ratio}")));
    }
    Ok(mass_ratio / 137.0)
}

/// Initial packet width that minimizes the spread at time τ: `1/√(ξ₀τ)`.
pub fn eta_opt(xi0: f64, tau: f64) -> Result<f64> {
    if !(xi0 > 0.0 && tau > 0.0 && xi0.is_finite() && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("xi0 and tau must be positive, got {xi0}, {tau}")));
    }
    Ok(1.0 / (xi0 * tau).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    /// `1/√ξ₀`: the packet must not spread appreciably during emission.
    pub eta_upper: f64,
    /// `1/ξ₀`: the packet must stay small against the reduced wavelength.
    pub eta_lower: f64,
    /// `a₀/λ̃ = 1/(ξ₀η)`.
    pub packet_ratio: f64,
    pub strictness: f64,
    pub satisfied: bool,
    /// Satisfied, but within a factor 1.5 of one of the bounds.
    pub marginal: bool,
    pub messages: Vec<String>,
}

/// Checks `strictness/ξ₀ ≤ η ≤ 1/(strictness·√ξ₀)`. Never rejects; the
/// verdict and warnings are in the report.
pub fn validity_check(params: &AtomPhotonParams, strictness: f64) -> ValidityReport {
    let strictness = if strictness.is_finite() && strictness > 0.0 { strictness } else { 3.0 };
    let eta = params.eta;
    let eta_upper = 1.0 / params.xi0.sqrt();
    let eta_lower = 1.0 / params.xi0;
    let lo = strictness * eta_lower;
    let hi = eta_upper / strictness;
    // bounds are closed, up to rounding in the products above
    let slack = 1.0 + 1e-12;
    let above_lower = eta * slack >= lo;
    let below_upper = eta <= hi * slack;
    let satisfied = above_lower && below_upper;
    let margin = (eta / lo).min(hi / eta);
    let marginal = satisfied && margin < 1.5;

    let mut messages = Vec::new();
    if !above_lower {
        messages.push(format!(
            "eta = {eta} is below {strictness} x 1/xi0 = {lo}: packet too wide for coherent emission"
        ));
    }
    if !below_upper {
        messages.push(format!(
            "eta = {eta} is above 1/({strictness} x sqrt(xi0)) = {hi}: packet spreads during emission"
        ));
    }
    if hi < lo {
        messages.push(format!("no admissible eta at strictness {strictness} for xi0 = {}", params.xi0));
    }
    if marginal {
        messages.push(format!("eta = {eta} sits within a factor 1.5 of the admissible window edge"));
    }
    ValidityReport {
        eta_upper,
        eta_lower,
        packet_ratio: 1.0 / (params.xi0 * eta),
        strictness,
        satisfied,
        marginal,
        messages,
    }
}

/// Laguerre polynomial `L_k(x)` by the three-term recurrence.
pub fn laguerre(k: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 - x) * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_k(τ−p)·exp(−(τ−p)/2)·θ(τ−p)` sampled at `p_nodes`, scaled to unit
/// discrete norm.
pub fn laguerre_mode(k: i64, tau: f64, p_nodes: &[f64]) -> Result<Vec<C64>> {
    if k < 0 {
        return Err(Error::InvalidParameter(format!("Laguerre index must be non-negative, got {k}")));
    }
    let k = k as usize;
    let raw: Vec<f64> = p_nodes
        .iter()
        .map(|&p| {
            if p > tau {
                0.0
            } else {
                let x = tau - p;
                laguerre(k, x) * (-x / 2.0).exp()
            }
        })
        .collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Laguerre mode {k} vanishes on the given nodes (tau = {tau})"
        )));
    }
    Ok(raw.into_iter().map(|x| C64::new(x / norm, 0.0)).collect())
}

/// Laguerre modes `0..=k_max` orthonormalized on the discrete nodes in order
/// of increasing `k` (modified Gram–Schmidt, two passes).
///
/// Plain samples are orthogonal only up to the O(Δp) quadrature error of the
/// mesh; this basis is exactly orthonormal and spans the same space.
pub fn laguerre_basis(k_max: usize, tau: f64, p_nodes: &[f64]) -> Result<Vec<Vec<C64>>> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut v = laguerre_mode(k as i64, tau, p_nodes)?;
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = crate::tensor::norm(&v);
        if n < 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "Laguerre modes are linearly dependent on this mesh at k = {k}"
            )));
        }
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
    Ok(basis)
}

/// How the two emission-stage weights enter K and S.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightConvention {
    /// `K₀ = 1/((λe)² + (λg)²)` and `S₀ = −Σ (λ)² log₂ (λ)²`, squares as in
    /// the closed-form zero-order expressions.
    #[default]
    AsPrinted,
    /// The weights enter `K = 1/Σλ²` and `S = −Σ λ log₂ λ` directly.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroOrder {
    pub k0: f64,
    pub s0: f64,
}

/// Excited-state and emitted-photon populations `(e^{−τ}, 1 − e^{−τ})`.
pub fn emission_weights(tau: f64) -> (f64, f64) {
    let le = (-tau).exp();
    (le, -(-tau).exp_m1())
}

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Composite-spectrum measures under the given convention.
fn measures(weights: &[f64], convention: WeightConvention) -> (f64, f64) {
    let k = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    let s = match convention {
        WeightConvention::AsPrinted => -weights.iter().map(|w| xlog2x(w * w)).sum::<f64>(),
        WeightConvention::Direct => -weights.iter().map(|&w| xlog2x(w)).sum::<f64>(),
    };
    (k, s.max(0.0))
}

/// Schmidt number and entropy without the fine structure of the emitted
/// state: only the two emission-stage weights contribute.
pub fn zero_order_dynamics(tau: f64, convention: WeightConvention) -> Result<ZeroOrder> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be non-negative, got {tau}")));
    }
    let (le, lg) = emission_weights(tau);
    let (k0, s0) = measures(&[le, lg], convention);
    Ok(ZeroOrder { k0, s0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics {
    pub k_inf: f64,
    pub s_inf: f64,
}

/// Residual entanglement for `τ ≫ 1`, `η ≪ 1`:
/// `K∞ = 1 + η²`, `S∞ = (η²/ln 2)(ln(1/η) + (1 + ln 2)/2)`.
pub fn asymptotics(eta: f64) -> Result<Asymptotics> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0, 1), got {eta}")));
    }
    let ln2 = std::f64::consts::LN_2;
    let e2 = eta * eta;
    Ok(Asymptotics { k_inf: 1.0 + e2, s_inf: e2 / ln2 * ((1.0 / eta).ln() + 0.5 * (1.0 + ln2)) })
}

/// Explicit sampling window, overriding the model default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPolicy {
    pub n: usize,
    pub window: Option<Window>,
    /// Re-run on an enlarged window and fail if the spectrum moves by more
    /// than [`DRIFT_TOLERANCE`].
    pub check_convergence: bool,
}

impl GridPolicy {
    pub fn new(n: usize) -> Self {
        GridPolicy { n, window: None, check_convergence: true }
    }
}

/// Width of the `(p+q)` Gaussian factor in modulus: `√(1 + (τη²ξ₀)²)/η`.
pub fn coord_gaussian_width(params: &AtomPhotonParams) -> f64 {
    let b = params.tau * params.eta * params.eta * params.xi0;
    (1.0 + b * b).sqrt() / params.eta
}

/// Default coordinate window: `p ∈ [τ − 40, τ]`, and `q` wide enough to hold
/// six Gaussian widths beyond `−p` at both ends. `margin_scale` stretches both
/// margins.
pub fn coord_window(params: &AtomPhotonParams, margin_scale: f64) -> Window {
    let w = coord_gaussian_width(params);
    let p_max = params.tau;
    let p_min = params.tau - COORD_P_SPAN * margin_scale;
    let m = COORD_Q_MARGIN_WIDTHS * w * margin_scale;
    Window { p_min, p_max, q_min: -p_max - m, q_max: -p_min + m }
}

/// Default momentum window `ν ∈ [−60, 60]`, `π ∈ [−6, 6]`, times `scale`.
pub fn momentum_window(scale: f64) -> Window {
    let (a, b) = (MOMENTUM_NU_HALF_WIDTH * scale, MOMENTUM_PI_HALF_WIDTH * scale);
    Window { p_min: -a, p_max: a, q_min: -b, q_max: b }
}

impl Window {
    fn grid(&self, n: usize) -> Result<Grid> {
        Grid::new(self.p_min, self.p_max, self.q_min, self.q_max, n)
    }

    /// Stretches the q window about its centre and pushes `p_min` down,
    /// keeping `p_max` (the light front in the coordinate model) fixed.
    fn enlarged_front_fixed(&self, factor: f64) -> Window {
        let qc = 0.5 * (self.q_min + self.q_max);
        let qh = 0.5 * (self.q_max - self.q_min) * factor;
        Window {
            p_min: self.p_max - (self.p_max - self.p_min) * factor,
            p_max: self.p_max,
            q_min: qc - qh,
            q_max: qc + qh,
        }
    }

    fn enlarged_centered(&self, factor: f64) -> Window {
        let pc = 0.5 * (self.p_min + self.p_max);
        let ph = 0.5 * (self.p_max - self.p_min) * factor;
        let qc = 0.5 * (self.q_min + self.q_max);
        let qh = 0.5 * (self.q_max - self.q_min) * factor;
        Window { p_min: pc - ph, p_max: pc + ph, q_min: qc - qh, q_max: qc + qh }
    }
}

/// A sampled model amplitude and its decomposition.
#[derive(Debug, Clone)]
pub struct ModelDecomposition {
    pub grid: Grid,
    pub amplitude: AmplitudeMatrix,
    pub result: SchmidtResult,
    /// Largest change of a leading weight on the enlarged window, when checked.
    pub drift: Option<f64>,
}

/// Largest `|λ_k − λ'_k|` over the leading 16 weights shared by both spectra.
pub fn spectrum_drift(a: &SchmidtResult, b: &SchmidtResult) -> f64 {
    let total_a: f64 = a.singular_values.iter().map(|s| s * s).sum();
    let total_b: f64 = b.singular_values.iter().map(|s| s * s).sum();
    a.singular_values
        .iter()
        .zip(&b.singular_values)
        .take(16)
        .map(|(x, y)| (x * x / total_a - y * y / total_b).abs())
        .fold(0.0, f64::max)
}

fn decompose_on(
    window: &Window,
    n: usize,
    opts: &DecompositionOptions,
    f: impl Fn(f64, f64) -> C64,
) -> Result<(Grid, AmplitudeMatrix, SchmidtResult)> {
    let grid = window.grid(n)?;
    let amplitude = normalize(&sample_amplitude(&f, &grid)?)?;
    let result = schmidt_decompose(&amplitude, opts)?;
    Ok((grid, amplitude, result))
}

fn with_drift_check(
    window: Window,
    enlarged: Window,
    policy: &GridPolicy,
    opts: &DecompositionOptions,
    f: impl Fn(f64, f64) -> C64 + Copy,
    what: &str,
) -> Result<ModelDecomposition> {
    let (grid, amplitude, result) = decompose_on(&window, policy.n, opts, f)?;
    let drift = if policy.check_convergence {
        let (_, _, wide) = decompose_on(&enlarged, policy.n, opts, f)?;
        let d = spectrum_drift(&result, &wide);
        if d.is_nan() || d > DRIFT_TOLERANCE {
            return Err(Error::Convergence(format!(
                "{what}: weights drift by {d:e} when the window is enlarged (limit {DRIFT_TOLERANCE:e}); \
                 widen the window or raise n"
            )));
        }
        Some(d)
    } else {
        None
    };
    Ok(ModelDecomposition { grid, amplitude, result, drift })
}

/// Samples and decomposes the coordinate amplitude. The convergence check
/// stretches both margins by 50%.
pub fn decompose_coord(
    params: &AtomPhotonParams,
    policy: &GridPolicy,
    opts: &DecompositionOptions,
) -> Result<ModelDecomposition> {
    let window = policy.window.unwrap_or_else(|| coord_window(params, 1.0));
    let enlarged = match policy.window {
        Some(w) => w.enlarged_front_fixed(1.5),
        None => coord_window(params, 1.5),
    };
    let p = *params;
    with_drift_check(window, enlarged, policy, opts, move |x, y| coord_value(&p, x, y), "coordinate model")
}

/// Samples and decomposes the momentum amplitude (rows: photon detuning,
/// columns: atom momentum). The convergence check doubles the window.
pub fn decompose_momentum(
    params: &AtomPhotonParams,
    policy: &GridPolicy,
    opts: &DecompositionOptions,
) -> Result<ModelDecomposition> {
    let window = policy.window.unwrap_or_else(|| momentum_window(1.0));
    let enlarged = window.enlarged_centered(2.0);
    let p = *params;
    with_drift_check(window, enlarged, policy, opts, move |x, y| momentum_value(&p, x, y), "momentum model")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsPoint {
    pub tau: f64,
    pub k0: f64,
    pub s0: f64,
    pub k: f64,
    pub s: f64,
    /// Composite weights: the excited-state weight followed by the scaled
    /// spectrum of the emitted state, sorted non-increasing.
    pub lambdas: Vec<f64>,
    pub drift: Option<f64>,
}

/// Composite spectrum `{e^{−τ}} ∪ {(1 − e^{−τ})·μ_k}` with `μ_k` the
/// weights of the coordinate amplitude at `τ`.
pub fn composite_spectrum(tau: f64, emitted: &[f64]) -> Vec<f64> {
    let (le, lg) = emission_weights(tau);
    let mut w: Vec<f64> = std::iter::once(le).chain(emitted.iter().map(|m| lg * m)).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

/// K and S at time `τ` including the fine structure of the emitted state.
pub fn full_dynamics(
    params: &AtomPhotonParams,
    policy: &GridPolicy,
    opts: &DecompositionOptions,
    convention: WeightConvention,
) -> Result<DynamicsPoint> {
    let tau = params.tau;
    let zero = zero_order_dynamics(tau, convention)?;
    let d = decompose_coord(params, policy, opts)?;
    let lambdas = composite_spectrum(tau, &d.result.lambdas);
    let (k, s) = measures(&lambdas, convention);
    Ok(DynamicsPoint { tau, k0: zero.k0, s0: zero.s0, k, s, lambdas, drift: d.drift })
}

/// Same as [`full_dynamics`] with the emitted state forced to a single mode;
/// reproduces [`zero_order_dynamics`].
pub fn rank_one_dynamics(tau: f64, convention: WeightConvention) -> Result<(f64, f64)> {
    zero_order_dynamics(tau, convention)?;
    Ok(measures(&composite_spectrum(tau, &[1.0]), convention))
}
