//! Type-II collinear SPDC biphoton amplitude.
//!
//! In dimensionless frequency offsets `p`, `q` of the ordinary and
//! extraordinary photons the amplitude is
//! `exp(−(p+q)²)·sinc(½(X_o·p + X_e·q))`, where `X_{o,e} = d_{o,e}·L·σ`
//! combine the group-delay mismatch per unit length, the crystal length and
//! the pump bandwidth. Results depend on `L` and `σ` only through `L·σ`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::schmidt::{schmidt_decompose, DecompositionOptions, SchmidtResult};
use crate::tensor::{normalize, sample_amplitude, AmplitudeMatrix, Grid};
use crate::{Error, Result};

/// Default `k'_p − k'_o` per millimetre of crystal, ps/mm.
pub const DEFAULT_D_O: f64 = 0.076;
/// Default `k'_p − k'_e` per millimetre of crystal, ps/mm.
pub const DEFAULT_D_E: f64 = 0.266;
/// Default half-width of the square `(p, q)` window.
pub const DEFAULT_HALF_WIDTH: f64 = 30.0;
/// Default number of nodes per axis.
pub const DEFAULT_N: usize = 512;
/// Largest sinc phase advance allowed between neighbouring nodes.
pub const MAX_PHASE_STEP: f64 = PI / 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcParams {
    length: f64,
    sigma: f64,
    d_o: f64,
    d_e: f64,
    x_o: f64,
    x_e: f64,
}

impl SpdcParams {
    /// Crystal length `length` (mm), pump bandwidth `sigma` (ps⁻¹) and
    /// group-delay mismatches per unit length (ps/mm).
    pub fn new(length: f64, sigma: f64, d_o: f64, d_e: f64) -> Result<Self> {
        for (name, v) in [("L", length), ("sigma", sigma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("d_o", d_o), ("d_e", d_e)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        let ls = length * sigma;
        Ok(SpdcParams { length, sigma, d_o, d_e, x_o: d_o * ls, x_e: d_e * ls })
    }

    /// Parameters with the default group delays.
    pub fn with_defaults(length: f64, sigma: f64) -> Result<Self> {
        Self::new(length, sigma, DEFAULT_D_O, DEFAULT_D_E)
    }

    /// Synthetic parameters given directly in dimensionless form
    /// (`L = σ = 1`, `d = X`).
    pub fn from_dimensionless(x_o: f64, x_e: f64) -> Result<Self> {
        Self::new(1.0, 1.0, x_o, x_e)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn d_o(&self) -> f64 {
        self.d_o
    }

    pub fn d_e(&self) -> f64 {
        self.d_e
    }

    pub fn x_o(&self) -> f64 {
        self.x_o
    }

    pub fn x_e(&self) -> f64 {
        self.x_e
    }

    /// The same crystal with the ordinary and extraordinary rays exchanged.
    pub fn swapped(&self) -> Self {
        SpdcParams { d_o: self.d_e, d_e: self.d_o, x_o: self.x_e, x_e: self.x_o, ..*self }
    }
}

/// Pump spectrum factor `exp(−(p+q)²)`.
pub fn pump_envelope(p: f64, q: f64) -> f64 {
    let s = p + q;
    (-s * s).exp()
}

/// `sin x / x` with the removable singularity handled by its series.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Phase-matching factor `sinc(½(X_o·p + X_e·q))`.
pub fn phase_matching(x_o: f64, x_e: f64, p: f64, q: f64) -> f64 {
    sinc(0.5 * (x_o * p + x_e * q))
}

/// Unnormalized biphoton amplitude; real-valued.
pub fn biphoton_amplitude(params: &SpdcParams, p: f64, q: f64) -> f64 {
    pump_envelope(p, q) * phase_matching(params.x_o, params.x_e, p, q)
}

/// Sinc phase advance per mesh step, `½·max(|X_o|, |X_e|)·Δ`.
pub fn phase_step(params: &SpdcParams, grid: &Grid) -> f64 {
    0.5 * params.x_o.abs().max(params.x_e.abs()) * grid.dp().max(grid.dq())
}

/// Rejects meshes on which the sinc oscillation is under-resolved, reporting
/// the node count that would pass.
pub fn check_resolution(params: &SpdcParams, grid: &Grid) -> Result<()> {
    let step = phase_step(params, grid);
    if step > MAX_PHASE_STEP {
        let x = params.x_o.abs().max(params.x_e.abs());
        let span = (grid.p_range().1 - grid.p_range().0).max(grid.q_range().1 - grid.q_range().0);
        let required_n = (0.5 * x * span / MAX_PHASE_STEP).ceil() as usize + 1;
        return Err(Error::Resolution { phase_step: step, limit: MAX_PHASE_STEP, required_n });
    }
    Ok(())
}

/// Square window `[−half_width, half_width]²` with `n` nodes, checked with
/// [`check_resolution`].
pub fn spdc_grid(params: &SpdcParams, half_width: f64, n: usize) -> Result<Grid> {
    let grid = Grid::square(-half_width, half_width, n)?;
    check_resolution(params, &grid)?;
    Ok(grid)
}

/// Samples the biphoton amplitude on `grid` (rows: ordinary ray `p`,
/// columns: extraordinary ray `q`), normalized.
pub fn sample_biphoton(params: &SpdcParams, grid: &Grid) -> Result<AmplitudeMatrix> {
    let p = *params;
    normalize(&sample_amplitude(|x, y| C64::new(biphoton_amplitude(&p, x, y), 0.0), grid)?)
}

#[derive(Debug, Clone)]
pub struct SpdcDecomposition {
    pub grid: Grid,
    pub amplitude: AmplitudeMatrix,
    pub result: SchmidtResult,
}

/// Samples on the checked square window and decomposes.
pub fn decompose_spdc(
    params: &SpdcParams,
    half_width: f64,
    n: usize,
    opts: &DecompositionOptions,
) -> Result<SpdcDecomposition> {
    decompose_spdc_on(params, &spdc_grid(params, half_width, n)?, opts)
}

/// Samples on an arbitrary grid (resolution-checked) and decomposes.
pub fn decompose_spdc_on(params: &SpdcParams, grid: &Grid, opts: &DecompositionOptions) -> Result<SpdcDecomposition> {
    check_resolution(params, grid)?;
    let amplitude = sample_biphoton(params, grid)?;
    let result = schmidt_decompose(&amplitude, opts)?;
    Ok(SpdcDecomposition { grid: *grid, amplitude, result })
}
