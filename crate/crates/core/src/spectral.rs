//! Joint-spectral amplitude of the cascade-emitted photon pair.
//!
//! A single ensemble driven by Gaussian pulses of width `tau` emits pairs with
//! amplitude
//!
//! ```text
//! f(ws, wi) = exp(-(ws + wi)^2 tau^2 / 8) / (G/2 - i wi)
//! ```
//!
//! where `ws`, `wi` are the signal and idler detunings and `G` is the
//! superradiant idler decay rate. Frequency-multiplexing several ensembles sums
//! shifted copies of this amplitude. All frequencies are in units of the
//! single-atom decay rate.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

/// Captured mass below this fraction of the reference mass counts as empty.
pub const MIN_CAPTURED_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    gamma3_n: f64,
    tau: f64,
}

impl PhysicalParams {
    /// Intrinsic decay rate; the frequency unit.
    pub const GAMMA3: f64 = 1.0;

    pub fn new(gamma3_n: f64, tau: f64) -> Result<Self> {
        if !gamma3_n.is_finite() || gamma3_n < Self::GAMMA3 {
            return Err(Error::InvalidParams(format!(
                "gamma3N must be finite and >= gamma3 = 1, got {gamma3_n}"
            )));
        }
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::InvalidParams(format!("tau must be finite and > 0, got {tau}")));
        }
        Ok(Self { gamma3_n, tau })
    }

    pub fn gamma3(&self) -> f64 {
        Self::GAMMA3
    }

    pub fn gamma3_n(&self) -> f64 {
        self.gamma3_n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `(2 sqrt(pi) / tau) * (2 pi / G)`: the integral of `|f|^2` over the
    /// whole plane for one ensemble.
    pub fn single_ensemble_mass(&self) -> f64 {
        (2.0 * PI.sqrt() / self.tau) * (2.0 * PI / self.gamma3_n)
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { gamma3_n: 5.0, tau: 0.25 }
    }
}

/// One multiplexed ensemble: idler shift `dp`, combined shift `dq`, and a
/// complex amplitude weight (1 for identically excited ensembles).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ensemble {
    pub dp: f64,
    pub dq: f64,
    #[serde(default = "unit_weight", skip_serializing_if = "is_unit_weight")]
    pub weight: Complex64,
}

fn unit_weight() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn is_unit_weight(w: &Complex64) -> bool {
    *w == unit_weight()
}

impl Ensemble {
    pub fn new(dp: f64, dq: f64) -> Self {
        Self { dp, dq, weight: unit_weight() }
    }

    pub fn with_weight(mut self, weight: Complex64) -> Self {
        self.weight = weight;
        self
    }

    /// Detunings `(ws, wi)` of the amplitude peak.
    pub fn peak(&self) -> (f64, f64) {
        (self.dp - self.dq, -self.dp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplexConfig {
    ensembles: Vec<Ensemble>,
}

impl MultiplexConfig {
    pub fn new(ensembles: Vec<Ensemble>) -> Result<Self> {
        if ensembles.is_empty() {
            return Err(Error::InvalidConfig("need at least one ensemble".into()));
        }
        for (m, e) in ensembles.iter().enumerate() {
            if !(e.dp.is_finite() && e.dq.is_finite() && e.weight.re.is_finite() && e.weight.im.is_finite()) {
                return Err(Error::InvalidConfig(format!("ensemble {m} has a non-finite shift or weight")));
            }
        }
        Ok(Self { ensembles })
    }

    pub fn from_shifts(shifts: &[(f64, f64)]) -> Result<Self> {
        Self::new(shifts.iter().map(|&(dp, dq)| Ensemble::new(dp, dq)).collect())
    }

    /// One unshifted ensemble.
    pub fn single() -> Self {
        Self { ensembles: vec![Ensemble::new(0.0, 0.0)] }
    }

    pub fn ensembles(&self) -> &[Ensemble] {
        &self.ensembles
    }

    pub fn n_mp(&self) -> usize {
        self.ensembles.len()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut ensembles = self.ensembles.clone();
        ensembles.extend_from_slice(&other.ensembles);
        Self { ensembles }
    }

    /// Adds `(ddp, ddq)` to every ensemble's shifts.
    pub fn translated(&self, ddp: f64, ddq: f64) -> Self {
        let ensembles = self
            .ensembles
            .iter()
            .map(|e| Ensemble { dp: e.dp + ddp, dq: e.dq + ddq, weight: e.weight })
            .collect();
        Self { ensembles }
    }

    fn reference_mass(&self, params: &PhysicalParams) -> f64 {
        let weights: f64 = self.ensembles.iter().map(|e| e.weight.norm_sqr()).sum();
        weights * params.single_ensemble_mass()
    }
}

impl Default for MultiplexConfig {
    fn default() -> Self {
        Self::single()
    }
}

#[inline]
fn term(params: &PhysicalParams, dws: f64, dwi: f64, dp: f64, dq: f64) -> Complex64 {
    let tau = params.tau;
    let sum = dws + dwi + dq;
    let gauss = (-sum * sum * tau * tau / 8.0).exp();
    gauss / Complex64::new(0.5 * params.gamma3_n, -(dwi + dp))
}

/// Single-ensemble amplitude, unnormalized.
pub fn eval_single(params: &PhysicalParams, dws: f64, dwi: f64) -> Complex64 {
    term(params, dws, dwi, 0.0, 0.0)
}

/// Sum over ensembles of the shifted single-ensemble amplitude.
pub fn eval_multiplexed(params: &PhysicalParams, cfg: &MultiplexConfig, dws: f64, dwi: f64) -> Complex64 {
    cfg.ensembles
        .iter()
        .map(|e| e.weight * term(params, dws, dwi, e.dp, e.dq))
        .sum()
}

/// Amplitude sampled on a signal × idler grid.
#[derive(Debug, Clone)]
pub struct JointSpectrum {
    pub signal_grid: FrequencyGrid,
    pub idler_grid: FrequencyGrid,
    /// `amplitude[[j, k]] = f(signal_grid.nodes[j], idler_grid.nodes[k])`
    pub amplitude: Array2<Complex64>,
    pub normalized: bool,
    /// Overall pair-generation amplitude; carried along, never used in metrics.
    pub generation_amplitude: Option<f64>,
}

impl JointSpectrum {
    /// `sum_jk ws[j] wi[k] |f[j,k]|^2`
    pub fn weighted_norm_sqr(&self) -> f64 {
        let ws = self.signal_grid.weights();
        let wi = self.idler_grid.weights();
        self.amplitude
            .outer_iter()
            .zip(ws)
            .map(|(row, w)| w * row.iter().zip(wi).map(|(a, v)| v * a.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn with_generation_amplitude(mut self, value: f64) -> Self {
        self.generation_amplitude = Some(value);
        self
    }

    /// `|f|^2` at every node.
    pub fn intensity(&self) -> Array2<f64> {
        self.amplitude.mapv(|a| a.norm_sqr())
    }
}

/// Evaluates the multiplexed amplitude on the grids, optionally rescaled to
/// unit weighted L2 norm.
pub fn build_joint_spectrum(
    params: &PhysicalParams,
    cfg: &MultiplexConfig,
    signal_grid: &FrequencyGrid,
    idler_grid: &FrequencyGrid,
    normalize: bool,
) -> Result<JointSpectrum> {
    let ns = signal_grid.len();
    let ni = idler_grid.len();
    let mut data = vec![Complex64::new(0.0, 0.0); ns * ni];
    // Rows are independent; the result does not depend on the worker count.
    data.par_chunks_mut(ni).enumerate().for_each(|(j, row)| {
        let ws = signal_grid.nodes()[j];
        for (out, &wi) in row.iter_mut().zip(idler_grid.nodes()) {
            *out = eval_multiplexed(params, cfg, ws, wi);
        }
    });
    let amplitude = Array2::from_shape_vec((ns, ni), data).expect("shape matches buffer");
    let mut js = JointSpectrum {
        signal_grid: signal_grid.clone(),
        idler_grid: idler_grid.clone(),
        amplitude,
        normalized: false,
        generation_amplitude: None,
    };
    if normalize {
        let norm_sqr = js.weighted_norm_sqr();
        let reference = cfg.reference_mass(params);
        if !(norm_sqr.is_finite() && norm_sqr > MIN_CAPTURED_FRACTION * reference) {
            return Err(Error::NormIsZero { captured: norm_sqr, reference });
        }
        let scale = norm_sqr.sqrt().recip();
        js.amplitude.mapv_inplace(|a| a * scale);
        js.normalized = true;
    }
    Ok(js)
}
