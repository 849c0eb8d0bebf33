//! Shift sweeps, entropy maximization and scaling with the ensemble count.
//!
//! Ensembles sit on an equally spaced lattice of idler shifts
//! `dp_m = (N + 1 - 2m) * dp1`, `m = 1..N`, so neighbours are `2 dp1` apart
//! and `dp1` itself is the innermost positive shift. The symmetric family
//! keeps `dq = 0` (odd `N` includes an unshifted ensemble); the nonsymmetric
//! family sets `dq_m = dp_m`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, GridSpec};
use crate::schmidt::entanglement_metrics;
use crate::spectral::{build_joint_spectrum, Ensemble, MultiplexConfig, PhysicalParams};

/// Eigenvalues reported per sweep row.
pub const SWEEP_LAMBDAS: usize = 8;

/// Default distance, in units of `gamma3N`, between an ensemble's peak and
/// the grid edge.
pub const DEFAULT_MARGIN_LINEWIDTHS: f64 = 15.0;

pub const GOLDEN_ROUNDS: usize = 2;
pub const GOLDEN_TOL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Symmetric,
    Nonsymmetric,
}

impl Family {
    /// Configuration with the given positive shifts, mirrored to negative
    /// ones; odd `n_mp` adds an unshifted ensemble in the middle.
    pub fn config_from_positive(&self, n_mp: usize, positive: &[f64]) -> Result<MultiplexConfig> {
        if n_mp == 0 || positive.len() != n_mp / 2 {
            return Err(Error::InvalidConfig(format!(
                "{n_mp} ensembles need {} positive shifts, got {}",
                n_mp / 2,
                positive.len()
            )));
        }
        let mut dps: Vec<f64> = positive.iter().rev().copied().collect();
        if n_mp % 2 == 1 {
            dps.push(0.0);
        }
        dps.extend(positive.iter().map(|p| -p));
        let ensembles = dps
            .into_iter()
            .map(|dp| match self {
                Family::Symmetric => Ensemble::new(dp, 0.0),
                Family::Nonsymmetric => Ensemble::new(dp, dp),
            })
            .collect();
        MultiplexConfig::new(ensembles)
    }

    /// The equally spaced configuration for innermost positive shift `dp1`.
    pub fn lattice(&self, n_mp: usize, dp1: f64) -> Result<MultiplexConfig> {
        self.config_from_positive(n_mp, &lattice_positive(n_mp, dp1))
    }
}

/// Positive lattice shifts in increasing order.
pub fn lattice_positive(n_mp: usize, dp1: f64) -> Vec<f64> {
    (1..=n_mp / 2)
        .map(|k| {
            let step = (2 * k - 1 + n_mp % 2) as f64;
            step * dp1
        })
        .collect()
}

/// True when every ensemble's peak lies at least `margin` inside both grids.
pub fn in_window(cfg: &MultiplexConfig, signal: &FrequencyGrid, idler: &FrequencyGrid, margin: f64) -> bool {
    cfg.ensembles().iter().all(|e| {
        let (s, i) = e.peak();
        s >= signal.lo() + margin && s <= signal.hi() - margin && i >= idler.lo() + margin && i <= idler.hi() - margin
    })
}

/// Entropy, Schmidt number and leading eigenvalues of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub entropy_bits: f64,
    pub schmidt_number: f64,
    pub lambdas: Vec<f64>,
}

pub fn evaluate(
    params: &PhysicalParams,
    cfg: &MultiplexConfig,
    signal: &FrequencyGrid,
    idler: &FrequencyGrid,
    keep: usize,
) -> Result<Evaluation> {
    let js = build_joint_spectrum(params, cfg, signal, idler, true)?;
    let (entropy_bits, schmidt_number, mut lambdas) = entanglement_metrics(&js)?;
    lambdas.truncate(keep);
    Ok(Evaluation { entropy_bits, schmidt_number, lambdas })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub params: PhysicalParams,
    pub grid: GridSpec,
    pub family: Family,
    pub n_mp: usize,
    pub dp1_start: f64,
    pub dp1_step: f64,
    pub steps: usize,
    /// Peak-to-edge margin; `None` uses 15 `gamma3N`.
    pub window_margin: Option<f64>,
}

impl SweepSpec {
    pub fn margin(&self) -> f64 {
        self.window_margin
            .unwrap_or(DEFAULT_MARGIN_LINEWIDTHS * self.params.gamma3_n())
    }

    pub fn dp1_values(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.dp1_start + k as f64 * self.dp1_step).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("sweep needs at least one step".into()));
        }
        if self.n_mp == 0 {
            return Err(Error::InvalidConfig("sweep needs at least one ensemble".into()));
        }
        if !(self.dp1_start.is_finite() && self.dp1_step.is_finite() && self.margin().is_finite()) {
            return Err(Error::InvalidConfig("sweep range must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub dp1: f64,
    /// NaN for rows outside the window.
    pub entropy_bits: f64,
    pub schmidt_number: f64,
    /// Leading eigenvalues, padded with NaN to [`SWEEP_LAMBDAS`] entries.
    pub lambdas: Vec<f64>,
    pub in_window: bool,
}

/// One decomposition per `dp1` value; rows come back in sweep order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.grid.build()?;
    let margin = spec.margin();
    let dp1s = spec.dp1_values();
    let configs = dp1s
        .iter()
        .map(|&dp1| spec.family.lattice(spec.n_mp, dp1))
        .collect::<Result<Vec<_>>>()?;
    dp1s.par_iter()
        .zip(configs.par_iter())
        .map(|(&dp1, cfg)| {
            if !in_window(cfg, &grid, &grid, margin) {
                log::debug!("dp1 = {dp1}: support leaves the window");
                return Ok(SweepRow {
                    dp1,
                    entropy_bits: f64::NAN,
                    schmidt_number: f64::NAN,
                    lambdas: vec![f64::NAN; SWEEP_LAMBDAS],
                    in_window: false,
                });
            }
            let mut ev = evaluate(&spec.params, cfg, &grid, &grid, SWEEP_LAMBDAS)?;
            ev.lambdas.resize(SWEEP_LAMBDAS, f64::NAN);
            log::debug!("dp1 = {dp1}: S = {}", ev.entropy_bits);
            Ok(SweepRow {
                dp1,
                entropy_bits: ev.entropy_bits,
                schmidt_number: ev.schmidt_number,
                lambdas: ev.lambdas,
                in_window: true,
            })
        })
        .collect()
}

/// Shape of an entropy curve against `dp1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationReport {
    pub argmax_dp1: f64,
    pub max_entropy: f64,
    /// Every step up to the maximum is a non-decrease.
    pub rises_to_max: bool,
    /// Largest `|dS|` between consecutive rows with `dp1 >= threshold`.
    pub max_step_beyond: f64,
}

/// Summarizes in-window rows (assumed sorted by `dp1`).
pub fn saturation(rows: &[SweepRow], threshold: f64) -> Option<SaturationReport> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.in_window)
        .map(|r| (r.dp1, r.entropy_bits))
        .collect();
    let (imax, &(argmax_dp1, max_entropy)) = pts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    let rises_to_max = pts[..=imax].windows(2).all(|w| w[1].1 >= w[0].1);
    let max_step_beyond = pts
        .windows(2)
        .filter(|w| w[0].0 >= threshold)
        .map(|w| (w[1].1 - w[0].1).abs())
        .fold(0.0, f64::max);
    Some(SaturationReport { argmax_dp1, max_entropy, rises_to_max, max_step_beyond })
}

/// Shift at which ensembles resolve into separate modes: `max(4/tau, 4 gamma3N)`.
pub fn separation_threshold(params: &PhysicalParams) -> f64 {
    (4.0 / params.tau()).max(4.0 * params.gamma3_n())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeSpec {
    pub params: PhysicalParams,
    pub grid: GridSpec,
    pub family: Family,
    pub n_mp: usize,
    /// Range of every free coordinate.
    pub bounds: (f64, f64),
    pub window_margin: Option<f64>,
}

impl OptimizeSpec {
    pub fn margin(&self) -> f64 {
        self.window_margin
            .unwrap_or(DEFAULT_MARGIN_LINEWIDTHS * self.params.gamma3_n())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub n_mp: usize,
    /// Positive idler shifts of the best configuration, increasing.
    pub positive_shifts: Vec<f64>,
    pub entropy_bits: f64,
    pub schmidt_number: f64,
    pub lambdas: Vec<f64>,
    pub evaluations: usize,
}

fn positions_from_coordinates(coords: &[f64]) -> Vec<f64> {
    coords
        .iter()
        .scan(0.0, |acc, c| {
            *acc += c;
            Some(*acc)
        })
        .collect()
}

/// Maximizes the entropy over the family's free shifts.
///
/// The free coordinates are the innermost positive shift and the gaps
/// between successive positive shifts, each searched by golden section over
/// `bounds` while the others are held fixed, for two rounds. The search
/// starts from the equal lattice at the middle of the bounds; configurations
/// leaving the window score minus infinity.
pub fn maximize_entropy(spec: &OptimizeSpec) -> Result<Optimum> {
    if spec.n_mp == 0 {
        return Err(Error::InvalidConfig("need at least one ensemble".into()));
    }
    let (lo, hi) = spec.bounds;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidConfig(format!("bad shift bounds [{lo}, {hi}]")));
    }
    let grid = spec.grid.build()?;
    let margin = spec.margin();
    let keep = 2 * spec.n_mp.max(SWEEP_LAMBDAS / 2);
    let mut cache: HashMap<Vec<u64>, Option<Evaluation>> = HashMap::new();
    let mut objective = |coords: &[f64]| -> Result<f64> {
        let key: Vec<u64> = coords.iter().map(|c| c.to_bits()).collect();
        if let Some(hit) = cache.get(&key) {
            return Ok(hit.as_ref().map_or(f64::NEG_INFINITY, |e| e.entropy_bits));
        }
        let positive = positions_from_coordinates(coords);
        let cfg = spec.family.config_from_positive(spec.n_mp, &positive)?;
        let ev = if in_window(&cfg, &grid, &grid, margin) {
            Some(evaluate(&spec.params, &cfg, &grid, &grid, keep)?)
        } else {
            None
        };
        let s = ev.as_ref().map_or(f64::NEG_INFINITY, |e| e.entropy_bits);
        cache.insert(key, ev);
        Ok(s)
    };

    let free = spec.n_mp / 2;
    let mid = 0.5 * (lo + hi);
    let lattice = lattice_positive(spec.n_mp, mid);
    let mut coords: Vec<f64> = lattice
        .iter()
        .scan(0.0, |prev, p| {
            let gap = p - *prev;
            *prev = *p;
            Some(gap.clamp(lo, hi))
        })
        .collect();
    objective(&coords)?;
    for round in 0..GOLDEN_ROUNDS {
        for c in 0..free {
            let best = golden_section(lo, hi, GOLDEN_TOL, |x| {
                let mut trial = coords.clone();
                trial[c] = x;
                objective(&trial)
            })?;
            // keep the incumbent unless the line search found better
            let mut trial = coords.clone();
            trial[c] = best;
            if objective(&trial)? > objective(&coords)? {
                coords = trial;
            }
        }
        log::debug!("n_mp = {} round {round}: coords {coords:?}", spec.n_mp);
    }

    let key: Vec<u64> = coords.iter().map(|c| c.to_bits()).collect();
    let evaluations = cache.len();
    let ev = cache
        .remove(&key)
        .flatten()
        .ok_or_else(|| Error::InvalidConfig("no configuration inside the window".into()))?;
    Ok(Optimum {
        n_mp: spec.n_mp,
        positive_shifts: positions_from_coordinates(&coords),
        entropy_bits: ev.entropy_bits,
        schmidt_number: ev.schmidt_number,
        lambdas: ev.lambdas,
        evaluations,
    })
}

/// Golden-section search for a maximum of `f` on `[a, b]`; returns the best
/// probed abscissa once the bracket is narrower than `tol`.
fn golden_section(mut a: f64, mut b: f64, tol: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { x1 } else { x2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n_mp: usize,
    pub s_max: f64,
    pub k_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub n_mp: Vec<usize>,
    pub s_max: Vec<f64>,
    pub k_max: Vec<f64>,
    /// Mean of `S_M - log2(N)`.
    pub s_excess: f64,
    /// `S_M(N) - S_M(1) - log2(N)` when `N = 1` is present.
    pub log_law_deviation: Option<Vec<f64>>,
    pub k_slope: f64,
    pub k_intercept: f64,
    pub k_residuals: Vec<f64>,
    /// Largest `|residual| / K_M`.
    pub k_relative_residual: f64,
}

pub fn fit_scaling(points: &[ScalingPoint]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints { got: points.len(), need: 3 });
    }
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.n_mp);
    let n: Vec<f64> = pts.iter().map(|p| p.n_mp as f64).collect();
    let s: Vec<f64> = pts.iter().map(|p| p.s_max).collect();
    let k: Vec<f64> = pts.iter().map(|p| p.k_max).collect();
    let m = n.len() as f64;
    let s_excess = n.iter().zip(&s).map(|(n, s)| s - n.log2()).sum::<f64>() / m;

    let nbar = n.iter().sum::<f64>() / m;
    let kbar = k.iter().sum::<f64>() / m;
    let sxy: f64 = n.iter().zip(&k).map(|(x, y)| (x - nbar) * (y - kbar)).sum();
    let sxx: f64 = n.iter().map(|x| (x - nbar) * (x - nbar)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints { got: 1, need: 3 });
    }
    let k_slope = sxy / sxx;
    let k_intercept = kbar - k_slope * nbar;
    let k_residuals: Vec<f64> = n.iter().zip(&k).map(|(x, y)| y - (k_intercept + k_slope * x)).collect();
    let k_relative_residual = k_residuals
        .iter()
        .zip(&k)
        .map(|(r, y)| r.abs() / y.abs())
        .fold(0.0, f64::max);
    let log_law_deviation = pts.iter().position(|p| p.n_mp == 1).map(|i1| {
        n.iter().zip(&s).map(|(n, sm)| sm - s[i1] - n.log2()).collect()
    });
    Ok(ScalingFit {
        n_mp: pts.iter().map(|p| p.n_mp).collect(),
        s_max: s,
        k_max: k,
        s_excess,
        log_law_deviation,
        k_slope,
        k_intercept,
        k_residuals,
        k_relative_residual,
    })
}

/// Mass of the `top` largest eigenvalues of `n_mp` disjoint, equally weighted
/// copies of a single-ensemble spectrum.
pub fn block_model_mass(single: &[f64], n_mp: usize, top: usize) -> f64 {
    let mut all: Vec<f64> = single
        .iter()
        .flat_map(|l| std::iter::repeat(l / n_mp as f64).take(n_mp))
        .collect();
    all.sort_by(|a, b| b.total_cmp(a));
    all.iter().take(top).sum()
}
