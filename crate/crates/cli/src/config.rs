//! Run configuration files (JSON).

use std::path::Path;

use biphoton::sweep::Family;
use biphoton::timedomain::DEFAULT_OVERSAMPLE;
use biphoton::{DriveParams, Ensemble, GridSpec, MultiplexConfig, PhysicalParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "gamma3N")]
    pub gamma3_n: f64,
    pub tau: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "single_ensemble")]
    pub ensembles: Vec<Ensemble>,
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default = "default_pair_tol")]
    pub pair_tol: f64,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    /// First sample time; `null` starts a quarter period before zero.
    pub start: Option<f64>,
    pub oversample: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { start: None, oversample: DEFAULT_OVERSAMPLE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub families: Vec<Family>,
    pub n_mp: Vec<usize>,
    pub dp1_start: f64,
    pub dp1_step: f64,
    pub steps: usize,
    /// Peak-to-edge margin; `null` means 15 gamma3N.
    pub window_margin: Option<f64>,
    pub scaling: Option<ScalingSection>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            families: vec![Family::Symmetric],
            n_mp: vec![2],
            dp1_start: 0.0,
            dp1_step: 5.0,
            steps: 21,
            window_margin: None,
            scaling: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    pub family: Family,
    pub n_max: usize,
    /// Range searched for every free shift coordinate.
    pub bounds: [f64; 2],
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self { family: Family::Symmetric, n_max: 4, bounds: [0.0, 60.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    pub omega_a_area: f64,
    pub omega_b_area: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        let d = DriveParams::default();
        Self { omega_a_area: d.omega_a_area, omega_b_area: d.omega_b_area, delta1: d.delta1, delta2: d.delta2 }
    }
}

fn single_ensemble() -> Vec<Ensemble> {
    vec![Ensemble::new(0.0, 0.0)]
}

fn default_rank() -> usize {
    8
}

fn default_pair_tol() -> f64 {
    biphoton::schmidt::DEFAULT_PAIR_TOL
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PhysicalParams::default();
        Self {
            gamma3_n: p.gamma3_n(),
            tau: p.tau(),
            grid: GridSpec::default(),
            ensembles: single_ensemble(),
            rank: default_rank(),
            pair_tol: default_pair_tol(),
            time: TimeSection::default(),
            sweep: SweepSection::default(),
            drive: DriveSection::default(),
            plot: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        self.multiplex()?;
        self.grid.build().map_err(CliError::from)?;
        if self.rank == 0 {
            return Err(CliError::Config("rank must be at least 1".into()));
        }
        if !(self.pair_tol.is_finite() && self.pair_tol > 0.0) {
            return Err(CliError::Config(format!("pair_tol must be > 0, got {}", self.pair_tol)));
        }
        if self.time.oversample == 0 {
            return Err(CliError::Config("time.oversample must be at least 1".into()));
        }
        if let Some(s) = &self.sweep.scaling {
            if s.n_max < 3 {
                return Err(CliError::Config("sweep.scaling.n_max must be at least 3".into()));
            }
        }
        if self.sweep.n_mp.iter().any(|&n| n == 0) {
            return Err(CliError::Config("sweep.n_mp entries must be at least 1".into()));
        }
        self.drive()?;
        Ok(())
    }

    pub fn params(&self) -> Result<PhysicalParams, CliError> {
        Ok(PhysicalParams::new(self.gamma3_n, self.tau)?)
    }

    pub fn multiplex(&self) -> Result<MultiplexConfig, CliError> {
        Ok(MultiplexConfig::new(self.ensembles.clone())?)
    }

    pub fn drive(&self) -> Result<DriveParams, CliError> {
        let d = DriveParams {
            omega_a_area: self.drive.omega_a_area,
            omega_b_area: self.drive.omega_b_area,
            delta1: self.drive.delta1,
            delta2: self.drive.delta2,
            tau: self.tau,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
