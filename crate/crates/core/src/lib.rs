//! Joint spectra, Schmidt modes and entanglement scaling of photon pairs from
//! frequency-multiplexed atomic ensembles.
//!
//! Frequencies are in units of the single-atom decay rate and times in its
//! inverse.

pub mod dynamics;
pub mod error;
pub mod grid;
mod linalg;
pub mod schmidt;
pub mod spectral;
pub mod sweep;
pub mod timedomain;
pub mod verify;

pub use dynamics::{DriveParams, DsiWindow};
pub use error::{Error, Result};
pub use grid::{FrequencyGrid, GridSpec, QuadratureRule};
pub use schmidt::{decompose, entropy, pair_degeneracies, schmidt_number, ModePair, SchmidtResult};
pub use spectral::{build_joint_spectrum, Ensemble, JointSpectrum, MultiplexConfig, PhysicalParams};
pub use sweep::{Family, ScalingFit, SweepRow, SweepSpec};
pub use timedomain::{TimeModes, TimeWindow};
pub use verify::VerifyReport;
