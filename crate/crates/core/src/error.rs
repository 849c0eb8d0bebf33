use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("invalid multiplex configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    /// The spectral mass captured by the grid window is negligible compared to
    /// the mass of the configured ensembles.
    #[error("spectral mass on the grid is negligible (captured {captured:e} of reference {reference:e}); check the frequency window")]
    NormIsZero { captured: f64, reference: f64 },

    #[error("requested rank {rank} exceeds the maximum {max}")]
    RankTooLarge { rank: usize, max: usize },

    #[error("rank must be at least 1")]
    ZeroRank,

    #[error("joint spectrum must be normalized before decomposition")]
    NotNormalized,

    #[error("not a probability vector: {0}")]
    NotAProbabilityVector(String),

    #[error("time sampling violates the Nyquist condition: {0}")]
    NyquistViolated(String),

    #[error("no oscillation found in the density spectrum")]
    NoOscillationFound,

    #[error("integration step too coarse: norm drift {drift_per_time:e} per unit time")]
    StepTooCoarse { drift_per_time: f64 },

    #[error("integration window too short: {0}")]
    WindowTooShort(String),

    #[error("dense factorization did not converge: {0}")]
    DecompositionFailed(String),

    #[error("need at least {need} points, got {got}")]
    InsufficientPoints { got: usize, need: usize },
}
