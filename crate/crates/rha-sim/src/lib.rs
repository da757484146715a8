//! Monte Carlo experiment harness: schemes, trials, metrics and persistence.

pub mod baseline;
pub mod config;
pub mod emit;
pub mod experiment;
pub mod metrics;
pub mod trial;

pub use baseline::{ula_scheme, UlaDesign};
pub use emit::{emit_results, OutputFormat, ResultRow, ResultsDocument};
pub use experiment::{run_experiment, ErrorMode, ExperimentConfig, Scheme, SweepAxis};
pub use metrics::{bootstrap_mean_ci, feasible_probability, Metrics};
pub use trial::{run_trial, TrialRecord};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] rha_model::ModelError),
    #[error(transparent)]
    Estimate(#[from] rha_estimate::EstimateError),
    #[error(transparent)]
    Robust(#[from] rha_robust::RobustError),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

/// Split-mix style seed derivation for independent per-trial streams.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
