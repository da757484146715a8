//! Physical model of a DMA-based reconfigurable heterogeneous array (RHA).
//!
//! An RHA is a line of `M` antennas spaced `d` apart; each antenna is a
//! dynamic metasurface: a waveguide feeding `N` metamaterial elements spaced
//! `d_e` apart, each applying a discrete phase shift to the guided wave. The
//! per-antenna radiation pattern toward angle theta is
//!
//! ```text
//! phi_m(theta) = omega_m^H T delta(theta)
//! ```
//!
//! with `T` the diagonal waveguide propagation matrix and `delta` the element
//! manifold. This crate provides steering vectors, radiation patterns,
//! received-signal synthesis with ADC quantization and blocking, and SINR
//! evaluation in both the per-antenna and stacked forms.
//!
//! All angles are radians and all powers linear; dB conversions happen at
//! I/O boundaries only. Types are immutable after construction and all
//! operations are pure given an injected RNG.

pub mod channel;
pub mod config;
pub mod ideal;
pub mod lemma;
pub mod receive;
pub mod scenario;
pub mod steering;

pub use channel::{ChannelRealization, GainModel};
pub use config::RhaConfiguration;
pub use lemma::hadamard_mix_residual;
pub use receive::{
    antenna_blocking, blocking_margins, blocking_predicate, received_samples, received_sinr,
    received_sinr_stacked, AdcModel, BlockingStatus, ReceivedSamples,
};
pub use scenario::{ModelError, ScenarioConfig};
pub use steering::{
    array_phase, array_steering_matrix, dma_manifold, pattern_matrix, radiation_pattern,
    steering_vector, waveguide_matrix,
};

/// Absolute SINR upper bound for unit path gains:
/// `P_a M^2 N^2 L_a^2 / sigma_n^2`.
pub fn gamma_max(sc: &scenario::ScenarioConfig) -> f64 {
    let m = sc.num_antennas as f64;
    let n = sc.elements_per_antenna as f64;
    let l = sc.num_paths_alice as f64;
    sc.signal_power * m * m * n * n * l * l / sc.noise_power
}

/// Linear value to dB.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.max(1e-300).log10()
}

/// dB to linear value.
pub fn from_db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}
