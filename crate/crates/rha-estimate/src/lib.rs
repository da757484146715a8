//! Spatial-temporal DoA and CSI estimation for the RHA.
//!
//! The estimator samples the channel `K_r = N` times within one symbol, each
//! time with a different 1-bit (+-1) element pattern taken from a Hadamard
//! matrix column. Recombining the snapshots with the Hadamard rows turns the
//! M physical antennas into `N * M` virtual antennas on a uniform composite
//! grid. A single atomic-norm SDP over that grid recovers a Toeplitz
//! covariance surrogate whose Vandermonde structure carries the multipath
//! angles; paths are split between the legitimate transmitter and the jammer
//! by pilot correlation, and the path gains follow from least squares.

pub mod anm;
pub mod calibrate;
pub mod classify;
pub mod csi;
pub mod doa;
pub mod hadamard;
pub mod pipeline;
pub mod result;
pub mod schedule;
pub mod snapshots;

pub use anm::{solve_anm, AnmSolution};
pub use calibrate::{calibrate_error_radii, CalibrationOutcome};
pub use classify::{classify_paths, PathClass};
pub use csi::{estimate_csi, CsiEstimate};
pub use doa::{extract_doa, DoaEstimate};
pub use hadamard::{hadamard_matrix, HadamardError};
pub use pipeline::{run_estimation, EstimationDiagnostics};
pub use result::EstimationResult;
pub use schedule::{build_pattern_schedule, PatternSchedule};
pub use snapshots::{collect_snapshots, combine_virtual_antennas, SnapshotSet, VirtualArrayData};

#[derive(Debug, thiserror::Error)]
pub enum EstimateError {
    #[error(transparent)]
    Hadamard(#[from] HadamardError),
    #[error(transparent)]
    Model(#[from] rha_model::ModelError),
    #[error("solver: {0}")]
    Solver(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("schedule mismatch: {0}")]
    Schedule(String),
}
