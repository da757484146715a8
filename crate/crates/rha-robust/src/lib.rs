//! Worst-case SINR maximization for the RHA under bounded DoA/CSI
//! uncertainty.
//!
//! The stacked unit-modulus vector `v` (element phases with the antenna
//! weights merged) is relaxed to `V = v v^H`; the robust constraints at a
//! target SINR `gamma` become linear matrix inequalities in `(V, b,
//! multipliers)` through the S-procedure over the error balls. A bisection
//! over `gamma` finds the largest feasible target; the relaxation is
//! collapsed to a vector by eigenvalue decomposition or Gaussian
//! randomization, projected onto the discrete phase alphabet by an
//! alternating alignment loop, and finally re-certified so the reported
//! `gamma` is a valid lower bound for the vector actually returned.

pub mod bisect;
pub mod certify;
pub mod discretize;
pub mod errors;
pub mod feasibility;
pub mod lmi;
pub mod rank1;
pub mod sample;
pub mod solve;
pub mod stacked;

pub use bisect::{bisection_search, bisection_search_adaptive, BisectionOutcome};
pub use certify::certify_fixed_vector;
pub use discretize::{discretize, DiscretizeOutcome};
pub use errors::{linearization_bound, ErrorBall};
pub use feasibility::{feasibility_sdp, FeasibilityOutcome, RobustWitness};
pub use rank1::extract_rank1;
pub use sample::{sample_worst_case, WorstCaseReport};
pub use solve::{solve_robust, BeamformerSolution, SolveParams};
pub use stacked::StackedModel;

#[derive(Debug, thiserror::Error)]
pub enum RobustError {
    #[error(transparent)]
    Model(#[from] rha_model::ModelError),
    #[error("conic solver: {0}")]
    Conic(String),
    #[error("{0}")]
    Invalid(String),
    #[error("bisection found no feasible target (gamma = 0 infeasible)")]
    NoFeasibleTarget,
}
