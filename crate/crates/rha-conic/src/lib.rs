//! Solver-agnostic semidefinite programming layer.
//!
//! Two levels of API:
//!
//! * [`SdpProblem`] — a declarative problem description over named scalar and
//!   Hermitian matrix variables with affine-Hermitian PSD constraints, linear
//!   equalities and inequalities. Complex blocks are lowered to real symmetric
//!   form through the standard doubling embedding and equalities are
//!   eliminated through a null-space reparameterization before solving.
//! * [`ConeProgram`] — the real standard-form pair
//!   `min <C,X> s.t. <A_k,X> = b_k, X in PSD x NonNeg`, solved by an embedded
//!   Mehrotra predictor-corrector interior-point method with
//!   Nesterov-Todd scaling. Callers that already know the conic geometry of
//!   their problem (and which side of the pair is small) can build this form
//!   directly.
//!
//! Status taxonomy and tolerances are fixed here so callers stay
//! backend-independent.

pub mod cone;
pub mod embed;
pub mod ipm;
pub mod problem;

pub use cone::{BlockKind, ConeProgram, ConstraintMatrix, SymCoeff};
pub use embed::{embed_hermitian, extract_hermitian, EmbedError};
pub use ipm::{IpmOptions, IpmResult};
pub use problem::{
    AffineBlock, CoeffRef, LinearConstraint, ProblemError, Rel, SdpProblem, SdpSolution, Sign,
    SolveStatus, VarId,
};
