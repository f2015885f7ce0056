//! Primal-dual methods for box- and sparsity-constrained optimal control of
//! elliptic and parabolic PDEs, plus neural-operator surrogates that run the
//! same iteration without touching a PDE solver.
//!
//! The crate is generic over the scalar type; `f64` aliases for the main
//! types sit at the crate root.

pub mod dst;
pub mod error;
pub mod grid;
pub mod onet;
pub mod operator;
pub mod pd;
pub mod prox;
pub mod scalar;
pub mod sparse;

pub use error::{Error, Result};
pub use grid::{inner, norm, norm_l1, Field, Grid};
pub use onet::{
    as_solution_operator, fidelity_check, generate_dataset, load_net, march_fidelity_check,
    parabolic_surrogate_operator, sample_grf, save_net, surrogate_adjoint_march,
    surrogate_parabolic_march, train, BoundaryFactor, FidelityReport, NetMetadata, OperatorNet,
    TrainConfig, TrainingSet,
};
pub use operator::{
    estimate_operator_norm, make_elliptic_operator, make_parabolic_operator, NormEstimate,
    SolutionOperator,
};
pub use pd::{
    admm_initial_state, admm_step, apd_update, errors_against, kkt_residual, lyapunov_energy,
    nonzero_fraction, solve, step_size_bound, validate_step_sizes, ExactSolution, ProblemInstance,
    Regularizer, SolveReport, SolverConfig, StepRule,
};
pub use prox::{dual_update, moreau_check, project_box, prox_primal_box, prox_primal_l1_box, shrink};
pub use scalar::Scalar;
pub use sparse::{assemble_elliptic, solve_spd, CsrMatrix, EllipticProblem};

/// f64 instantiations, the types the benchmark harness works with.
pub type Field64 = Field<f64>;
pub type EllipticProblem64 = EllipticProblem<f64>;
pub type SolutionOperator64 = SolutionOperator<f64>;
pub type CsrMatrix64 = CsrMatrix<f64>;
