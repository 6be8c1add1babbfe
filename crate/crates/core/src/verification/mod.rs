//! Error norms, reference solutions and convergence studies.

mod fem;
mod norms;
mod ode;
pub mod problems;
mod report;
mod suites;

pub use fem::{bilinear_matrices, FemReference};
pub use norms::{fan_quadrature, heads_at, l2_relative_error, pointwise_relative_error, QuadPoint, Reference};
pub use ode::{ode_oracle, DirichletFn, OdeProblem, ODE_MAX_DOFS};
pub use report::{convergence_study, Check, ConvergenceRow, SuiteReport, VerificationReport, EXACT_TOL};
pub use suites::{
    convergence_suite, fixed_point_drift, harmonic_studies, oracle_model, oracle_reference, oracle_study,
    oracle_suite, patch_errors, patch_suite, run_suite, sample_line, unit_square_errors, CONVERGENCE_SIZES,
    ORACLE_OUTPUT_DT, ORACLE_STEPS, ORACLE_T_END, SUITES,
};
