//! Penalised least-squares smoothing with a squared Laplace-Beltrami penalty.
//!
//! With `Psi_ij = psi_j(p_i)` and `R_ij = int lap(psi_i) lap(psi_j) dSigma`,
//! the coefficients solve `(Psi^T Psi + lambda R) f = Psi^T y`. The smoothing
//! matrix is `S = Psi A^-1 Psi^T`, its trace is the equivalent degrees of
//! freedom, and `lambda` can be chosen by minimising GCV.

mod lambda;
mod solve;
mod system;

pub use lambda::{brent_minimize, select_lambda, LambdaSearch, LambdaSelection};
pub use solve::{
    coefficient_covariance, gcv_value, predict, solve_fixed_lambda, solve_with, system_matrix, FitResult, Prediction,
    TraceMethod, SINGULAR_CONDITION,
};
pub use system::{
    apply_dirichlet_zero, assemble, assemble_default, check_c1, BoundaryCondition, Observations, SmoothingSystem,
    SparseRows,
};
