//! Discrete Tikhonov regularization and minimum-norm solutions for Fredholm
//! integral equations of the first kind,
//!
//! ```text
//! (T x)(s) = ∫_Ω k(s, t) x(t) dt = y(s),   Ω = [a, b],
//! ```
//!
//! through finite-rank approximations `T_n = π_n T`, together with executable
//! checks of the error bounds linking `x_n† = T_n† π_n y`, the Tikhonov
//! solutions `x_α`, `x_{α,n}` and the operator perturbation
//! `ε_n ≥ ‖T*T − T_n*T_n‖`.
//!
//! Everything is generic over [`Scalar`] (`f32`, `f64`); the `Real*` aliases
//! fix `f64`.
//!
//! ```
//! use illposed::{build_default_system, catalog, min_norm_solution, l2_error, Reference, SchemeKind};
//!
//! let problem = catalog::<f64>("rank1-sine").unwrap();
//! let sys = build_default_system(&problem.kernel, SchemeKind::COLLOCATION, 16).unwrap();
//! let x = min_norm_solution(&sys, &sys.project(&problem.y), 1e-10).unwrap();
//! let reference = Reference::standard(problem.domain()).unwrap();
//! assert!(l2_error(&x.function, &problem.x_dagger, &reference.grid) < 1e-6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod discretize;
pub mod error;
pub mod linalg;
pub mod problem;
pub mod quadrature;
pub mod regularize;
mod scalar;

pub use analysis::*;
pub use discretize::{
    apply_adjoint, build_default_system, build_system, default_inner_rule, estimate_epsilon, estimate_epsilon_with,
    project_data, read_matrix_csv, write_matrix_csv, CollocationNodes, DiscreteSystem, EpsilonConfig,
    ReferenceOperator, SchemeKind,
};
pub use error::{Error, Result};
pub use linalg::{
    min_positive_singular, pseudo_solve, solve_shifted, spectral_norm, svd, symmetric_eigen, Matrix, Metric, Svd,
    WeightedSpace,
};
pub use problem::{builtin_ids, catalog, Function, Kernel, TestProblem};
pub use quadrature::{composite_gauss, composite_trapezoid, gauss_legendre, Domain, QuadratureRule, Reference};
pub use regularize::{
    add_noise, choose_alpha, generalized_inverse, min_norm_solution, phi_eval, tikhonov_continuous_reference,
    tikhonov_discrete, NoiseSpec, PhiKind, Reconstruction, SourcePhi,
};
pub use scalar::Scalar;

pub type RealMatrix = Matrix<f64>;
pub type RealVector = Vec<f64>;
pub type RealFunction = Function<f64>;
pub type RealKernel = Kernel<f64>;
pub type RealRule = QuadratureRule<f64>;
pub type RealSystem = DiscreteSystem<f64>;
pub type RealProblem = TestProblem<f64>;
pub type RealSpace = WeightedSpace<f64>;
