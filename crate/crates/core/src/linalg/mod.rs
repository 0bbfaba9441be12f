//! Dense real linear algebra over plain and weighted finite-dimensional
//! inner-product spaces.

mod eigen;
mod matrix;
mod metric;
mod solve;
mod svd;

pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use matrix::Matrix;
pub(crate) use metric::self_adjoint_tol;
pub use metric::{GramSpace, Metric, WeightedSpace};
pub use solve::{cholesky, cholesky_solve, pseudo_solve, solve_shifted};
pub use svd::{min_positive_singular, spectral_norm, svd, Svd};
