use thiserror::Error;

/// Errors raised by the linear algebra, assembly and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty operand: {0}")]
    Empty(&'static str),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("iteration did not converge after {sweeps} sweeps")]
    NotConverged { sweeps: usize },
    #[error("matrix is not self-adjoint in the attached metric (asymmetry {asymmetry:e}, scale {scale:e})")]
    NotSelfAdjoint { asymmetry: f64, scale: f64 },
    #[error("matrix is not positive (semi)definite: {0}")]
    NotPositive(String),
    #[error("numerically zero operator")]
    NumericallyZero,
    #[error("inconsistent discrete data: residual {residual:e} exceeds {allowed:e}")]
    InconsistentData { residual: f64, allowed: f64 },
    #[error("source function evaluated outside the asymptotic regime (lambda = {0})")]
    OutsideAsymptoticRegime(f64),
    #[error("quadrature rule too coarse: {0}")]
    RuleTooCoarse(String),
    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),
    #[error("matrix dump: {0}")]
    Dump(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
