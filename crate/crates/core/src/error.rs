use thiserror::Error;

/// Errors raised by the numerical kernels and the scenario pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("eigensolver did not converge (relative residual {residual:e})")]
    EigenNoConvergence { residual: f64 },

    #[error("quadrature hit the subdivision cap: estimate {estimate:e}, error bound {error:e}")]
    QuadratureCap { estimate: f64, error: f64 },

    #[error("positivity lost at t = {t:e} (denominator {denominator:e})")]
    Positivity { t: f64, denominator: f64 },

    #[error("singular point: |denominator| = {0:e}")]
    SingularPoint(f64),

    #[error("operator is not positive definite (smallest eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("fock basis dimension {dim} exceeds the cap {cap}")]
    BasisTooLarge { dim: usize, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
