use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("metric is not positive definite at {point:?} (min eigenvalue {min_eig:e})")]
    NonPositiveMetric { point: Vec<f64>, min_eig: f64 },
    #[error("sectional curvature requested for a degenerate plane")]
    DegeneratePlane,
    #[error("immersion is degenerate at {point:?}")]
    DegenerateImmersion { point: Vec<f64> },
    #[error("hypersurface is not convex: principal curvature {lambda:e} at {point:?}")]
    NotConvex { point: Vec<f64>, lambda: f64 },
    #[error("derivative mode cannot deliver order-{order} derivatives")]
    InsufficientSmoothness { order: usize },
    #[error("tensor is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },
    #[error("coefficient tensor is not symmetric (asymmetry {asymmetry:e} on element {element})")]
    NonSymmetricCoefficient { element: usize, asymmetry: f64 },
    #[error("degenerate element {element}: {reason}")]
    DegenerateElement { element: usize, reason: String },
    #[error("sparse factorization failed: {0}")]
    FactorizationFailure(String),
    #[error("eigensolver did not converge after {restarts} restarts (best residual {residual:e}, best value {best_value})")]
    NoConvergence { restarts: usize, residual: f64, best_value: f64 },
    #[error("Schouten tensor is undefined in dimension {n}")]
    SchoutenUndefined { n: usize },
    #[error("bound denominator R - 2 L0 = {value} is not positive")]
    DenominatorNonpositive { value: f64 },
    #[error("dimension {n} is below the required minimum {min}")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("mesh format error at line {line}: {message}")]
    MeshFormat { line: usize, message: String },
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("suite failure: {}", .failures.join("; "))]
    SuiteFailure { failures: Vec<String> },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, used when failures are listed in summaries.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPositiveMetric { .. } => "NonPositiveMetric",
            Error::DegeneratePlane => "DegeneratePlane",
            Error::DegenerateImmersion { .. } => "DegenerateImmersion",
            Error::NotConvex { .. } => "NotConvex",
            Error::InsufficientSmoothness { .. } => "InsufficientSmoothness",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NonSymmetricCoefficient { .. } => "NonSymmetricCoefficient",
            Error::DegenerateElement { .. } => "DegenerateElement",
            Error::FactorizationFailure(_) => "FactorizationFailure",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SchoutenUndefined { .. } => "SchoutenUndefined",
            Error::DenominatorNonpositive { .. } => "DenominatorNonpositive",
            Error::DimensionTooSmall { .. } => "DimensionTooSmall",
            Error::InvalidInput(_) => "InvalidInput",
            Error::MeshFormat { .. } => "MeshFormat",
            Error::ConfigParse(_) => "ConfigParse",
            Error::SuiteFailure { .. } => "SuiteFailure",
            Error::Io(_) => "Io",
        }
    }

    /// Process exit code: 1 assertion failure, 2 usage or input error,
    /// 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SuiteFailure { .. } => 1,
            Error::InvalidInput(_)
            | Error::MeshFormat { .. }
            | Error::NonSymmetricCoefficient { .. }
            | Error::DegenerateElement { .. }
            | Error::ConfigParse(_)
            | Error::Io(_)
            | Error::DimensionTooSmall { .. }
            | Error::SchoutenUndefined { .. }
            | Error::DenominatorNonpositive { .. } => 2,
            _ => 3,
        }
    }
}
