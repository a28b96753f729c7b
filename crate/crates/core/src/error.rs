use thiserror::Error;

/// Failure modes shared by every module. `code()` gives the stable identifier
/// written into reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("eigensolver did not converge")]
    FailsToConverge,
    #[error("ambiguous clustering: eigenvalues {0} and {1} are between tol and 2*tol apart")]
    AmbiguousClustering(String, String),
    #[error("zero is not an isolated cluster: {0}")]
    ZeroNotIsolated(String),
    #[error("eigenvalue {0} lies on the cut ray")]
    EigenvalueOnRay(String),
    #[error("potential frequency {0} exceeds 2K = {1}")]
    FrequencyOverflow(i64, i64),
    #[error("no closed-form tail: operator is not a constant shift of the Fourier multiplier")]
    NoClosedFormTail,
    #[error("fit design matrix is ill-conditioned (condition number {0:e})")]
    FitIllConditioned(f64),
    #[error("t grid point {0} is below the truncation window {1}")]
    TruncationWindowViolated(f64, f64),
    #[error("section is nonzero at the grid boundary")]
    SupportViolation,
    #[error("evolution solver tolerance not met: {0}")]
    SolverToleranceNotMet(String),
    #[error("trace index {0} is not within tolerance of an integer")]
    NonintegerIndex(f64),
    #[error("zero eigenvalue at an endpoint cannot be resolved: {0}")]
    EndpointZeroAmbiguous(String),
    #[error("t = {0} is outside the product region")]
    OutsideProductRegion(f64),
    #[error("beta = {0} is a pole of the family")]
    PoleAtBeta(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),
    #[error("dimension {0} is unsupported")]
    DimensionUnsupported(usize),
    #[error("invalid config at `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::FailsToConverge => "FAILS_TO_CONVERGE",
            Error::AmbiguousClustering(..) => "AMBIGUOUS_CLUSTERING",
            Error::ZeroNotIsolated(_) => "ZERO_NOT_ISOLATED",
            Error::EigenvalueOnRay(_) => "EIGENVALUE_ON_RAY",
            Error::FrequencyOverflow(..) => "FREQUENCY_OVERFLOW",
            Error::NoClosedFormTail => "NO_CLOSED_FORM_TAIL",
            Error::FitIllConditioned(_) => "FIT_ILL_CONDITIONED",
            Error::TruncationWindowViolated(..) => "TRUNCATION_WINDOW_VIOLATED",
            Error::SupportViolation => "SUPPORT_VIOLATION",
            Error::SolverToleranceNotMet(_) => "SOLVER_TOLERANCE_NOT_MET",
            Error::NonintegerIndex(_) => "NONINTEGER_INDEX",
            Error::EndpointZeroAmbiguous(_) => "ENDPOINT_ZERO_AMBIGUOUS",
            Error::OutsideProductRegion(_) => "OUTSIDE_PRODUCT_REGION",
            Error::PoleAtBeta(_) => "POLE_AT_BETA",
            Error::QuadratureNotConverged(_) => "QUADRATURE_NOT_CONVERGED",
            Error::DimensionUnsupported(_) => "DIMENSION_UNSUPPORTED",
            Error::ConfigInvalid { .. } => "CONFIG_INVALID",
            Error::Io(_) => "IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
