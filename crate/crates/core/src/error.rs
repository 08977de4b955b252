use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a probability law: {0}")]
    NonProbability(String),
    #[error("positivity violation: {0}")]
    PositivityViolation(String),
    #[error("law has no strata")]
    EmptyStrata,
    #[error("invalid sample size {0}")]
    InvalidSampleSize(usize),
    #[error("observed law is not compatible with the IV model (phase-one residual {residual:.3e}): {detail}")]
    InfeasibleLaw { residual: f64, detail: String },
    #[error("infeasible sensitivity parameter: {0}")]
    InfeasibleGamma(String),
    #[error("stratum {0} has zero weight")]
    ZeroStratumWeight(String),
    #[error("missing bounds: {0}")]
    MissingBounds(String),
    #[error("singular design: {0}")]
    SingularDesign(String),
    #[error("IRLS did not converge after {iterations} iterations (deviance change {change:.3e})")]
    NonConvergence { iterations: usize, change: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("overlap violation: {0}")]
    OverlapViolation(String),
    #[error("estimated bounds cross: lower {lo} > upper {up}")]
    CrossedBounds { lo: f64, up: f64 },
    #[error("no root for the critical-value equation in [0, 10]")]
    NoRoot,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{}", match .line { Some(l) => format!("schema error at line {l}: {msg}"), None => format!("schema error: {msg}") })]
    Schema { line: Option<u64>, msg: String },
    #[error("internal consistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn schema(line: Option<u64>, msg: impl Into<String>) -> Self {
        Error::Schema { line, msg: msg.into() }
    }

    /// Process exit code: 2 for bad input, 3 for numeric or audit failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonProbability(_)
            | Error::PositivityViolation(_)
            | Error::EmptyStrata
            | Error::InvalidSampleSize(_)
            | Error::InfeasibleGamma(_)
            | Error::ZeroStratumWeight(_)
            | Error::MissingBounds(_)
            | Error::InsufficientData(_)
            | Error::InvalidInput(_)
            | Error::Schema { .. }
            | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        let line = if e.line() > 0 { Some(e.line() as u64) } else { None };
        Error::Schema { line, msg: e.to_string() }
    }
}
