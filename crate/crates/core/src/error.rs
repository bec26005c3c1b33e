use thiserror::Error;

use crate::scenario::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension must be positive")]
    EmptyDimension,
    #[error("matrix is not square ({rows} rows, row of length {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("vector has zero norm")]
    ZeroNorm,
    #[error("operator is not unitary: max |U†U - I| = {defect:e} > {tol:e}")]
    NotUnitary { defect: f64, tol: f64 },
    #[error("operator is not hermitian: max |B - B†| = {defect:e} > {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("vector is not an eigenvector of the observable (residual {residual:e})")]
    NotAnEigenvector { residual: f64 },

    #[error("invalid scenario: {}", summarize(.0))]
    InvalidScenario(Vec<Diagnostic>),
    #[error("unknown built-in scenario `{0}`")]
    UnknownBuiltin(String),
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("path count {count} exceeds the cap of {cap}")]
    PathCapExceeded { count: u128, cap: usize },
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("functional does not match the path set: {0}")]
    FunctionalMismatch(String),

    #[error("post-selection probability vanishes; the conditional mean is undefined")]
    UndefinedConditionalMean,
    #[error("total transition amplitude vanishes; weak values are undefined")]
    VanishingTransitionAmplitude,
    #[error("post-selected pointer state has vanishing norm")]
    DegeneratePointerNorm,
    #[error("no successful post-selections among {trials} trials")]
    NoSuccessfulTrials { trials: u64 },

    #[error("invalid meter: {0}")]
    InvalidMeter(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn summarize(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UndefinedConditionalMean
            | Error::VanishingTransitionAmplitude
            | Error::DegeneratePointerNorm
            | Error::NoSuccessfulTrials { .. } => 3,
            Error::NumericalFailure(_) => 4,
            _ => 2,
        }
    }
}
