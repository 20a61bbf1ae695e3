use thiserror::Error;

/// Errors produced across the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty register: a layout needs at least one subsystem")]
    EmptyLayout,
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("subsystem `{label}` has invalid dimension {dim}")]
    InvalidDimension { label: String, dim: usize },
    #[error("operator kind {kind} is not defined on dimension {dim}")]
    KindDimMismatch { kind: &'static str, dim: usize },
    #[error("subsystem index {index} out of range for a register of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("states and operators live on different layouts")]
    LayoutMismatch,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("empty subsystem selection")]
    EmptySelection,
    #[error("register does not match the model: {0}")]
    WrongRegister(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid pulse parameters: {0}")]
    InvalidPulse(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("zero-probability outcome requested")]
    ZeroProbability,
    #[error("cutoff {cutoff} too small: truncated norm deficit {deficit:.3e} exceeds {tolerance:.1e}")]
    CutoffInadequate { cutoff: usize, deficit: f64, tolerance: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
