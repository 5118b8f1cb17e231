use thiserror::Error;

/// Errors raised anywhere in the eigensolver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli label {label:?}: unexpected character {found:?} at position {position}")]
    PauliParse {
        label: String,
        position: usize,
        found: char,
    },

    #[error("empty Pauli label")]
    EmptyLabel,

    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("matrix dimension {0} is not a power of two of at least 2")]
    NotPowerOfTwo(usize),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("operator is not anti-Hermitian (deviation {0:e})")]
    NotAntiHermitian(f64),

    #[error("imaginary residue {0:e} exceeds tolerance")]
    ImaginaryResidue(f64),

    #[error("{what} = {value} exceeds the supported limit of {limit}")]
    SizeLimit {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("mode index {index} out of range 1..={n_modes}")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("invalid shot policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidOptimizer(String),

    #[error("objective returned non-finite value {value} at evaluation {evaluation} (x = {x:?})")]
    NonFiniteObjective {
        evaluation: usize,
        value: f64,
        x: Vec<f64>,
    },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    InvalidInput { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Coarse failure category, used by the command-line front end for exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse { .. }
            | Error::Json { .. }
            | Error::InvalidInput { .. }
            | Error::PauliParse { .. }
            | Error::EmptyLabel => ErrorCategory::Input,
            Error::Config(_) | Error::InvalidPolicy(_) | Error::InvalidOptimizer(_) => {
                ErrorCategory::Config
            }
            Error::Io { .. } => ErrorCategory::Io,
            _ => ErrorCategory::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    Config,
    Io,
    Numerical,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Input => 2,
            ErrorCategory::Config => 3,
            ErrorCategory::Io => 4,
            ErrorCategory::Numerical => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorCategory::Input => "input",
            ErrorCategory::Config => "config",
            ErrorCategory::Io => "io",
            ErrorCategory::Numerical => "numerical",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
