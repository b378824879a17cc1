use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cluster layout: {0}")]
    InvalidLayout(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("input is not a 0/1 adjacency matrix with unit diagonal: {0}")]
    NotAdjacency(String),

    #[error("infeasible sum constraint: target {target} exceeds the attainable maximum {max}")]
    InfeasibleSum { target: f64, max: f64 },

    #[error("required region size {region_size} exceeds n^2 = {max}")]
    RegionTooLarge { region_size: f64, max: f64 },

    #[error("symmetric eigendecomposition failed to converge")]
    Decomposition,

    #[error(
        "power iteration did not converge after {iterations} iterations (best estimate {estimate})"
    )]
    PowerIteration { iterations: usize, estimate: f64 },

    #[error("inconsistent block structure at nodes ({first}, {second}): {reason}")]
    InconsistentBlocks {
        first: usize,
        second: usize,
        reason: &'static str,
    },

    #[error("invalid solver configuration: {0}")]
    InvalidSolverConfig(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }
}
