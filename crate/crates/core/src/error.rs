use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = DseError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DseError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("gene index {index} out of range for domain `{domain}` ({len} options)")]
    IndexOutOfDomain {
        domain: String,
        index: usize,
        len: usize,
    },

    #[error("gene has {got} entries, search space has {expected} domains")]
    GeneLength { expected: usize, got: usize },

    #[error("search space has no `{0}` domain")]
    MissingDomain(&'static str),

    #[error("arithmetic overflow computing {0}")]
    ArithmeticOverflow(&'static str),

    #[error("parse error in {path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown synthetic workload kind `{0}`")]
    UnknownKind(String),

    #[error("workload `{workload}` needs {required} cells, hardware holds {capacity}")]
    InfeasibleMapping {
        workload: String,
        required: u64,
        capacity: u64,
    },

    #[error("workload `{0}` has no weights or MACs")]
    ZeroWorkload(String),

    #[error("aggregation over an empty list")]
    EmptyList,

    #[error("no cost data for technology node {0} nm")]
    UnknownTechNode(u32),

    #[error("design points differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("minimum distance to an empty set")]
    EmptySet,

    #[error("cannot select {requested} designs from a pool of {available}")]
    PoolTooSmall { requested: usize, available: usize },

    #[error("sampling exhausted: {accepted} feasible designs after {draws} draws (needed {needed})")]
    SamplingExhausted {
        accepted: usize,
        draws: usize,
        needed: usize,
    },

    #[error("search space has {size} points, enumeration cap is {cap}")]
    SpaceTooLarge { size: u128, cap: u128 },

    #[error("design point is not part of the landscape")]
    NotInLandscape,

    #[error("empty input")]
    EmptyInput,

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DseError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DseError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, err: &serde_json::Error) -> Self {
        DseError::Parse {
            path: path.into(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    /// Process exit code used by the CLI: 3 for infeasible or exhausted
    /// sampling, 2 for every configuration problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            DseError::SamplingExhausted { .. } | DseError::InfeasibleMapping { .. } => 3,
            _ => 2,
        }
    }
}
