use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown atomic type `{0}`")]
    UnknownAtom(String),

    #[error("malformed type `{text}`: {reason}")]
    MalformedType { text: String, reason: String },

    #[error("no planar reduction of `{from}` to `{target}`")]
    NotReducible { from: String, target: String },

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("tensor order {0} exceeds the supported maximum of 4")]
    OrderTooLarge(usize),

    #[error("matrix has zero norm")]
    ZeroMatrix,

    #[error("empty input: {0}")]
    Empty(String),

    #[error("not enough eligible basis words: requested {requested}, found {found}")]
    NotEnoughBasisWords { requested: usize, found: usize },

    #[error("svd rank {rank} exceeds min(targets, contexts) = {max}")]
    RankTooLarge { rank: usize, max: usize },

    #[error("co-occurrence matrix is all zero")]
    DegenerateMatrix,

    #[error("singular value decomposition failed: {0}")]
    SvdFailed(String),

    #[error("regression diverged at epoch {epoch} (loss = {loss}); lower the learning rate")]
    Diverged { epoch: usize, loss: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("spearman correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("no matrix for verb `{verb}` ({method})")]
    MissingVerb { verb: String, method: String },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }
}
