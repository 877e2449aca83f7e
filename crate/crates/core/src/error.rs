use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("negative scale factor {0}")]
    NegativeScale(f64),

    #[error("{0} is not a dyadic rational at the model resolution")]
    NotDyadic(f64),

    #[error("sets or partitions belong to different space models")]
    SpaceMismatch,

    #[error("invalid measurable set: {0}")]
    InvalidSet(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("set function `{0}` is not declared monotone")]
    NotMonotone(String),

    #[error("set function `{0}` is not integrable")]
    NotIntegrable(String),

    #[error("gauge requires cells finer than depth {max_depth}")]
    GaugeTooFine { max_depth: u32 },

    #[error("tail mass {mass} does not vanish along the countable partition")]
    TailMassNotSummable { mass: f64 },

    #[error("finite space of size {n} exceeds the limit {max}")]
    TooLarge { n: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown theorem id `{0}`")]
    UnknownTheorem(String),

    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("invalid catalog: {0}")]
    Catalog(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
