use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("unknown role {0:?}")]
    UnknownRole(String),
    #[error("invalid batch: {0}")]
    InvalidBatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("empty window")]
    EmptyWindow,
    #[error("empty data")]
    EmptyData,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("feature count mismatch: model has {expected}, input has {found}")]
    FeatureMismatch { expected: usize, found: usize },
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("degenerate validation: validation labels hold a single class")]
    DegenerateValidation,
    #[error("degenerate labels: training labels hold a single class")]
    DegenerateLabels,
    #[error("AUC undefined: labels hold a single class")]
    AucUndefined,
    #[error("AUC undefined for batch {0}: labels hold a single class")]
    BatchAucUndefined(u32),
    #[error("empty history")]
    EmptyHistory,
    #[error("out-of-order batch: index {index} does not follow {latest}")]
    OutOfOrder { index: u32, latest: u32 },
    #[error("batch {0} has no labels")]
    Unlabeled(u32),
    #[error("no model has been trained yet")]
    NoModel,
}
