use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed class file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("label out of range: {label} not in 1..={k}")]
    LabelOutOfRange { label: u32, k: u32 },

    #[error("ragged rows: row {row} has length {len}, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },

    #[error("hypothesis class is empty")]
    EmptyClass,

    #[error("coordinate index {index} out of range for n = {n}")]
    CoordOutOfRange { index: usize, n: usize },

    #[error("coordinate sequence is empty")]
    EmptyCoords,

    #[error("coordinate {0} repeated in a sequence that requires distinct coordinates")]
    RepeatedCoord(usize),

    #[error("invalid parameters: {0}")]
    InvalidParameter(String),

    #[error("exact search refused: {what} needs {needed}, cap is {cap}")]
    BudgetExceeded { what: &'static str, needed: u128, cap: u128 },

    #[error("orientation does not match graph: {0}")]
    OrientationMismatch(String),

    #[error("sample is not realizable by the hypothesis class")]
    NotRealizable,

    #[error("no weak subsample found after {attempts} attempts (subsample size {d} may be too small)")]
    NoWeakSubsample { attempts: usize, d: usize },

    #[error("invalid witness: {0}")]
    InvalidWitness(String),
}
