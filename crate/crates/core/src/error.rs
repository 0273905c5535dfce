use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("query point {point:?} is outside the grid box")]
    OutOfRange { point: Vec<f64> },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid time index ({day}, {step})")]
    InvalidIndex { day: usize, step: usize },

    #[error("tariff slot {0} is out of range")]
    TariffSlot(usize),

    #[error("invalid periodicity classes: {0}")]
    InvalidClasses(String),

    #[error("insufficient data for (class, slot) cells: {0:?}")]
    InsufficientData(Vec<(usize, usize)>),

    #[error("scenario {scenario} has {got} days, horizon needs {needed}")]
    ScenarioTooShort {
        scenario: usize,
        got: usize,
        needed: usize,
    },

    #[error("scenario tree too large: {nodes} nodes (limit {limit})")]
    TreeTooLarge { nodes: u64, limit: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
