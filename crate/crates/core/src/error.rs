use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {vertex} is not in a graph with {count} vertices")]
    InvalidVertex { vertex: u64, count: u64 },

    #[error("neighbor index {index} out of range for degree {degree}")]
    NeighborOutOfRange { index: u64, degree: u64 },

    #[error("explicit landscape has no depth for vertex {0}")]
    MissingDepth(u64),

    #[error("invalid landscape: {0}")]
    InvalidLandscape(String),

    #[error("inadmissible scales: alpha*beta = {product} >= sqrt(2 log 2) = {bound}")]
    Inadmissible { product: f64, bound: f64 },

    #[error("scale {name} overflows f64 (log value {log_value})")]
    ScaleOverflow { name: &'static str, log_value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("levels out of order: need {0}")]
    Ordering(String),

    #[error("step budget of {budget} exhausted before reaching the stop level")]
    BudgetExhausted { budget: u64 },

    #[error("trace has no deep-trap events")]
    NoDeepEvents,

    #[error("empty sample")]
    EmptySample,

    #[error("graph too large for exact computation: {count} vertices (limit {limit})")]
    GraphTooLarge { count: u64, limit: u64 },

    #[error("singular system: absorbing set unreachable from vertex {0}")]
    Singular(u64),

    #[error("vertex {0} belongs to the absorbing set")]
    StartAbsorbed(u64),

    #[error("grid spacing {spacing} is coarser than delta {delta}")]
    CoarseGrid { spacing: f64, delta: f64 },
}
