use thiserror::Error;

#[derive(Debug, Error)]
pub enum IsacError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error("nonpositive quantization variance {value} at {what} {index}")]
    NonPositiveQuantization {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("log argument {value:e} below floor in {context}")]
    LogFloor { context: String, value: f64 },

    #[error("degenerate transformed point: z = {0}")]
    DegenerateScale(f64),

    #[error("infeasible: constraint {constraint} cannot be met ({detail})")]
    Infeasible {
        constraint: &'static str,
        detail: String,
    },

    #[error("conic solver failed with status {0}")]
    Solver(String),

    #[error("objective decreased from {previous} to {current} at iteration {iteration}")]
    NonMonotone {
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("rank-one recovery rejected: {0}")]
    RankOneRejected(String),

    #[error("{0}")]
    Experiment(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, IsacError>;
