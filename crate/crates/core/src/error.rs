use alloc::string::String;

pub type Result<T, E = IcpError> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IcpError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("non-numeric or non-finite value in column `{column}` at row {row}")]
    NonNumericValue { column: String, row: usize },
    #[error("dataset needs at least two rows")]
    SingleRow,
    #[error("duplicate column name `{0}`")]
    DuplicateName(String),
    #[error("ragged table: row {row} has {got} cells, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("dataset has no predictor columns")]
    NoPredictors,
    #[error("invalid environment partition: {0}")]
    InvalidPartition(String),
    #[error("cutpoints must be finite and strictly increasing")]
    InvalidCutpoints,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("too few rows: need {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("too few samples for the test: need {needed} per sample, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("argument outside the domain: {0}")]
    DomainError(&'static str),
    #[error("environment {env} is too small for the requested test")]
    EnvironmentTooSmall { env: usize },
    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),
    #[error("node {0} is the target and cannot be intervened on")]
    TargetIntervened(usize),
    #[error("grid has {points} points, limit is {limit}")]
    GridTooLarge { points: f64, limit: f64 },
    #[error("exhaustive search supports at most {limit} variables, got {got}")]
    TooManyVariables { got: usize, limit: usize },
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
}
