use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed network document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("link `{link}` references unknown node `{node}`")]
    DanglingEndpoint { link: String, node: String },

    #[error("link `{link}` must have a positive length, got {length}")]
    NonPositiveLength { link: String, length: f64 },

    #[error("link `{link}` is a self-loop on node `{node}`")]
    SelfLoop { link: String, node: String },

    #[error("invalid value for {field} on `{id}`: {value}")]
    InvalidField {
        id: String,
        field: &'static str,
        value: f64,
    },

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("unknown link `{0}`")]
    UnknownLink(String),

    #[error("unknown sensor `{0}`")]
    UnknownSensor(String),

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("influence csv: missing header row")]
    MissingHeader,

    #[error("influence csv: header must start with `event`, found `{0}`")]
    BadHeader(String),

    #[error("influence csv line {line}: expected {expected} cells, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("influence csv line {line}: cell `{value}` is not 0 or 1")]
    CellDomain { line: u64, value: String },

    #[error("sensor index {index} out of range for {sensors} sensors")]
    SensorIndexOutOfRange { index: usize, sensors: usize },

    #[error(
        "pairwise instance needs {cells} cells, above the cap of {cap}; use the augmented greedy solver"
    )]
    SizeGuard { cells: u128, cap: u128 },

    #[error("exhaustive search limited to {max} sensors, instance has {sensors}")]
    OracleGuard { sensors: usize, max: usize },

    #[error("score report needs at least one event")]
    EmptyEventSet,

    #[error("non-finite state at step {step}, grid point {index}")]
    NonFinite { step: usize, index: usize },

    #[error("unphysical head at step {step}, grid point {index}: (C_M + C_P)/2 = {value}")]
    UnphysicalHead {
        step: usize,
        index: usize,
        value: f64,
    },

    #[error("pipes have incompatible time steps: {first} s vs {other} s")]
    IncompatibleTimeStep { first: f64, other: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
