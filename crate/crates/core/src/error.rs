use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid and/xor tree: {0}")]
    InvalidTree(ValidationReport),

    #[error("too many possible worlds: reached {reached}, limit is {limit}")]
    TooManyWorlds { reached: usize, limit: usize },

    #[error("answer space too large: {cardinality} candidates, limit is {limit}")]
    SpaceTooLarge { cardinality: u128, limit: u128 },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("unknown tuple alternative ({key}, {value})")]
    UnknownAlternative { key: String, value: String },

    #[error("value of key `{0}` is not numeric")]
    NonNumericValue(String),

    #[error("keys must be distinct, got `{0}` twice")]
    SameKey(String),

    #[error("need at least {needed} keys, the relation has {available}")]
    NotEnoughKeys { needed: usize, available: usize },

    #[error("k must be at least 1")]
    ZeroK,

    #[error("tree is not {0}")]
    WrongModel(&'static str),

    #[error("truncation bound for variable {0} must be at least 1")]
    ZeroTruncation(usize),

    #[error("variable count {0} out of range 1..=3")]
    VariableCount(usize),

    #[error("variable index {index} out of range for {count} variables")]
    VariableIndex { index: usize, count: usize },

    #[error("bad BID input: {0}")]
    Bid(String),

    #[error("bad group matrix: {0}")]
    GroupMatrix(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("assignment instance has {positions} positions but only {agents} agents")]
    TooFewAgents { positions: usize, agents: usize },

    #[error("non-finite profit at agent {agent}, position {position}")]
    NonFiniteProfit { agent: usize, position: usize },

    #[error("edge {edge}: lower bound {lower} exceeds upper bound {upper}")]
    BadBounds { edge: usize, lower: i64, upper: i64 },

    #[error("flow network is infeasible")]
    Infeasible,

    #[error("flow network has a negative-cost cycle")]
    NegativeCycle,

    #[error("mismatched list lengths: k = {k}, lists of length {left} and {right}")]
    MismatchedK { k: usize, left: usize, right: usize },

    #[error("duplicate item `{0}` in list")]
    DuplicateItem(String),

    #[error("metric `{metric}` does not apply to {query} queries")]
    MetricMismatch { metric: String, query: String },

    #[error("answer does not fit the query: {0}")]
    BadAnswer(String),

    #[error("{0} answer space is continuous; exhaustive search is not defined")]
    ContinuousSpace(&'static str),

    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("malformed node at {path}: {message}")]
    Structure { path: String, message: String },

    #[error("CSV error: {0}")]
    Csv(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}
