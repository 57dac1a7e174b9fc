use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pode sizes sum to {sum}, expected 1")]
    SizeSum { sum: f64 },

    #[error("probability matrix is not symmetric at ({i}, {j})")]
    Asymmetry { i: usize, j: usize },

    #[error("{what} out of range at ({i}, {j}): {value}")]
    Range {
        what: &'static str,
        i: usize,
        j: usize,
        value: f64,
    },

    #[error("pode count {n} outside [1, {max}]")]
    PodeCount { n: usize, max: usize },

    #[error("probability matrix has {found} rows/columns, expected {expected}")]
    Shape { expected: usize, found: usize },

    #[error("pattern has {vertices} vertices, at most {max} supported")]
    PatternTooLarge { vertices: usize, max: usize },

    #[error("invalid subgraph pattern: {0}")]
    InvalidPattern(String),

    #[error("parameter {name} = {value} outside its valid range")]
    ParamRange { name: &'static str, value: f64 },

    #[error("point ({eps}, {tau}) lies above the Erdős–Rényi curve")]
    AboveErCurve { eps: f64, tau: f64 },

    #[error("a = {a} and b = {b} are too close (Erdős–Rényi curve)")]
    DegenerateAb { a: f64, b: f64 },

    #[error("point ({eps}, {tau}) is not strictly interior to the feasible region")]
    NotInterior { eps: f64, tau: f64 },

    #[error("no sampled candidate within the constraint window")]
    NoCandidates,

    #[error("no {family} graphon meets the constraints")]
    FamilyInfeasible { family: String },

    #[error("point ({eps}, {tau}) is infeasible")]
    Infeasible { eps: f64, tau: f64 },

    #[error("need at least {needed} records, got {found}")]
    TooFewPoints { found: usize, needed: usize },

    #[error("the scanned window does not straddle a stability boundary")]
    BoundaryNotInWindow,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
