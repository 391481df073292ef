use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("metric is degenerate at {point:?}")]
    DegenerateMetric { point: Vec<f64> },

    #[error("distribution is degenerate at {point:?}: |g(v,v)| = {norm:e} below floor")]
    DegenerateDistribution { point: Vec<f64>, norm: f64 },

    #[error("non-finite value while evaluating {what} at {point:?}")]
    NonFinite { what: String, point: Vec<f64> },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("invalid scenario at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("declared contorsion class `{declared}` contradicted: deviation {deviation:e}")]
    MisdeclaredClass { declared: String, deviation: f64 },

    #[error("operation requires a codimension-one distribution (p = 1, eps_N = +1), got p = {0}")]
    NotCodimensionOne(usize),

    #[error("precondition `{predicate}` violated for identity {id} (deviation {deviation:e})")]
    Precondition {
        id: String,
        predicate: String,
        deviation: f64,
    },

    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),

    #[error("identity {id} is {kind}, not usable here")]
    WrongKind { id: String, kind: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("scenario is not closed; integral formulas need a closed manifold")]
    NotClosed,

    #[error("leaf is not a coordinate slice: {0}")]
    UnsupportedLeaf(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("sample set is empty")]
    EmptySample,

    #[error("rank mismatch: {0}")]
    RankMismatch(String),

    #[error("evaluation failed at node {node}: {source}")]
    AtNode {
        node: usize,
        #[source]
        source: Box<GeomError>,
    },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
