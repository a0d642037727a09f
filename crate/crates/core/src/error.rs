use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error(
        "graph is disconnected: component {component:?} (0-based) is not reachable from node 0"
    )]
    Disconnected { component: Vec<usize> },

    #[error("self-loop at node {0} (0-based)")]
    SelfLoop(usize),

    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("invalid graph parameters: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error(
        "partition is not equitable: in cell {cell}, node {u} has {count_u} neighbours in cell {target} \
         but node {v} has {count_v}"
    )]
    NotEquitable {
        cell: usize,
        u: usize,
        v: usize,
        target: usize,
        count_u: usize,
        count_v: usize,
    },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error(
        "exact chain with N = {n} nodes has 3^{n} states, above the cap of N = {cap}; use the stochastic simulator"
    )]
    StateSpaceTooLarge { n: usize, cap: usize },

    #[error("state index {index} out of range [0, 3^{n})")]
    IndexOutOfRange { index: u64, n: usize },

    #[error("invalid network configuration: {0}")]
    InvalidConfiguration(String),

    #[error("above fast-extinction threshold: beta/delta = {tau} >= 1/lambda1 = {limit}")]
    AboveFastExtinctionThreshold { tau: f64, limit: f64 },

    #[error("Ā not diagonalizable under this test: -gamma = {gamma_neg} is within {margin:e} of eigenvalue {eigenvalue} of beta*A - delta*I")]
    SpectrumCollision {
        gamma_neg: f64,
        eigenvalue: f64,
        margin: f64,
    },

    #[error("below threshold (tau = {tau} <= tau_c = {tau_c}); unique equilibrium is DFE")]
    BelowThreshold { tau: f64, tau_c: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
