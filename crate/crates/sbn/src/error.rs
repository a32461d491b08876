//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by network construction, inference guards, and parsers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range for a network of {n_nodes} nodes")]
    NodeIndex { index: usize, n_nodes: usize },

    #[error("edge ({child}, {parent}) violates the parent-before-child order (parent index must be smaller)")]
    EdgeOrder { child: usize, parent: usize },

    #[error("duplicate edge ({child}, {parent})")]
    DuplicateEdge { child: usize, parent: usize },

    #[error("node {node} clamped more than once")]
    DuplicateEvidence { node: usize },

    #[error("non-finite value for {what}")]
    NonFinite { what: String },

    #[error("probability {value} outside {bounds}")]
    InvalidProbability { value: f64, bounds: &'static str },

    #[error("hidden set has {count} nodes; enumeration is limited to {limit}")]
    HiddenSetTooLarge { count: usize, limit: usize },

    #[error("node {node} has {count} parents; enumeration is limited to {limit}")]
    TooManyParents {
        node: usize,
        count: usize,
        limit: usize,
    },

    #[error("node {node} is visible; only hidden means can be updated")]
    VisibleNode { node: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("count must be positive: {0}")]
    ZeroCount(&'static str),

    #[error("layer sizes must be a nonempty list of positive counts")]
    BadLayers,

    #[error("invalid weight range [{lo}, {hi}]")]
    BadWeightRange { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
