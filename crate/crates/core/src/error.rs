use thiserror::Error;

use crate::nodeset::NodeSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node count {0} outside supported range 1..={max}", max = crate::nodeset::MAX_NODES)]
    InvalidNodeCount(usize),
    #[error("node {node} has a parent set {set} referring to nodes outside 0..{n}")]
    NodeOutOfRange { node: usize, set: NodeSet, n: usize },
    #[error("node {0} lists itself as a parent")]
    SelfParent(usize),
    #[error("node {node}: duplicate parent set {set}")]
    DuplicateParentSet { node: usize, set: NodeSet },
    #[error("node {0}: the empty parent set is missing")]
    MissingEmptySet(usize),
    #[error("node {node}: non-finite score for parent set {set}")]
    NonFiniteScore { node: usize, set: NodeSet },
    #[error("node {node}: parent set {set} is not a potential parent set")]
    MissingParentSet { node: usize, set: NodeSet },
    #[error("the graph contains a directed cycle")]
    CyclicGraph,
    #[error("not a permutation of 0..{0}")]
    InvalidOrder(usize),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("score table would hold more than {cap} entries")]
    TooManyEntries { cap: usize },

    #[error("instance too large: {what} is {value}, cap is {cap}")]
    InstanceTooLarge {
        what: &'static str,
        value: String,
        cap: String,
    },
    #[error("block size k={k} is invalid for n={n} (need even k with 2 <= k <= n)")]
    InvalidK { n: usize, k: usize },
    #[error("index {0} out of range")]
    IndexOutOfRange(String),
    #[error("{0} is not a downset of the partial order")]
    NotADownset(NodeSet),
    #[error("search domain of size {m} exceeds the simulator cap {cap}")]
    DomainTooLarge { m: usize, cap: usize },
    #[error("strategy unavailable: {0}")]
    StrategyUnavailable(String),
}
