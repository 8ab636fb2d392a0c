use thiserror::Error;

use crate::tree::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node {id} is not in the tree (size {len})")]
    InvalidNode { id: usize, len: usize },

    #[error("parent relation has a cycle through node {0}")]
    Cycle(usize),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{bottom} is not below {top}; not a segment")]
    InvalidSegment { bottom: NodeId, top: NodeId },

    #[error("segments overlap at node {0}")]
    OverlappingSegments(NodeId),

    #[error("more than {cap} disjoint families; use the dynamic program")]
    CapExceeded { cap: usize },

    #[error("nodes {0} and {1} are comparable; expected an antichain")]
    NotAntichain(NodeId, NodeId),

    #[error("{child} is not an immediate successor of {node}")]
    NotImmediateSuccessor { node: NodeId, child: NodeId },

    #[error("node {0} is not covered by any antichain class")]
    Uncovered(NodeId),

    #[error("node {node} has {found} immediate successors, need {needed}")]
    TooFewSuccessors {
        node: NodeId,
        found: usize,
        needed: usize,
    },

    #[error("not an initial segment: {0}")]
    NotInitialSegment(String),

    #[error("conic solver failed: {0}")]
    Solver(String),

    #[error("no extension found: {0}")]
    NoExtension(String),

    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
