use std::fmt;

use thiserror::Error;

use crate::graph::{EdgeId, NodeId};
use crate::types::ObjectType;

/// A syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError { line, col, msg: msg.into() }
    }
}

/// Errors raised while building or composing hypernets.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("{atom} is not available in {mode} mode")]
    ModeMismatch { atom: String, mode: String },
    #[error("interface length mismatch: {left} vs {right}")]
    InterfaceLength { left: usize, right: usize },
    #[error("interface type mismatch at position {pos}: {left} vs {right}")]
    InterfaceType { pos: usize, left: ObjectType, right: ObjectType },
    #[error("generator name `{0}` clashes with a structural label")]
    ReservedName(String),
    #[error("invalid operand: {0}")]
    Invalid(String),
    #[error("no node {0}")]
    MissingNode(NodeId),
    #[error("no edge {0}")]
    MissingEdge(EdgeId),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
