use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("no edges")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge {src} -> {dst} has invalid weight {weight}; weights must be finite and > 0")]
    InvalidWeight {
        src: NodeId,
        dst: NodeId,
        weight: f64,
    },
    #[error("edge {src} -> {dst} given twice with conflicting weights {first} and {second}")]
    ConflictingDuplicate {
        src: NodeId,
        dst: NodeId,
        first: f64,
        second: f64,
    },
    #[error("edge {src} -> {dst} references a node outside [0, {node_count})")]
    NodeOutOfRange {
        src: NodeId,
        dst: NodeId,
        node_count: usize,
    },
    #[error("edge {edge} has no `{attr}` attribute")]
    MissingWeight { edge: String, attr: String },
    #[error("edge {edge} has non-numeric `{attr}` value {value:?}")]
    NonNumericWeight {
        edge: String,
        attr: String,
        value: String,
    },
    #[error("malformed GraphML: {0}")]
    GraphMl(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive search: {0}")]
    LimitExceeded(String),
    #[error("invalid mission: {0}")]
    InvalidMission(String),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("cannot place {agents} distinct starts and {targets} targets on {nodes} nodes")]
    TooManyNodes {
        agents: usize,
        targets: usize,
        nodes: usize,
    },
    #[error("no feasible mission after {0} attempts")]
    Infeasible(usize),
    #[error("unknown node label {0:?}")]
    UnknownLabel(String),
    #[error("parameter grid must be non-empty")]
    EmptyGrid,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("failed to write CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
