//! Routing of modular agents over weighted directed graphs.
//!
//! Agents that traverse the same edge in the same timestep pay for it once.
//! The force-based heuristic in [`engine`] trades individual path optimality
//! against the savings of travelling together; [`baseline`] and [`oracle`]
//! provide the non-modular comparison and an exact solver for tiny instances.

pub mod baseline;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod graph;
pub mod mission;
pub mod oracle;
pub mod paths;

pub use error::GraphError;
pub use graph::{Edge, Graph, NodeId};
pub use mission::{validate, Diagnostic, Mission};
pub use paths::{dijkstra, path_weight, yen_k_shortest, Path, PathSet};
