use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::graph::{Graph, NodeId};
use crate::paths::dijkstra;

/// One problem instance: agents start at `starts`, and every node in
/// `targets` must be visited by at least one of them.
#[derive(Debug, Clone)]
pub struct Mission {
    pub graph: Arc<Graph>,
    pub starts: Vec<NodeId>,
    pub targets: BTreeSet<NodeId>,
}

impl Mission {
    pub fn new(
        graph: Arc<Graph>,
        starts: impl IntoIterator<Item = NodeId>,
        targets: impl IntoIterator<Item = NodeId>,
    ) -> Self {
        Mission {
            graph,
            starts: starts.into_iter().collect(),
            targets: targets.into_iter().collect(),
        }
    }

    /// Stable hex digest of the starts and target set. Used to show that
    /// different runs shared the same instance.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.graph.node_count() as u64).to_le_bytes());
        for s in &self.starts {
            h.update((s.0 as u64).to_le_bytes());
        }
        h.update(u64::MAX.to_le_bytes());
        for t in &self.targets {
            h.update((t.0 as u64).to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    NoStarts,
    NoTargets,
    StartOutOfRange {
        agent: usize,
        node: NodeId,
        node_count: usize,
    },
    TargetOutOfRange {
        node: NodeId,
        node_count: usize,
    },
    UnreachableTarget {
        node: NodeId,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NoStarts => write!(f, "mission has no agents"),
            Diagnostic::NoTargets => write!(f, "mission has no targets"),
            Diagnostic::StartOutOfRange {
                agent,
                node,
                node_count,
            } => write!(
                f,
                "agent {agent} starts at node {node}, outside the graph's {node_count} nodes"
            ),
            Diagnostic::TargetOutOfRange { node, node_count } => {
                write!(f, "target {node} is outside the graph's {node_count} nodes")
            }
            Diagnostic::UnreachableTarget { node } => {
                write!(f, "target {node} is unreachable from every start")
            }
        }
    }
}

/// Checks the mission invariants; an empty list means the mission is valid.
pub fn validate(mission: &Mission) -> Vec<Diagnostic> {
    let g = &mission.graph;
    let m = g.node_count();
    let mut out = Vec::new();
    if mission.starts.is_empty() {
        out.push(Diagnostic::NoStarts);
    }
    if mission.targets.is_empty() {
        out.push(Diagnostic::NoTargets);
    }
    for (agent, &node) in mission.starts.iter().enumerate() {
        if !g.contains(node) {
            out.push(Diagnostic::StartOutOfRange {
                agent,
                node,
                node_count: m,
            });
        }
    }
    let mut reachable = vec![false; m];
    for &s in mission.starts.iter().filter(|&&s| g.contains(s)) {
        let tree = dijkstra(g, s);
        for v in g.nodes() {
            reachable[v.0] |= tree.distance(v).is_finite();
        }
    }
    for &t in &mission.targets {
        if !g.contains(t) {
            out.push(Diagnostic::TargetOutOfRange {
                node: t,
                node_count: m,
            });
        } else if !reachable[t.0] {
            out.push(Diagnostic::UnreachableTarget { node: t });
        }
    }
    out
}
