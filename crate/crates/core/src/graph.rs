//! Weighted directed graph with implicit zero-cost self-loops.
//!
//! Nodes are dense indices in `[0, m)`. Each node keeps its out-edges and
//! in-edges sorted by neighbor id so lookups and iteration order are
//! deterministic.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

mod edge_list;
mod graphml;

pub use edge_list::{load_edge_list, to_edge_list};
pub use graphml::{load_graphml, parse_graphml, to_graphml, DEFAULT_WEIGHT_ATTR};

/// Dense node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(v)
    }
}

/// A stored directed edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub weight: f64,
}

/// Immutable weighted digraph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    out: Vec<Vec<(NodeId, f64)>>,
    inc: Vec<Vec<(NodeId, f64)>>,
    labels: Vec<String>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from explicit edges over `node_count` nodes.
    ///
    /// Self-loops are dropped (waiting is modelled implicitly). A repeated
    /// `(src, dst)` pair with an identical weight is collapsed; a conflicting
    /// weight is rejected.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, GraphError> {
        let mut builder = GraphBuilder::new(node_count);
        for e in edges {
            builder.add(e, DuplicatePolicy::Reject)?;
        }
        Ok(builder.finish())
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    /// Number of stored (non-self-loop) directed edges.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.0 < self.node_count()
    }

    /// Out-neighbors of `v` in ascending id order, with edge weights.
    pub fn out_edges(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.out[v.0]
    }

    /// In-neighbors of `v` in ascending id order, with edge weights.
    pub fn in_edges(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.inc[v.0]
    }

    /// Weight of the stored edge `src -> dst`, if present.
    pub fn weight(&self, src: NodeId, dst: NodeId) -> Option<f64> {
        let adj = self.out.get(src.0)?;
        adj.binary_search_by_key(&dst, |&(d, _)| d)
            .ok()
            .map(|i| adj[i].1)
    }

    /// All stored edges, ordered by `(src, dst)`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.out.iter().enumerate().flat_map(|(s, adj)| {
            adj.iter().map(move |&(dst, weight)| Edge {
                src: NodeId(s),
                dst,
                weight,
            })
        })
    }

    /// External identifier of a node (the original token or GraphML id).
    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Looks a node up by its external label.
    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label).map(NodeId)
    }

    pub(crate) fn with_labels(mut self, labels: Vec<String>) -> Self {
        debug_assert_eq!(labels.len(), self.node_count());
        self.labels = labels;
        self
    }

    /// 4-connected `width x height` grid with symmetric weights drawn
    /// uniformly from `[0.5, 1.5)`, rounded to 1e-3.
    pub fn grid(width: usize, height: usize, seed: u64) -> Result<Self, GraphError> {
        use rand::{Rng, SeedableRng};

        if width == 0 || height == 0 {
            return Err(GraphError::Empty);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let id = |x: usize, y: usize| NodeId(y * width + x);
        let mut edges = Vec::new();
        for y in 0..height {
            for x in 0..width {
                let mut link = |a: NodeId, b: NodeId| {
                    let w = (rng.random_range(500..1500) as f64) / 1000.0;
                    edges.push(Edge {
                        src: a,
                        dst: b,
                        weight: w,
                    });
                    edges.push(Edge {
                        src: b,
                        dst: a,
                        weight: w,
                    });
                };
                if x + 1 < width {
                    link(id(x, y), id(x + 1, y));
                }
                if y + 1 < height {
                    link(id(x, y), id(x, y + 1));
                }
            }
        }
        Graph::from_edges(width * height, edges)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DuplicatePolicy {
    /// Identical duplicates collapse; conflicting weights are an error.
    Reject,
    /// Parallel edges collapse to the minimum weight.
    KeepMin,
}

pub(crate) struct GraphBuilder {
    node_count: usize,
    edges: BTreeMap<(NodeId, NodeId), f64>,
}

impl GraphBuilder {
    pub(crate) fn new(node_count: usize) -> Self {
        GraphBuilder {
            node_count,
            edges: BTreeMap::new(),
        }
    }

    pub(crate) fn add(&mut self, e: Edge, policy: DuplicatePolicy) -> Result<(), GraphError> {
        if e.src.0 >= self.node_count || e.dst.0 >= self.node_count {
            return Err(GraphError::NodeOutOfRange {
                src: e.src,
                dst: e.dst,
                node_count: self.node_count,
            });
        }
        if !e.weight.is_finite() {
            return Err(GraphError::InvalidWeight {
                src: e.src,
                dst: e.dst,
                weight: e.weight,
            });
        }
        if e.src == e.dst {
            log::warn!("ignoring explicit self-loop at node {}", e.src);
            return Ok(());
        }
        if e.weight <= 0.0 {
            return Err(GraphError::InvalidWeight {
                src: e.src,
                dst: e.dst,
                weight: e.weight,
            });
        }
        match self.edges.get_mut(&(e.src, e.dst)) {
            None => {
                self.edges.insert((e.src, e.dst), e.weight);
            }
            Some(w) if *w == e.weight => {}
            Some(w) => match policy {
                DuplicatePolicy::Reject => {
                    return Err(GraphError::ConflictingDuplicate {
                        src: e.src,
                        dst: e.dst,
                        first: *w,
                        second: e.weight,
                    })
                }
                DuplicatePolicy::KeepMin => {
                    log::warn!(
                        "parallel edges {} -> {} ({} and {}); keeping the minimum",
                        e.src,
                        e.dst,
                        w,
                        e.weight
                    );
                    *w = w.min(e.weight);
                }
            },
        }
        Ok(())
    }

    pub(crate) fn finish(self) -> Graph {
        let m = self.node_count;
        let mut out = vec![Vec::new(); m];
        let mut inc = vec![Vec::new(); m];
        // BTreeMap order is (src, dst), so `out` comes out sorted by dst.
        for (&(s, d), &w) in &self.edges {
            out[s.0].push((d, w));
            inc[d.0].push((s, w));
        }
        for adj in &mut inc {
            adj.sort_by_key(|&(s, _)| s);
        }
        Graph {
            out,
            inc,
            labels: (0..m).map(|i| i.to_string()).collect(),
            edge_count: self.edges.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: usize, d: usize, w: f64) -> Edge {
        Edge {
            src: NodeId(s),
            dst: NodeId(d),
            weight: w,
        }
    }

    #[test]
    fn adjacency_is_sorted_both_ways() {
        let g = Graph::from_edges(4, [e(0, 3, 1.0), e(0, 1, 2.0), e(2, 1, 3.0)]).unwrap();
        assert_eq!(
            g.out_edges(NodeId(0)),
            &[(NodeId(1), 2.0), (NodeId(3), 1.0)]
        );
        assert_eq!(g.in_edges(NodeId(1)), &[(NodeId(0), 2.0), (NodeId(2), 3.0)]);
        assert_eq!(g.weight(NodeId(2), NodeId(1)), Some(3.0));
        assert_eq!(g.weight(NodeId(1), NodeId(2)), None);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(
            Graph::from_edges(2, [e(0, 1, 0.0)]),
            Err(GraphError::InvalidWeight { .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, [e(0, 1, -1.0)]),
            Err(GraphError::InvalidWeight { .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, [e(0, 1, f64::NAN)]),
            Err(GraphError::InvalidWeight { .. })
        ));
    }

    #[test]
    fn duplicates() {
        let g = Graph::from_edges(2, [e(0, 1, 2.0), e(0, 1, 2.0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(matches!(
            Graph::from_edges(2, [e(0, 1, 2.0), e(0, 1, 3.0)]),
            Err(GraphError::ConflictingDuplicate { .. })
        ));

        let mut b = GraphBuilder::new(2);
        b.add(e(0, 1, 2.0), DuplicatePolicy::KeepMin).unwrap();
        b.add(e(0, 1, 1.5), DuplicatePolicy::KeepMin).unwrap();
        assert_eq!(b.finish().weight(NodeId(0), NodeId(1)), Some(1.5));
    }

    #[test]
    fn self_loops_are_implicit() {
        let g = Graph::from_edges(2, [e(0, 0, 5.0), e(0, 1, 1.0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(NodeId(0), NodeId(0)), None);
    }

    #[test]
    fn grid_shape() {
        let g = Graph::grid(8, 8, 3).unwrap();
        assert_eq!(g.node_count(), 64);
        // 2 * (7*8 + 8*7) directed edges
        assert_eq!(g.edge_count(), 224);
        for edge in g.edges() {
            assert!(edge.weight >= 0.5 && edge.weight < 1.5);
            assert_eq!(g.weight(edge.dst, edge.src), Some(edge.weight));
        }
        assert_eq!(g, Graph::grid(8, 8, 3).unwrap());
        assert_ne!(g, Graph::grid(8, 8, 4).unwrap());
    }
}
