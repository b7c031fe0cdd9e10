//! Dijkstra and Yen's k shortest loopless paths.
//!
//! Ties between equal-weight paths are broken by lexicographic node sequence
//! everywhere, so every query has a single well-defined answer.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("no edge {from} -> {to} at position {position} of the path")]
pub struct NotAdjacent {
    pub from: NodeId,
    pub to: NodeId,
    pub position: usize,
}

/// Sum of edge weights along `nodes`; 0 for a single node. Consecutive equal
/// nodes are not edges and are rejected.
pub fn path_weight(graph: &Graph, nodes: &[NodeId]) -> Result<f64, NotAdjacent> {
    nodes
        .windows(2)
        .enumerate()
        .try_fold(0.0, |acc, (position, w)| {
            graph
                .weight(w[0], w[1])
                .map(|x| acc + x)
                .ok_or(NotAdjacent {
                    from: w[0],
                    to: w[1],
                    position,
                })
        })
}

#[derive(Debug, Clone, Serialize)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub total_weight: f64,
}

impl Path {
    pub fn first_edge(&self) -> Option<(NodeId, NodeId)> {
        match self.nodes.as_slice() {
            [a, b, ..] => Some((*a, *b)),
            _ => None,
        }
    }

    pub fn is_loopless(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.nodes.len());
        self.nodes.iter().all(|v| seen.insert(*v))
    }

    fn order(&self, other: &Self) -> Ordering {
        self.total_weight
            .total_cmp(&other.total_weight)
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

impl PartialEq for Path {
    fn eq(&self, other: &Self) -> bool {
        self.order(other) == Ordering::Equal
    }
}

impl Eq for Path {}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Weight first, then node sequence.
impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order(other)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathSet {
    pub origin: NodeId,
    pub destination: NodeId,
    pub paths: Vec<Path>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Single-source shortest-path distances and predecessors.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    pub source: NodeId,
    dist: Vec<f64>,
    pred: Vec<Option<NodeId>>,
}

impl ShortestPathTree {
    /// `+inf` when unreachable.
    pub fn distance(&self, v: NodeId) -> f64 {
        self.dist[v.0]
    }

    pub fn predecessor(&self, v: NodeId) -> Option<NodeId> {
        self.pred[v.0]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    /// Node sequence from the source to `v` following predecessors.
    pub fn path_to(&self, v: NodeId) -> Option<Vec<NodeId>> {
        if !self.dist[v.0].is_finite() {
            return None;
        }
        let mut nodes = vec![v];
        let mut cur = v;
        while let Some(p) = self.pred[cur.0] {
            nodes.push(p);
            cur = p;
        }
        nodes.reverse();
        Some(nodes)
    }
}

pub fn dijkstra(graph: &Graph, src: NodeId) -> ShortestPathTree {
    let m = graph.node_count();
    let mut dist = vec![f64::INFINITY; m];
    let mut pred = vec![None; m];
    let mut done = vec![false; m];
    let mut heap = BinaryHeap::new();
    dist[src.0] = 0.0;
    heap.push(Reverse((Dist(0.0), src)));
    while let Some(Reverse((Dist(d), u))) = heap.pop() {
        if done[u.0] {
            continue;
        }
        done[u.0] = true;
        for &(v, w) in graph.out_edges(u) {
            let nd = d + w;
            if nd < dist[v.0] {
                dist[v.0] = nd;
                pred[v.0] = Some(u);
                heap.push(Reverse((Dist(nd), v)));
            }
        }
    }
    ShortestPathTree {
        source: src,
        dist,
        pred,
    }
}

/// Edges and nodes excluded from a spur search.
struct Bans<'a> {
    nodes: &'a [bool],
    edges: &'a HashSet<(NodeId, NodeId)>,
}

/// Lexicographically smallest among the minimum-weight `from -> to` paths that
/// avoid `bans`, or `None` if `to` is unreachable.
///
/// Runs Dijkstra backwards from `to`, then walks forward from `from` always
/// taking the smallest-id neighbor that stays on a shortest path.
fn lex_shortest_path(
    graph: &Graph,
    from: NodeId,
    to: NodeId,
    bans: &Bans<'_>,
) -> Option<Vec<NodeId>> {
    let m = graph.node_count();
    let mut dist = vec![f64::INFINITY; m];
    let mut settled = vec![false; m];
    let mut heap = BinaryHeap::new();
    dist[to.0] = 0.0;
    heap.push(Reverse((Dist(0.0), to)));
    while let Some(Reverse((Dist(d), v))) = heap.pop() {
        if settled[v.0] {
            continue;
        }
        settled[v.0] = true;
        if v == from {
            break;
        }
        for &(u, w) in graph.in_edges(v) {
            if bans.nodes[u.0] || bans.edges.contains(&(u, v)) {
                continue;
            }
            let nd = d + w;
            if nd < dist[u.0] {
                dist[u.0] = nd;
                heap.push(Reverse((Dist(nd), u)));
            }
        }
    }
    if !settled[from.0] {
        return None;
    }
    let mut nodes = vec![from];
    let mut cur = from;
    while cur != to {
        let next = graph
            .out_edges(cur)
            .iter()
            .find(|&&(u, w)| {
                settled[u.0]
                    && !bans.nodes[u.0]
                    && !bans.edges.contains(&(cur, u))
                    && w + dist[u.0] == dist[cur.0]
            })
            .map(|&(u, _)| u)
            .expect("settled node has a tight out-edge");
        nodes.push(next);
        cur = next;
    }
    Some(nodes)
}

fn make_path(graph: &Graph, nodes: Vec<NodeId>) -> Path {
    let total_weight = path_weight(graph, &nodes).expect("search only follows stored edges");
    Path {
        nodes,
        total_weight,
    }
}

/// Up to `k` loopless `src -> dst` paths in ascending (weight, node sequence)
/// order. Empty when `dst` is unreachable; a single zero-weight path when
/// `src == dst`.
pub fn yen_k_shortest(graph: &Graph, src: NodeId, dst: NodeId, k: usize) -> PathSet {
    let mut set = PathSet {
        origin: src,
        destination: dst,
        paths: Vec::new(),
    };
    if k == 0 {
        return set;
    }
    if src == dst {
        set.paths.push(Path {
            nodes: vec![src],
            total_weight: 0.0,
        });
        return set;
    }

    let m = graph.node_count();
    let mut banned_nodes = vec![false; m];
    let mut banned_edges = HashSet::new();
    let first = lex_shortest_path(
        graph,
        src,
        dst,
        &Bans {
            nodes: &banned_nodes,
            edges: &banned_edges,
        },
    );
    let Some(first) = first else {
        return set;
    };

    let mut found: Vec<Path> = vec![make_path(graph, first)];
    let mut seen: HashSet<Vec<NodeId>> = HashSet::new();
    seen.insert(found[0].nodes.clone());
    let mut candidates: BTreeSet<Path> = BTreeSet::new();

    while found.len() < k {
        let last = found.last().expect("non-empty").nodes.clone();
        for i in 0..last.len() - 1 {
            let spur = last[i];
            let root = &last[..=i];

            banned_edges.clear();
            for p in &found {
                if p.nodes.len() > i + 1 && &p.nodes[..=i] == root {
                    banned_edges.insert((p.nodes[i], p.nodes[i + 1]));
                }
            }
            banned_nodes.iter_mut().for_each(|b| *b = false);
            for v in &root[..i] {
                banned_nodes[v.0] = true;
            }

            let bans = Bans {
                nodes: &banned_nodes,
                edges: &banned_edges,
            };
            if let Some(tail) = lex_shortest_path(graph, spur, dst, &bans) {
                let mut nodes = root[..i].to_vec();
                nodes.extend(tail);
                if seen.insert(nodes.clone()) {
                    candidates.insert(make_path(graph, nodes));
                }
            }
        }
        match candidates.pop_first() {
            Some(p) => found.push(p),
            None => break,
        }
    }
    // Guards against ulp-level disagreement between search and summation order.
    found.sort();
    set.paths = found;
    set
}
