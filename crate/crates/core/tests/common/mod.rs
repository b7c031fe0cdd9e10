//! Independent reference implementations and instance generators shared by
//! the integration suites. Nothing here calls into the code under test
//! except to build graphs.

#![allow(dead_code)]

use std::sync::Arc;

use modroute::experiments::generate_random_mission;
use modroute::{Edge, Graph, Mission, NodeId};
use rand::Rng;

/// Directed graph on `m` nodes where each ordered pair is an edge with
/// probability `p`. Integer weights keep every path sum exact.
pub fn random_graph<R: Rng>(rng: &mut R, m: usize, p: f64, max_w: u32) -> Graph {
    let mut edges = Vec::new();
    for a in 0..m {
        for b in 0..m {
            if a != b && rng.random_bool(p) {
                edges.push(Edge {
                    src: NodeId(a),
                    dst: NodeId(b),
                    weight: rng.random_range(1..=max_w) as f64,
                });
            }
        }
    }
    Graph::from_edges(m, edges).unwrap()
}

/// A directed ring through every node plus random chords, so every node
/// reaches every other.
pub fn strongly_connected<R: Rng>(rng: &mut R, m: usize, chords: usize, max_w: u32) -> Graph {
    let mut edges: Vec<Edge> = (0..m)
        .map(|a| Edge {
            src: NodeId(a),
            dst: NodeId((a + 1) % m),
            weight: rng.random_range(1..=max_w) as f64,
        })
        .collect();
    for _ in 0..chords {
        let (a, b) = (rng.random_range(0..m), rng.random_range(0..m));
        if a == b || edges.iter().any(|e| e.src.0 == a && e.dst.0 == b) {
            continue;
        }
        edges.push(Edge {
            src: NodeId(a),
            dst: NodeId(b),
            weight: rng.random_range(1..=max_w) as f64,
        });
    }
    Graph::from_edges(m, edges).unwrap()
}

/// All-pairs distances, `inf` when unreachable.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<f64>> {
    let m = g.node_count();
    let mut d = vec![vec![f64::INFINITY; m]; m];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in g.edges() {
        d[e.src.0][e.dst.0] = d[e.src.0][e.dst.0].min(e.weight);
    }
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Every simple path from `src` to `dst`, sorted by weight then node sequence.
pub fn simple_paths(g: &Graph, src: NodeId, dst: NodeId) -> Vec<(f64, Vec<NodeId>)> {
    fn dfs(
        g: &Graph,
        dst: NodeId,
        path: &mut Vec<NodeId>,
        w: f64,
        out: &mut Vec<(f64, Vec<NodeId>)>,
    ) {
        let here = *path.last().unwrap();
        if here == dst {
            out.push((w, path.clone()));
            return;
        }
        for &(next, ew) in g.out_edges(here) {
            if !path.contains(&next) {
                path.push(next);
                dfs(g, dst, path, w + ew, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    dfs(g, dst, &mut vec![src], 0.0, &mut out);
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out
}

/// Small mission on a strongly connected graph: `m` in 4..=10, one or two
/// agents, one to three targets.
pub fn tiny_mission<R: Rng>(rng: &mut R) -> Mission {
    let m = rng.random_range(4..=10);
    let g = Arc::new(strongly_connected(rng, m, m, 4));
    let n = rng.random_range(1..=2);
    let targets = rng.random_range(1..=3).min(m - n);
    generate_random_mission(g, n, targets, rng.random(), None).unwrap()
}
