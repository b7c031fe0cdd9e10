//! Exact minimum shared cost for desk-sized instances.
//!
//! Exhaustive dynamic programming over joint moves: at each timestep every
//! agent either waits (free) or follows one out-edge, and the distinct edges
//! used in that step are paid once. States are `(t, positions, visited
//! targets)` and are memoized, so the search is exponential only in the
//! number of agents and targets.

use std::collections::HashMap;

use serde::Serialize;

use crate::engine::shared_cost;
use crate::error::OracleError;
use crate::graph::{Graph, NodeId};
use crate::mission::{validate, Mission};

pub const MAX_AGENTS: usize = 3;
pub const MAX_NODES: usize = 12;
pub const MAX_HORIZON: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    /// `+inf` when no plan within the horizon visits every target.
    pub optimal_cost: f64,
    /// Per-agent positions for one optimal plan, truncated at completion.
    pub witness: Option<Vec<Vec<NodeId>>>,
    pub explored_states: usize,
}

type Positions = [u8; MAX_AGENTS];
type Key = (u8, Positions, u16);

struct Search<'a> {
    graph: &'a Graph,
    n: usize,
    horizon: usize,
    full: u16,
    /// Bit for each node that is a target.
    target_bit: Vec<u16>,
    memo: HashMap<Key, (f64, Option<Positions>)>,
}

impl Search<'_> {
    fn mask_of(&self, pos: &Positions) -> u16 {
        pos[..self.n]
            .iter()
            .fold(0, |m, &p| m | self.target_bit[p as usize])
    }

    fn solve(&mut self, t: usize, pos: Positions, mask: u16) -> f64 {
        if mask == self.full {
            return 0.0;
        }
        if t == self.horizon {
            return f64::INFINITY;
        }
        let key = (t as u8, pos, mask);
        if let Some(&(v, _)) = self.memo.get(&key) {
            return v;
        }

        let options: Vec<Vec<NodeId>> = pos[..self.n]
            .iter()
            .map(|&p| {
                // waiting goes last so ties favour plans that move early
                let p = NodeId(p as usize);
                self.graph
                    .out_edges(p)
                    .iter()
                    .map(|&(d, _)| d)
                    .chain(std::iter::once(p))
                    .collect()
            })
            .collect();

        let mut best = (f64::INFINITY, None);
        let mut choice = vec![0usize; self.n];
        loop {
            let mut next = pos;
            let mut used: Vec<(u8, u8)> = Vec::with_capacity(self.n);
            let mut cost = 0.0;
            for (a, &c) in choice.iter().enumerate() {
                let to = options[a][c];
                next[a] = to.0 as u8;
                let out = self.graph.out_edges(NodeId(pos[a] as usize));
                if c < out.len() && !used.contains(&(pos[a], next[a])) {
                    used.push((pos[a], next[a]));
                    cost += out[c].1;
                }
            }
            if cost < best.0 {
                let rest = self.solve(t + 1, next, mask | self.mask_of(&next));
                if cost + rest < best.0 {
                    best = (cost + rest, Some(next));
                }
            }

            // odometer over the joint choices
            let mut a = 0;
            loop {
                if a == self.n {
                    self.memo.insert(key, best);
                    return best.0;
                }
                choice[a] += 1;
                if choice[a] < options[a].len() {
                    break;
                }
                choice[a] = 0;
                a += 1;
            }
        }
    }
}

/// Minimum shared cost over all joint plans of at most `horizon` steps that
/// visit every target. Limited to `MAX_AGENTS` agents, `MAX_NODES` nodes and
/// `MAX_HORIZON` steps.
pub fn brute_force_optimal(mission: &Mission, horizon: usize) -> Result<OracleResult, OracleError> {
    let graph = &*mission.graph;
    let n = mission.starts.len();
    let m = graph.node_count();
    if n > MAX_AGENTS || m > MAX_NODES || horizon > MAX_HORIZON {
        return Err(OracleError::LimitExceeded(format!(
            "{n} agents, {m} nodes, horizon {horizon} (limits {MAX_AGENTS}, {MAX_NODES}, {MAX_HORIZON})"
        )));
    }
    if let Some(d) = validate(mission).first() {
        return Err(OracleError::InvalidMission(d.to_string()));
    }

    let mut target_bit = vec![0u16; m];
    for (i, t) in mission.targets.iter().enumerate() {
        target_bit[t.0] = 1 << i;
    }
    let mut search = Search {
        graph,
        n,
        horizon,
        full: ((1u32 << mission.targets.len()) - 1) as u16,
        target_bit,
        memo: HashMap::new(),
    };
    let mut start: Positions = [0; MAX_AGENTS];
    for (a, s) in mission.starts.iter().enumerate() {
        start[a] = s.0 as u8;
    }
    let start_mask = search.mask_of(&start);
    let optimal_cost = search.solve(0, start, start_mask);

    let witness = optimal_cost.is_finite().then(|| {
        let mut paths: Vec<Vec<NodeId>> = mission.starts.iter().map(|&s| vec![s]).collect();
        let (mut t, mut pos, mut mask) = (0usize, start, start_mask);
        while mask != search.full {
            let (_, next) = search.memo[&(t as u8, pos, mask)];
            let next = next.expect("finite state has a successor");
            for (a, p) in paths.iter_mut().enumerate() {
                p.push(NodeId(next[a] as usize));
            }
            mask |= search.mask_of(&next);
            pos = next;
            t += 1;
        }
        paths
    });
    if let Some(w) = &witness {
        debug_assert!((shared_cost(graph, w) - optimal_cost).abs() <= 1e-9 * optimal_cost.max(1.0));
    }
    Ok(OracleResult {
        optimal_cost,
        witness,
        explored_states: search.memo.len(),
    })
}
