//! The force-based router.
//!
//! Every timestep each agent is assigned its nearest open target, samples
//! the `k` cheapest loopless paths to that target and to every other active
//! agent, and turns each path into an inverse-square attraction along the
//! path's first edge. The agent takes the edge with the largest total pull.
//! Two agents about to swap positions are resolved by making the one closer
//! to its own target wait a step, so the other can join it.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Edge, Graph, NodeId};
use crate::mission::Mission;
use crate::paths::{dijkstra, yen_k_shortest, ShortestPathTree};

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("alpha and beta must be finite and non-negative (got alpha={alpha}, beta={beta})")]
    Negative { alpha: f64, beta: f64 },
    #[error("alpha and beta cannot both be zero")]
    BothZero,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("wait cost must be finite and non-negative (got {0})")]
    WaitCost(f64),
}

/// How the paths from one source that share a first edge are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Strongest path only.
    #[default]
    Max,
    /// Sum over all such paths.
    Sum,
}

/// Attraction scales and the number of paths sampled per source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceParams {
    pub alpha: f64,
    pub beta: f64,
    pub k: usize,
    pub aggregation: Aggregation,
}

impl Default for ForceParams {
    fn default() -> Self {
        ForceParams {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            k: DEFAULT_K,
            aggregation: Aggregation::Max,
        }
    }
}

impl ForceParams {
    pub fn new(alpha: f64, beta: f64, k: usize) -> Result<Self, ParamError> {
        let p = ForceParams {
            alpha,
            beta,
            k,
            aggregation: Aggregation::Max,
        };
        p.check()?;
        Ok(p)
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> Self {
        self.aggregation = aggregation;
        self
    }

    pub fn check(&self) -> Result<(), ParamError> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.alpha) || !ok(self.beta) {
            return Err(ParamError::Negative {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        if self.alpha == 0.0 && self.beta == 0.0 {
            return Err(ParamError::BothZero);
        }
        if self.k == 0 {
            return Err(ParamError::ZeroK);
        }
        Ok(())
    }
}

/// Knobs that are not part of the force model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOptions {
    /// Step cap; `None` means `4 * m^2`.
    pub max_steps: Option<usize>,
    /// Cost charged per agent per waiting step.
    pub wait_cost: f64,
    /// Whether swap conflicts are resolved by making one agent wait.
    pub waiting: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_steps: None,
            wait_cost: 0.0,
            waiting: true,
        }
    }
}

impl RunOptions {
    pub fn check(&self) -> Result<(), ParamError> {
        if !(self.wait_cost.is_finite() && self.wait_cost >= 0.0) {
            return Err(ParamError::WaitCost(self.wait_cost));
        }
        Ok(())
    }

    pub fn step_cap(&self, node_count: usize) -> usize {
        self.max_steps.unwrap_or(4 * node_count * node_count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentState {
    pub id: usize,
    pub position: NodeId,
    pub assigned_target: Option<NodeId>,
    pub finished: bool,
    /// Position at every timestep so far; the last entry is `position`.
    pub history: Vec<NodeId>,
}

impl AgentState {
    pub fn new(id: usize, start: NodeId) -> Self {
        AgentState {
            id,
            position: start,
            assigned_target: None,
            finished: false,
            history: vec![start],
        }
    }
}

/// Total attraction on each candidate edge leaving `origin`, keyed by the
/// edge's destination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeForces {
    pub agent_id: usize,
    pub origin: NodeId,
    pub entries: BTreeMap<NodeId, f64>,
}

impl EdgeForces {
    pub fn get(&self, dst: NodeId) -> Option<f64> {
        self.entries.get(&dst).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MoveIntent {
    pub agent_id: usize,
    pub from: NodeId,
    pub to: NodeId,
    pub waiting: bool,
}

impl MoveIntent {
    pub fn wait(agent_id: usize, at: NodeId) -> Self {
        MoveIntent {
            agent_id,
            from: at,
            to: at,
            waiting: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    /// Distinct non-loop edges traversed this step, ordered by `(src, dst)`.
    pub traversed: Vec<Edge>,
    pub intents: Vec<MoveIntent>,
    pub step_cost: f64,
}

/// Whether a shared edge is paid once per timestep or once per agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    Shared,
    PerAgent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// Step cap reached with targets left, usually an oscillation.
    StepCap,
    /// Every agent stopped with targets left.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionResult {
    pub per_agent_paths: Vec<Vec<NodeId>>,
    pub steps: Vec<StepRecord>,
    pub total_cost: f64,
    pub completed: bool,
    pub steps_taken: usize,
    pub cost_model: CostModel,
    pub termination: Termination,
    pub unvisited: Vec<NodeId>,
    pub diagnostic: Option<String>,
}

impl MissionResult {
    /// Re-derives the total from the step records alone.
    pub fn recompute_cost(&self, graph: &Graph, wait_cost: f64) -> f64 {
        self.steps
            .iter()
            .map(|s| {
                let waits = s.intents.iter().filter(|i| i.waiting).count() as f64 * wait_cost;
                let moves: f64 = match self.cost_model {
                    CostModel::Shared => s.traversed.iter().map(|e| e.weight).sum(),
                    CostModel::PerAgent => s
                        .intents
                        .iter()
                        .filter(|i| !i.waiting)
                        .map(|i| {
                            graph
                                .weight(i.from, i.to)
                                .expect("recorded move is an edge")
                        })
                        .sum(),
                };
                moves + waits
            })
            .sum()
    }
}

/// Shared-cost objective evaluated directly on per-agent position sequences:
/// for every timestep, the distinct edges used by any agent are paid once.
/// Staying put is free. Panics if a move is not an edge.
pub fn shared_cost(graph: &Graph, paths: &[Vec<NodeId>]) -> f64 {
    let horizon = paths.iter().map(|p| p.len()).max().unwrap_or(0);
    let mut total = 0.0;
    for t in 1..horizon {
        let used: BTreeSet<(NodeId, NodeId)> = paths
            .iter()
            .filter(|p| p.len() > t)
            .map(|p| (p[t - 1], p[t]))
            .filter(|(a, b)| a != b)
            .collect();
        total += used
            .iter()
            .map(|&(a, b)| {
                graph
                    .weight(a, b)
                    .expect("consecutive positions form an edge")
            })
            .sum::<f64>();
    }
    total
}

/// Nearest-target assignment, one agent at a time in id order.
///
/// Each unfinished agent takes the unvisited target at minimum Dijkstra
/// distance. Two agents may hold the same target. Among targets at exactly
/// the same distance an agent prefers one that no lower-id agent holds, then
/// the smallest id. Agents that cannot reach any open target get `None`.
/// The result is indexed like `agents`.
pub fn assign_targets(
    graph: &Graph,
    agents: &[AgentState],
    unvisited: &BTreeSet<NodeId>,
) -> Vec<Option<NodeId>> {
    let mut trees: BTreeMap<NodeId, ShortestPathTree> = BTreeMap::new();
    let mut out = vec![None; agents.len()];
    let mut claimed = BTreeSet::new();
    for (idx, a) in agents.iter().enumerate() {
        if a.finished {
            continue;
        }
        let tree = trees
            .entry(a.position)
            .or_insert_with(|| dijkstra(graph, a.position));
        let best = unvisited
            .iter()
            .map(|&t| (tree.distance(t), claimed.contains(&t), t))
            .filter(|(d, _, _)| d.is_finite())
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        if let Some((_, _, t)) = best {
            out[idx] = Some(t);
            claimed.insert(t);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("attraction needs a positive distance, got {0}")]
pub struct NonPositiveDistance(pub f64);

/// Inverse-square attraction `scale / d^2`.
pub fn attractive_force(scale: f64, d: f64) -> Result<f64, NonPositiveDistance> {
    if d > 0.0 {
        Ok(scale / (d * d))
    } else {
        Err(NonPositiveDistance(d))
    }
}

/// Forces on every candidate first edge out of `me.position`.
///
/// Sources are the assigned target (scale `beta`) and every other unfinished
/// agent at a different node (scale `alpha`). Within one source, paths sharing
/// a first edge are combined per `params.aggregation`; totals add across
/// sources. Zero-scale sources are skipped.
pub fn compute_edge_forces(
    graph: &Graph,
    me: &AgentState,
    others: &[AgentState],
    params: &ForceParams,
) -> EdgeForces {
    let mut total: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut add_source = |dst: NodeId, scale: f64| {
        let mut per_edge: BTreeMap<NodeId, f64> = BTreeMap::new();
        for path in yen_k_shortest(graph, me.position, dst, params.k).paths {
            let Some((_, next)) = path.first_edge() else {
                continue;
            };
            let f = attractive_force(scale, path.total_weight)
                .expect("multi-node path has positive weight");
            let slot = per_edge.entry(next).or_insert(0.0);
            match params.aggregation {
                Aggregation::Max => *slot = slot.max(f),
                Aggregation::Sum => *slot += f,
            }
        }
        for (next, f) in per_edge {
            *total.entry(next).or_insert(0.0) += f;
        }
    };

    if let Some(target) = me.assigned_target {
        if params.beta > 0.0 {
            add_source(target, params.beta);
        }
    }
    if params.alpha > 0.0 {
        for other in others {
            if other.id == me.id || other.finished || other.position == me.position {
                continue;
            }
            add_source(other.position, params.alpha);
        }
    }
    EdgeForces {
        agent_id: me.id,
        origin: me.position,
        entries: total,
    }
}

/// Strongest edge, ties to the smallest destination id. No candidates means wait.
pub fn select_edge(forces: &EdgeForces) -> MoveIntent {
    let mut best: Option<(NodeId, f64)> = None;
    for (&dst, &f) in &forces.entries {
        if best.is_none_or(|(_, bf)| f > bf) {
            best = Some((dst, f));
        }
    }
    match best {
        Some((to, _)) => MoveIntent {
            agent_id: forces.agent_id,
            from: forces.origin,
            to,
            waiting: false,
        },
        None => MoveIntent::wait(forces.agent_id, forces.origin),
    }
}

/// Breaks head-on swaps: when two agents each intend to move onto the other's
/// node, the one with the shorter distance to its assigned target waits.
/// Exact ties are settled by one fair coin from `rng`. Pairs are scanned once
/// in agent order; an agent already told to wait no longer forms a swap.
pub fn resolve_waits<R: Rng>(
    graph: &Graph,
    intents: &[MoveIntent],
    agents: &[AgentState],
    rng: &mut R,
) -> Vec<MoveIntent> {
    let mut out = intents.to_vec();
    let target_of = |id: usize| {
        agents
            .iter()
            .find(|a| a.id == id)
            .and_then(|a| a.assigned_target)
    };
    let dist_to_target = |i: &MoveIntent| match target_of(i.agent_id) {
        Some(t) => dijkstra(graph, i.from).distance(t),
        None => f64::INFINITY,
    };
    for a in 0..out.len() {
        for b in a + 1..out.len() {
            let (x, y) = (out[a], out[b]);
            let swap =
                !x.waiting && !y.waiting && x.to == y.from && y.to == x.from && x.from != y.from;
            if !swap {
                continue;
            }
            let (dx, dy) = (dist_to_target(&x), dist_to_target(&y));
            let x_waits = if dx < dy {
                true
            } else if dy < dx {
                false
            } else {
                rng.random_bool(0.5)
            };
            let w = if x_waits { a } else { b };
            out[w] = MoveIntent::wait(out[w].agent_id, out[w].from);
        }
    }
    out
}

/// Agents plus the targets nobody has stood on yet.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionState {
    pub agents: Vec<AgentState>,
    pub unvisited: BTreeSet<NodeId>,
    pub t: usize,
}

impl MissionState {
    /// Targets under a start node count as visited at t = 0.
    pub fn new(mission: &Mission) -> Self {
        let agents: Vec<AgentState> = mission
            .starts
            .iter()
            .enumerate()
            .map(|(i, &s)| AgentState::new(i, s))
            .collect();
        let mut unvisited = mission.targets.clone();
        for a in &agents {
            unvisited.remove(&a.position);
        }
        MissionState {
            agents,
            unvisited,
            t: 0,
        }
    }

    pub fn active(&self) -> usize {
        self.agents.iter().filter(|a| !a.finished).count()
    }

    /// Applies the new assignment; agents left without a target are finished
    /// for good. Returns whether anyone is still active.
    pub(crate) fn reassign(&mut self, graph: &Graph) -> bool {
        if self.unvisited.is_empty() {
            for a in &mut self.agents {
                a.finished = true;
                a.assigned_target = None;
            }
            return false;
        }
        let assignment = assign_targets(graph, &self.agents, &self.unvisited);
        for (a, target) in self.agents.iter_mut().zip(assignment) {
            if a.finished {
                continue;
            }
            a.assigned_target = target;
            a.finished = target.is_none();
        }
        self.active() > 0
    }

    /// Moves agents per `intents`, extends every history, marks newly
    /// occupied targets visited, and advances the clock.
    pub(crate) fn apply(&mut self, intents: &[MoveIntent]) {
        for i in intents {
            let a = &mut self.agents[i.agent_id];
            debug_assert_eq!(a.position, i.from);
            a.position = i.to;
        }
        for a in &mut self.agents {
            a.history.push(a.position);
            self.unvisited.remove(&a.position);
        }
        self.t += 1;
    }
}

/// One synchronous timestep. Returns `None` without touching the clock when
/// there is nothing left to do (all targets visited, or no agent can reach
/// an open target).
pub fn step<R: Rng>(
    graph: &Graph,
    state: &mut MissionState,
    params: &ForceParams,
    opts: &RunOptions,
    rng: &mut R,
) -> Option<StepRecord> {
    if !state.reassign(graph) {
        return None;
    }
    let mut intents: Vec<MoveIntent> = state
        .agents
        .iter()
        .filter(|a| !a.finished)
        .map(|a| select_edge(&compute_edge_forces(graph, a, &state.agents, params)))
        .collect();
    if opts.waiting {
        intents = resolve_waits(graph, &intents, &state.agents, rng);
    }

    let traversed: Vec<Edge> = intents
        .iter()
        .filter(|i| !i.waiting)
        .map(|i| (i.from, i.to))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|(src, dst)| Edge {
            src,
            dst,
            weight: graph
                .weight(src, dst)
                .expect("candidate edges are stored edges"),
        })
        .collect();
    let waits = intents.iter().filter(|i| i.waiting).count();
    let step_cost = traversed.iter().map(|e| e.weight).sum::<f64>() + waits as f64 * opts.wait_cost;

    state.apply(&intents);
    Some(StepRecord {
        t: state.t,
        traversed,
        intents,
        step_cost,
    })
}

pub(crate) fn finish(
    state: MissionState,
    steps: Vec<StepRecord>,
    cap_hit: bool,
    cost_model: CostModel,
) -> MissionResult {
    let total_cost = steps.iter().map(|s| s.step_cost).sum();
    let completed = state.unvisited.is_empty();
    let unvisited: Vec<NodeId> = state.unvisited.iter().copied().collect();
    let (termination, diagnostic) = if completed {
        (Termination::Completed, None)
    } else if cap_hit {
        (
            Termination::StepCap,
            Some(format!(
                "step cap of {} reached with {} target(s) unvisited; agents are likely oscillating",
                state.t,
                unvisited.len()
            )),
        )
    } else {
        (
            Termination::Stalled,
            Some(format!(
                "no active agent can reach the {} remaining target(s)",
                unvisited.len()
            )),
        )
    };
    MissionResult {
        per_agent_paths: state.agents.into_iter().map(|a| a.history).collect(),
        steps_taken: steps.len(),
        steps,
        total_cost,
        completed,
        cost_model,
        termination,
        unvisited,
        diagnostic,
    }
}

/// Runs the force-based router until every target is visited, the agents
/// stall, or the step cap is hit. Deterministic in `(mission, params, opts, seed)`.
pub fn run_mission(
    mission: &Mission,
    params: &ForceParams,
    opts: &RunOptions,
    seed: u64,
) -> MissionResult {
    let graph = &*mission.graph;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = MissionState::new(mission);
    let cap = opts.step_cap(graph.node_count());
    let mut steps = Vec::new();
    let mut cap_hit = false;
    while !state.unvisited.is_empty() {
        if state.t >= cap {
            cap_hit = true;
            break;
        }
        match step(graph, &mut state, params, opts, &mut rng) {
            Some(rec) => steps.push(rec),
            None => break,
        }
    }
    for a in &mut state.agents {
        if state.unvisited.is_empty() {
            a.finished = true;
            a.assigned_target = None;
        }
    }
    finish(state, steps, cap_hit, CostModel::Shared)
}
