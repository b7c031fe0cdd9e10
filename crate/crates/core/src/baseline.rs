//! Non-modular nearest-neighbor routing: every agent walks a shortest path to
//! its nearest open target and pays for every edge it uses, shared or not.

use std::collections::BTreeSet;

use crate::engine::{
    finish, CostModel, MissionResult, MissionState, MoveIntent, RunOptions, StepRecord,
};
use crate::graph::Edge;
use crate::mission::Mission;
use crate::paths::yen_k_shortest;

pub fn run_nonmodular_baseline(mission: &Mission, opts: &RunOptions) -> MissionResult {
    let graph = &*mission.graph;
    let mut state = MissionState::new(mission);
    let cap = opts.step_cap(graph.node_count());
    let mut steps = Vec::new();
    let mut cap_hit = false;

    while !state.unvisited.is_empty() {
        if state.t >= cap {
            cap_hit = true;
            break;
        }
        if !state.reassign(graph) {
            break;
        }
        let intents: Vec<MoveIntent> = state
            .agents
            .iter()
            .filter(|a| !a.finished)
            .map(|a| {
                let target = a.assigned_target.expect("active agents have a target");
                let route = yen_k_shortest(graph, a.position, target, 1);
                match route.paths.first().and_then(|p| p.first_edge()) {
                    Some((from, to)) => MoveIntent {
                        agent_id: a.id,
                        from,
                        to,
                        waiting: false,
                    },
                    None => MoveIntent::wait(a.id, a.position),
                }
            })
            .collect();

        let mut step_cost = 0.0;
        let mut used = BTreeSet::new();
        for i in &intents {
            if i.waiting {
                step_cost += opts.wait_cost;
            } else {
                step_cost += graph.weight(i.from, i.to).expect("shortest path edge");
                used.insert((i.from, i.to));
            }
        }
        let traversed = used
            .into_iter()
            .map(|(src, dst)| Edge {
                src,
                dst,
                weight: graph.weight(src, dst).expect("shortest path edge"),
            })
            .collect();

        state.apply(&intents);
        steps.push(StepRecord {
            t: state.t,
            traversed,
            intents,
            step_cost,
        });
    }
    if state.unvisited.is_empty() {
        for a in &mut state.agents {
            a.finished = true;
            a.assigned_target = None;
        }
    }
    finish(state, steps, cap_hit, CostModel::PerAgent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_mission, ForceParams};
    use crate::fixtures::{example_graph, example_mission};
    use crate::graph::NodeId;
    use std::sync::Arc;

    fn n(v: usize) -> NodeId {
        NodeId(v)
    }

    #[test]
    fn single_agent_follows_shortest_path() {
        let m = Mission::new(Arc::new(example_graph()), [n(0)], [n(6)]);
        let r = run_nonmodular_baseline(&m, &RunOptions::default());
        assert!(r.completed);
        assert_eq!(r.total_cost, 4.0);
        assert_eq!(r.per_agent_paths[0], vec![n(0), n(4), n(5), n(6)]);
    }

    #[test]
    fn shared_edges_are_paid_per_agent() {
        let m = example_mission();
        let r = run_nonmodular_baseline(&m, &RunOptions::default());
        assert!(r.completed);
        // both cross 4 -> 5 at t = 2 and pay for it separately
        let second = &r.steps[1];
        assert_eq!(second.traversed.len(), 1);
        assert_eq!(second.step_cost, 4.0);
        assert_eq!(r.total_cost, 8.0);
        assert_eq!(r.recompute_cost(&m.graph, 0.0), 8.0);

        let modular = run_mission(
            &m,
            &ForceParams::new(1.0, 1.0, 3).unwrap(),
            &RunOptions::default(),
            0,
        );
        assert_eq!(modular.total_cost, 6.0);
    }
}
