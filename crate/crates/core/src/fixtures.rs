//! Small hand-built instances shared by the test suites and the CLI.

use std::sync::Arc;

use crate::graph::{load_edge_list, Graph, NodeId};
use crate::mission::Mission;

/// Eight-node two-agent instance. Agents start at 0 and 1, targets are 6 and
/// 7. From node 0 the three cheapest routes to 6 go through 4, 2 and 3
/// (costs 4, 5, 5) and the three cheapest routes to node 1 cost 2, 3, 3.
pub const EXAMPLE_EDGE_LIST: &str = "\
# src dst weight
0 2 1
0 3 1
0 4 1
1 2 1
1 3 1
1 4 1
2 1 2
2 5 3
3 0 2
3 1 2
3 5 3
4 0 1
4 1 1
4 5 2
5 6 1
5 7 1
";

pub fn example_graph() -> Graph {
    load_edge_list(EXAMPLE_EDGE_LIST).expect("fixture parses")
}

pub fn example_mission() -> Mission {
    Mission::new(
        Arc::new(example_graph()),
        [NodeId(0), NodeId(1)],
        [NodeId(6), NodeId(7)],
    )
}

/// Three agents around a corridor `0-1-2-3-4`. The agents starting at 0 and
/// 6 are pulled toward each other more than toward their targets, so without
/// the waiting rule they keep trading places over edge `(0, 6)`. With it one agent
/// waits and the pair rides the corridor together.
pub const CORRIDOR_EDGE_LIST: &str = include_str!("fixtures/corridor.txt");

pub fn corridor_graph() -> Graph {
    load_edge_list(CORRIDOR_EDGE_LIST).expect("fixture parses")
}

pub fn corridor_mission() -> Mission {
    let g = Arc::new(corridor_graph());
    let node = |l: &str| g.node_by_label(l).expect("fixture label");
    let starts = CORRIDOR_STARTS.iter().map(|l| node(l)).collect::<Vec<_>>();
    let targets = CORRIDOR_TARGETS.iter().map(|l| node(l)).collect::<Vec<_>>();
    Mission::new(g, starts, targets)
}

pub const CORRIDOR_STARTS: &[&str] = &["3", "0", "6"];
pub const CORRIDOR_TARGETS: &[&str] = &["4", "8", "9"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_mission, ForceParams, RunOptions};

    #[test]
    fn corridor_waiting_pays_off() {
        let m = corridor_mission();
        let on = run_mission(&m, &ForceParams::default(), &RunOptions::default(), 0);
        let off = run_mission(
            &m,
            &ForceParams::default(),
            &RunOptions {
                waiting: false,
                ..Default::default()
            },
            0,
        );
        assert!(on.completed && off.completed);
        assert_eq!(on.total_cost, 16.0);
        assert_eq!(off.total_cost, 31.0);
    }

    #[test]
    fn example_shape() {
        let g = example_graph();
        assert_eq!(g.node_count(), 8);
        assert_eq!(g.edge_count(), 16);
    }
}
