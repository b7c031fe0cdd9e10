//! Builds graphs and missions from command-line arguments.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use modroute::engine::{
    Aggregation, ForceParams, RunOptions, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_K,
};
use modroute::experiments::generate_random_mission;
use modroute::graph::{load_edge_list, load_graphml, DEFAULT_WEIGHT_ATTR};
use modroute::{Graph, Mission, NodeId};

/// Raised when the mission itself cannot be completed; maps to exit code 2.
#[derive(Debug)]
pub struct Infeasible(pub String);

impl std::fmt::Display for Infeasible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "mission infeasible: {}", self.0)
    }
}

impl std::error::Error for Infeasible {}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge-list or GraphML file (`.graphml` / `.xml` are read as GraphML).
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub graph: Option<PathBuf>,
    /// Synthetic 4-connected grid, e.g. `8x8`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    /// Seed for the grid's edge weights.
    #[arg(long, default_value_t = 1)]
    pub grid_seed: u64,
    /// GraphML edge attribute holding the weight.
    #[arg(long, default_value = DEFAULT_WEIGHT_ATTR)]
    pub weight_attr: String,
}

impl GraphArgs {
    pub fn load(&self) -> Result<Arc<Graph>> {
        let graph = match (&self.graph, self.grid) {
            (Some(path), _) => load_graph_file(path, &self.weight_attr)?,
            (None, Some((w, h))) => Graph::grid(w, h, self.grid_seed)?,
            (None, None) => bail!("either --graph or --grid is required"),
        };
        log::info!(
            "graph: {} nodes, {} edges",
            graph.node_count(),
            graph.edge_count()
        );
        Ok(Arc::new(graph))
    }
}

fn load_graph_file(path: &Path, weight_attr: &str) -> Result<Graph> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    if ext == "graphml" || ext == "xml" {
        return Ok(load_graphml(path, weight_attr)?);
    }
    let text =
        fs::read_to_string(path).with_context(|| format!("failed to read {}", path.display()))?;
    load_edge_list(&text).with_context(|| format!("in {}", path.display()))
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let dim = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((dim(w)?, dim(h)?))
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Agent-agent attraction scale.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Agent-target attraction scale.
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    /// Candidate paths sampled per source.
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Add up forces of paths sharing a first edge instead of keeping the largest.
    #[arg(long)]
    pub force_sum: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

impl ParamArgs {
    pub fn params(&self) -> Result<ForceParams> {
        let agg = if self.force_sum {
            Aggregation::Sum
        } else {
            Aggregation::Max
        };
        Ok(ForceParams::new(self.alpha, self.beta, self.k)?.with_aggregation(agg))
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Step cap per mission; defaults to 4 m^2.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Cost charged for each ordered wait.
    #[arg(long, default_value_t = 0.0)]
    pub wait_cost: f64,
    /// Disable the waiting rule for head-on swaps.
    #[arg(long)]
    pub no_wait: bool,
}

impl RunArgs {
    pub fn options(&self) -> Result<RunOptions> {
        let opts = RunOptions {
            max_steps: self.max_steps,
            wait_cost: self.wait_cost,
            waiting: !self.no_wait,
        };
        opts.check()?;
        Ok(opts)
    }
}

#[derive(Debug, Args)]
pub struct MissionArgs {
    /// Number of agents for a random mission.
    #[arg(long, default_value_t = 2)]
    pub agents: usize,
    /// Number of targets for a random mission; defaults to twice the agents.
    #[arg(long)]
    pub targets: Option<usize>,
    /// Seed for the random mission and the waiting coin.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Explicit start node labels, comma separated.
    #[arg(long, value_delimiter = ',', requires = "target_nodes")]
    pub start_nodes: Option<Vec<String>>,
    /// Explicit target node labels, comma separated.
    #[arg(long, value_delimiter = ',', requires = "start_nodes")]
    pub target_nodes: Option<Vec<String>>,
    /// Draw random starts only from these node labels.
    #[arg(long, value_delimiter = ',', conflicts_with = "start_nodes")]
    pub starts_from: Option<Vec<String>>,
}

impl MissionArgs {
    pub fn n_targets(&self) -> usize {
        self.targets.unwrap_or(2 * self.agents)
    }

    pub fn mission(&self, graph: Arc<Graph>) -> Result<Mission> {
        if let (Some(starts), Some(targets)) = (&self.start_nodes, &self.target_nodes) {
            let starts = resolve(&graph, starts)?;
            let targets = resolve(&graph, targets)?;
            return Ok(Mission::new(graph, starts, targets));
        }
        let pool = self.start_pool(&graph)?;
        generate_random_mission(
            graph,
            self.agents,
            self.n_targets(),
            self.seed,
            pool.as_deref(),
        )
        .map_err(|e| match e {
            modroute::error::ExperimentError::Infeasible(_) => Infeasible(e.to_string()).into(),
            other => other.into(),
        })
    }

    pub fn start_pool(&self, graph: &Graph) -> Result<Option<Vec<NodeId>>> {
        self.starts_from
            .as_ref()
            .map(|labels| resolve(graph, labels))
            .transpose()
    }
}

pub fn resolve(graph: &Graph, labels: &[String]) -> Result<Vec<NodeId>> {
    labels
        .iter()
        .map(|l| {
            graph
                .node_by_label(l.trim())
                .ok_or_else(|| modroute::error::ExperimentError::UnknownLabel(l.clone()).into())
        })
        .collect()
}

pub fn parse_float(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec() {
        assert_eq!(parse_grid("8x8"), Ok((8, 8)));
        assert_eq!(parse_grid("10X5"), Ok((10, 5)));
        assert!(parse_grid("8").is_err());
        assert!(parse_grid("ax2").is_err());
    }
}
