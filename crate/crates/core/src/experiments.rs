//! Batch comparisons and parameter sweeps over seeded random missions.
//!
//! Trial `i` of a run uses seed `base_seed + i` both to draw its mission and
//! to drive the router's tie-breaking, so any row can be reproduced on its own.
//! Trials run in parallel; rows are ordered by trial before anything is
//! reported, so output bytes never depend on scheduling.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::statistics::Statistics;

use crate::baseline::run_nonmodular_baseline;
use crate::engine::{run_mission, ForceParams, MissionResult, RunOptions};
use crate::error::ExperimentError;
use crate::graph::{Graph, NodeId};
use crate::mission::{validate, Mission};

pub const MAX_RESAMPLES: usize = 100;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_SWEEP_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

pub const BATCH_CSV_HEADER: [&str; 11] = [
    "trial",
    "seed",
    "method",
    "n_agents",
    "n_targets",
    "alpha",
    "beta",
    "k",
    "total_cost",
    "steps",
    "completed",
];

/// Draws `n` distinct starts and `n_targets` distinct targets, disjoint from
/// the starts. Starts come from `start_pool` when given, otherwise from all
/// nodes. Redraws until every target is reachable from some start.
pub fn generate_random_mission(
    graph: Arc<Graph>,
    n: usize,
    n_targets: usize,
    seed: u64,
    start_pool: Option<&[NodeId]>,
) -> Result<Mission, ExperimentError> {
    use rand::seq::{index, IndexedRandom};

    let m = graph.node_count();
    if n == 0 || n_targets == 0 {
        return Err(ExperimentError::InvalidParams(
            "need at least one agent and one target".into(),
        ));
    }
    if n + n_targets > m {
        return Err(ExperimentError::TooManyNodes {
            agents: n,
            targets: n_targets,
            nodes: m,
        });
    }
    if let Some(pool) = start_pool {
        if pool.len() < n {
            return Err(ExperimentError::InvalidParams(format!(
                "start pool has {} nodes but {n} agents were requested",
                pool.len()
            )));
        }
        if m - n < n_targets {
            return Err(ExperimentError::TooManyNodes {
                agents: n,
                targets: n_targets,
                nodes: m,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let (starts, targets): (Vec<NodeId>, Vec<NodeId>) = match start_pool {
            None => {
                let picks = index::sample(&mut rng, m, n + n_targets).into_vec();
                (
                    picks[..n].iter().map(|&i| NodeId(i)).collect(),
                    picks[n..].iter().map(|&i| NodeId(i)).collect(),
                )
            }
            Some(pool) => {
                let starts: Vec<NodeId> = pool.choose_multiple(&mut rng, n).copied().collect();
                let rest: Vec<NodeId> = graph.nodes().filter(|v| !starts.contains(v)).collect();
                let targets = rest.choose_multiple(&mut rng, n_targets).copied().collect();
                (starts, targets)
            }
        };
        let mission = Mission::new(graph.clone(), starts, targets);
        if validate(&mission).is_empty() {
            return Ok(mission);
        }
    }
    Err(ExperimentError::Infeasible(MAX_RESAMPLES))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ForceBased,
    NonModular,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::ForceBased, Method::NonModular];

    pub fn name(self) -> &'static str {
        match self {
            Method::ForceBased => "force",
            Method::NonModular => "nonmodular",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub graph: Arc<Graph>,
    pub n_agents: usize,
    pub n_targets: usize,
    pub trials: usize,
    pub params: ForceParams,
    pub opts: RunOptions,
    pub base_seed: u64,
    pub start_pool: Option<Vec<NodeId>>,
}

impl BatchConfig {
    /// `2n` targets and 100 trials, default force parameters.
    pub fn new(graph: Arc<Graph>, n_agents: usize, base_seed: u64) -> Self {
        BatchConfig {
            graph,
            n_agents,
            n_targets: 2 * n_agents,
            trials: DEFAULT_TRIALS,
            params: ForceParams::default(),
            opts: RunOptions::default(),
            base_seed,
            start_pool: None,
        }
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }

    pub fn mission(&self, trial: usize) -> Result<Mission, ExperimentError> {
        generate_random_mission(
            self.graph.clone(),
            self.n_agents,
            self.n_targets,
            self.trial_seed(trial),
            self.start_pool.as_deref(),
        )
    }

    fn check(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::NoTrials);
        }
        self.params
            .check()
            .and_then(|_| self.opts.check())
            .map_err(|e| ExperimentError::InvalidParams(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    pub n_agents: usize,
    pub n_targets: usize,
    pub alpha: f64,
    pub beta: f64,
    pub k: usize,
    pub total_cost: f64,
    pub steps: usize,
    pub completed: bool,
    pub mission: String,
}

impl TrialRow {
    fn new(
        cfg: &BatchConfig,
        trial: usize,
        mission: &Mission,
        method: Method,
        r: &MissionResult,
    ) -> Self {
        TrialRow {
            trial,
            seed: cfg.trial_seed(trial),
            method,
            n_agents: cfg.n_agents,
            n_targets: cfg.n_targets,
            alpha: cfg.params.alpha,
            beta: cfg.params.beta,
            k: cfg.params.k,
            total_cost: r.total_cost,
            steps: r.steps_taken,
            completed: r.completed,
            mission: mission.fingerprint(),
        }
    }

    pub fn csv_record(&self) -> [String; 11] {
        [
            self.trial.to_string(),
            self.seed.to_string(),
            self.method.to_string(),
            self.n_agents.to_string(),
            self.n_targets.to_string(),
            self.alpha.to_string(),
            self.beta.to_string(),
            self.k.to_string(),
            self.total_cost.to_string(),
            self.steps.to_string(),
            self.completed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_cost: f64,
    /// Sample variance; 0 for a single trial.
    pub variance: f64,
    pub completed: usize,
    /// Trials in which this method had the lowest cost, ties included.
    pub best_count: usize,
    pub best_frequency: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchResult {
    pub trials: usize,
    pub rows: Vec<TrialRow>,
    pub summaries: Vec<MethodSummary>,
}

impl BatchResult {
    pub fn summary(&self, method: Method) -> &MethodSummary {
        self.summaries
            .iter()
            .find(|s| s.method == method)
            .expect("every method is summarized")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(BATCH_CSV_HEADER)?;
        for row in &self.rows {
            w.write_record(row.csv_record())?;
        }
        w.flush()?;
        Ok(())
    }
}

fn costs_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let mean = xs.mean();
    let variance = if xs.len() < 2 { 0.0 } else { xs.variance() };
    (mean, variance)
}

fn trial_rows(config: &BatchConfig, t: usize, mission: &Mission) -> [TrialRow; 2] {
    let seed = config.trial_seed(t);
    let force = run_mission(mission, &config.params, &config.opts, seed);
    let base = run_nonmodular_baseline(mission, &config.opts);
    [
        TrialRow::new(config, t, mission, Method::ForceBased, &force),
        TrialRow::new(config, t, mission, Method::NonModular, &base),
    ]
}

/// Reruns a single trial of a batch from its derived seed. The rows equal
/// the ones `run_batch` reports for that trial.
pub fn run_trial(config: &BatchConfig, trial: usize) -> Result<[TrialRow; 2], ExperimentError> {
    config.check()?;
    Ok(trial_rows(config, trial, &config.mission(trial)?))
}

/// Runs the force-based router and the non-modular baseline on the same
/// missions. Failed runs stay in the table with `completed = false`.
pub fn run_batch(config: &BatchConfig) -> Result<BatchResult, ExperimentError> {
    config.check()?;
    let missions: Vec<Mission> = (0..config.trials)
        .into_par_iter()
        .map(|t| config.mission(t))
        .collect::<Result<_, _>>()?;

    let per_trial: Vec<[TrialRow; 2]> = missions
        .par_iter()
        .enumerate()
        .map(|(t, mission)| trial_rows(config, t, mission))
        .collect();

    let mut best = [0usize; 2];
    for rows in &per_trial {
        let min = rows
            .iter()
            .filter(|r| r.completed)
            .map(|r| r.total_cost)
            .fold(f64::INFINITY, f64::min);
        for (i, r) in rows.iter().enumerate() {
            if r.completed && costs_tie(r.total_cost, min) {
                best[i] += 1;
            }
        }
    }

    let summaries = Method::ALL
        .iter()
        .enumerate()
        .map(|(i, &method)| {
            let costs: Vec<f64> = per_trial.iter().map(|r| r[i].total_cost).collect();
            let (mean_cost, variance) = mean_and_variance(&costs);
            MethodSummary {
                method,
                mean_cost,
                variance,
                completed: per_trial.iter().filter(|r| r[i].completed).count(),
                best_count: best[i],
                best_frequency: best[i] as f64 / config.trials as f64,
            }
        })
        .collect();

    Ok(BatchResult {
        trials: config.trials,
        rows: per_trial.into_iter().flatten().collect(),
        summaries,
    })
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub graph: Arc<Graph>,
    pub n_agents: usize,
    pub n_targets: usize,
    pub trials: usize,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub k: usize,
    pub opts: RunOptions,
    pub base_seed: u64,
    pub start_pool: Option<Vec<NodeId>>,
}

impl SweepConfig {
    /// Default 5x5 grid over {0.1, ..., 0.9}, `2n` targets, 100 trials, k = 5.
    pub fn new(graph: Arc<Graph>, n_agents: usize, base_seed: u64) -> Self {
        SweepConfig {
            graph,
            n_agents,
            n_targets: 2 * n_agents,
            trials: DEFAULT_TRIALS,
            alpha_grid: DEFAULT_SWEEP_GRID.to_vec(),
            beta_grid: DEFAULT_SWEEP_GRID.to_vec(),
            k: crate::engine::DEFAULT_K,
            opts: RunOptions::default(),
            base_seed,
            start_pool: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub trial: usize,
    pub seed: u64,
    pub mission: String,
    pub total_cost: f64,
    pub steps: usize,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    pub mean_cost: f64,
    /// 1 for the cell with the lowest mean cost, 0 for the highest.
    pub score: f64,
    pub completed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub trials: usize,
    /// Row-major: alpha outer, beta inner.
    pub cells: Vec<SweepCell>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn cell(&self, alpha: f64, beta: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.alpha == alpha && c.beta == beta)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "trial",
            "seed",
            "mission",
            "alpha",
            "beta",
            "total_cost",
            "steps",
            "completed",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                r.mission.clone(),
                r.alpha.to_string(),
                r.beta.to_string(),
                r.total_cost.to_string(),
                r.steps.to_string(),
                r.completed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alpha", "beta", "mean_cost", "score", "completed"])?;
        for c in &self.cells {
            w.write_record([
                c.alpha.to_string(),
                c.beta.to_string(),
                c.mean_cost.to_string(),
                c.score.to_string(),
                c.completed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean force-based cost for every `(alpha, beta)` pair, with every cell run
/// on the same missions.
pub fn sensitivity_sweep(config: &SweepConfig) -> Result<SweepResult, ExperimentError> {
    if config.trials == 0 {
        return Err(ExperimentError::NoTrials);
    }
    if config.alpha_grid.is_empty() || config.beta_grid.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    config
        .opts
        .check()
        .map_err(|e| ExperimentError::InvalidParams(e.to_string()))?;
    let mut grid = Vec::new();
    for &alpha in &config.alpha_grid {
        for &beta in &config.beta_grid {
            let p = ForceParams::new(alpha, beta, config.k)
                .map_err(|e| ExperimentError::InvalidParams(e.to_string()))?;
            grid.push(p);
        }
    }

    let batch = BatchConfig {
        graph: config.graph.clone(),
        n_agents: config.n_agents,
        n_targets: config.n_targets,
        trials: config.trials,
        params: grid[0],
        opts: config.opts,
        base_seed: config.base_seed,
        start_pool: config.start_pool.clone(),
    };
    let missions: Vec<Mission> = (0..config.trials)
        .into_par_iter()
        .map(|t| batch.mission(t))
        .collect::<Result<_, _>>()?;
    let fingerprints: Vec<String> = missions.iter().map(Mission::fingerprint).collect();

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let p = &grid[c];
            let seed = batch.trial_seed(t);
            let r = run_mission(&missions[t], p, &config.opts, seed);
            SweepRow {
                alpha: p.alpha,
                beta: p.beta,
                trial: t,
                seed,
                mission: fingerprints[t].clone(),
                total_cost: r.total_cost,
                steps: r.steps_taken,
                completed: r.completed,
            }
        })
        .collect();

    let means: Vec<f64> = rows
        .chunks(config.trials)
        .map(|chunk| chunk.iter().map(|r| r.total_cost).mean())
        .collect();
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cells = grid
        .iter()
        .zip(rows.chunks(config.trials))
        .zip(&means)
        .map(|((p, chunk), &mean_cost)| SweepCell {
            alpha: p.alpha,
            beta: p.beta,
            mean_cost,
            score: if hi > lo {
                (hi - mean_cost) / (hi - lo)
            } else {
                1.0
            },
            completed: chunk.iter().filter(|r| r.completed).count(),
        })
        .collect();

    Ok(SweepResult {
        trials: config.trials,
        cells,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_graph;

    fn grid50() -> Arc<Graph> {
        Arc::new(Graph::grid(10, 5, 1).unwrap())
    }

    #[test]
    fn mission_generation_is_deterministic() {
        let g = grid50();
        let a = generate_random_mission(g.clone(), 3, 6, 7, None).unwrap();
        let b = generate_random_mission(g.clone(), 3, 6, 7, None).unwrap();
        assert_eq!(a.starts, b.starts);
        assert_eq!(a.targets, b.targets);
        assert_eq!(a.starts.len(), 3);
        assert_eq!(a.targets.len(), 6);
        assert!(a.starts.iter().all(|s| !a.targets.contains(s)));
        let c = generate_random_mission(g, 3, 6, 8, None).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn mission_generation_snapshot() {
        let m = generate_random_mission(grid50(), 3, 6, 7, None).unwrap();
        let ids = |v: &mut dyn Iterator<Item = &NodeId>| v.map(|n| n.0).collect::<Vec<_>>();
        assert_eq!(ids(&mut m.starts.iter()), [5, 6, 8]);
        assert_eq!(ids(&mut m.targets.iter()), [1, 3, 7, 12, 33, 35]);
        assert_eq!(m.fingerprint(), "b397b6087b225c55");
    }

    #[test]
    fn mission_generation_bounds() {
        let g = grid50();
        assert!(matches!(
            generate_random_mission(g.clone(), 1, 50, 0, None),
            Err(ExperimentError::TooManyNodes { .. })
        ));
        assert!(generate_random_mission(g.clone(), 0, 2, 0, None).is_err());
        assert!(generate_random_mission(g, 1, 49, 0, None).is_ok());
    }

    #[test]
    fn start_pool_is_respected() {
        let g = grid50();
        let pool = [NodeId(0), NodeId(9), NodeId(40), NodeId(49)];
        for seed in 0..20 {
            let m = generate_random_mission(g.clone(), 2, 4, seed, Some(&pool)).unwrap();
            assert!(m.starts.iter().all(|s| pool.contains(s)));
            assert!(m.starts.iter().all(|s| !m.targets.contains(s)));
        }
        assert!(generate_random_mission(g, 5, 4, 0, Some(&pool)).is_err());
    }

    #[test]
    fn infeasible_missions_are_reported() {
        // three disjoint edges: one start can never reach five targets
        let g = Arc::new(crate::graph::load_edge_list("0 1 1\n2 3 1\n4 5 1\n").unwrap());
        assert!(matches!(
            generate_random_mission(g, 1, 5, 3, None),
            Err(ExperimentError::Infeasible(MAX_RESAMPLES))
        ));
    }

    #[test]
    fn zero_trials() {
        let mut cfg = BatchConfig::new(grid50(), 2, 0);
        cfg.trials = 0;
        assert!(matches!(run_batch(&cfg), Err(ExperimentError::NoTrials)));
    }

    #[test]
    fn batch_rows_and_frequencies() {
        let mut cfg = BatchConfig::new(grid50(), 2, 11);
        cfg.trials = 6;
        let r = run_batch(&cfg).unwrap();
        assert_eq!(r.rows.len(), 12);
        for (i, row) in r.rows.iter().enumerate() {
            assert_eq!(row.trial, i / 2);
            assert_eq!(row.method, Method::ALL[i % 2]);
            assert_eq!(row.seed, 11 + (i / 2) as u64);
        }
        let total: usize = r.summaries.iter().map(|s| s.best_count).sum();
        assert!(total >= r.summaries.iter().map(|s| s.completed).min().unwrap());
        for s in &r.summaries {
            assert!((0.0..=1.0).contains(&s.best_frequency));
        }

        let mut a = Vec::new();
        let mut b = Vec::new();
        r.write_csv(&mut a).unwrap();
        run_batch(&cfg).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "trial,seed,method,n_agents,n_targets,alpha,beta,k,total_cost,steps,completed"
        );
    }

    #[test]
    fn single_cell_sweep_scores_one() {
        let mut cfg = SweepConfig::new(Arc::new(example_graph()), 1, 0);
        cfg.n_targets = 2;
        cfg.trials = 3;
        cfg.alpha_grid = vec![0.5];
        cfg.beta_grid = vec![1.0];
        let r = sensitivity_sweep(&cfg).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.cells[0].score, 1.0);
        cfg.alpha_grid.clear();
        assert!(matches!(
            sensitivity_sweep(&cfg),
            Err(ExperimentError::EmptyGrid)
        ));
    }

    #[test]
    fn sweep_shares_missions_and_scales() {
        let mut cfg = SweepConfig::new(grid50(), 3, 5);
        cfg.trials = 5;
        cfg.alpha_grid = vec![0.25, 0.5];
        cfg.beta_grid = vec![0.5, 1.0];
        let r = sensitivity_sweep(&cfg).unwrap();
        assert_eq!(r.rows.len(), 20);
        for t in 0..5 {
            let ms: std::collections::BTreeSet<_> = r
                .rows
                .iter()
                .filter(|x| x.trial == t)
                .map(|x| x.mission.clone())
                .collect();
            assert_eq!(ms.len(), 1);
        }
        // (0.25, 0.5) and (0.5, 1.0) differ by an exact factor of two
        assert_eq!(
            r.cell(0.25, 0.5).unwrap().mean_cost,
            r.cell(0.5, 1.0).unwrap().mean_cost
        );
        let best = r.cells.iter().map(|c| c.score).fold(0.0, f64::max);
        assert_eq!(best, 1.0);
    }
}
