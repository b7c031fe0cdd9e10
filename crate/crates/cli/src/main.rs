mod input;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use input::{parse_float, GraphArgs, Infeasible, MissionArgs, ParamArgs, RunArgs};
use modroute::engine::{run_mission, MissionResult, Termination, DEFAULT_K};
use modroute::error::{ExperimentError, OracleError};
use modroute::experiments::{
    run_batch, sensitivity_sweep, BatchConfig, Method, SweepConfig, DEFAULT_SWEEP_GRID,
    DEFAULT_TRIALS,
};
use modroute::oracle::brute_force_optimal;
use modroute::{validate, Graph, Mission, NodeId};

const EXIT_INVALID: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_STEP_CAP: u8 = 3;

/// Route modular agents over a weighted graph with attraction forces.
#[derive(Debug, Parser)]
#[command(name = "modroute", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Route one mission and print the result.
    Run {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        mission: MissionArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the force-based router with the non-modular baseline.
    Batch {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 2)]
        agents: usize,
        /// Targets per mission; defaults to twice the agents.
        #[arg(long)]
        targets: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        /// Base seed; trial t uses seed + t.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw starts only from these node labels.
        #[arg(long, value_delimiter = ',')]
        starts_from: Option<Vec<String>>,
        #[command(flatten)]
        params: ParamArgs,
        /// Per-trial CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean cost over a grid of (alpha, beta) pairs on shared missions.
    Sweep {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 5)]
        agents: usize,
        #[arg(long)]
        targets: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', value_parser = parse_float, default_values_t = DEFAULT_SWEEP_GRID)]
        alpha_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_float, default_values_t = DEFAULT_SWEEP_GRID)]
        beta_grid: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, value_delimiter = ',')]
        starts_from: Option<Vec<String>>,
        #[command(flatten)]
        run: RunArgs,
        /// Per-trial CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-cell CSV output.
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
    /// Exact minimum cost of a tiny mission by exhaustive search.
    Oracle {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        mission: MissionArgs,
        #[arg(long, default_value_t = 8)]
        horizon: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check a mission and list anything that makes it infeasible.
    Validate {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        mission: MissionArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Infeasible>().is_some() {
                ExitCode::from(EXIT_INFEASIBLE)
            } else {
                ExitCode::from(EXIT_INVALID)
            }
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run {
            graph,
            mission,
            params,
            format,
            out,
        } => {
            let g = graph.load()?;
            let m = checked_mission(&mission, g)?;
            let (p, opts) = (params.params()?, params.run.options()?);
            let result = run_mission(&m, &p, &opts, mission.seed);
            let mut w = output(out.as_ref())?;
            match format {
                Format::Text => write_run_text(&mut w, &m, &result)?,
                Format::Json => {
                    let doc = json!({
                        "mission": m.fingerprint(),
                        "starts": labels(&m.graph, &m.starts),
                        "targets": labels(&m.graph, m.targets.iter()),
                        "paths": result.per_agent_paths.iter().map(|p| labels(&m.graph, p)).collect::<Vec<_>>(),
                        "result": &result,
                    });
                    serde_json::to_writer_pretty(&mut w, &doc)?;
                    writeln!(w)?;
                }
            }
            w.flush()?;
            Ok(match result.termination {
                Termination::Completed => ExitCode::SUCCESS,
                Termination::StepCap => {
                    eprintln!(
                        "{}",
                        result.diagnostic.as_deref().unwrap_or("step cap reached")
                    );
                    ExitCode::from(EXIT_STEP_CAP)
                }
                Termination::Stalled => {
                    eprintln!("{}", result.diagnostic.as_deref().unwrap_or("stalled"));
                    ExitCode::from(EXIT_INFEASIBLE)
                }
            })
        }
        Command::Batch {
            graph,
            agents,
            targets,
            trials,
            seed,
            starts_from,
            params,
            out,
        } => {
            let g = graph.load()?;
            let start_pool = starts_from.map(|l| input::resolve(&g, &l)).transpose()?;
            let cfg = BatchConfig {
                n_targets: targets.unwrap_or(2 * agents),
                trials,
                params: params.params()?,
                opts: params.run.options()?,
                start_pool,
                ..BatchConfig::new(g, agents, seed)
            };
            let result = run_batch(&cfg).map_err(experiment_error)?;
            if let Some(path) = &out {
                result.write_csv(create(path)?)?;
            }
            let stdout = io::stdout();
            let mut w = stdout.lock();
            writeln!(
                w,
                "{} trials, {agents} agents, {} targets",
                result.trials, cfg.n_targets
            )?;
            writeln!(
                w,
                "{:<12} {:>12} {:>12} {:>10} {:>10}",
                "method", "mean_cost", "variance", "completed", "best"
            )?;
            for method in Method::ALL {
                let s = result.summary(method);
                writeln!(
                    w,
                    "{:<12} {:>12.4} {:>12.4} {:>10} {:>9.1}%",
                    method.name(),
                    s.mean_cost,
                    s.variance,
                    s.completed,
                    100.0 * s.best_frequency
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            graph,
            agents,
            targets,
            trials,
            seed,
            alpha_grid,
            beta_grid,
            k,
            starts_from,
            run,
            out,
            summary_out,
        } => {
            let g = graph.load()?;
            let start_pool = starts_from.map(|l| input::resolve(&g, &l)).transpose()?;
            let cfg = SweepConfig {
                n_targets: targets.unwrap_or(2 * agents),
                trials,
                alpha_grid,
                beta_grid,
                k,
                opts: run.options()?,
                start_pool,
                ..SweepConfig::new(g, agents, seed)
            };
            let result = sensitivity_sweep(&cfg).map_err(experiment_error)?;
            if let Some(path) = &out {
                result.write_csv(create(path)?)?;
            }
            if let Some(path) = &summary_out {
                result.write_summary_csv(create(path)?)?;
            }
            let stdout = io::stdout();
            let mut w = stdout.lock();
            writeln!(
                w,
                "{:>8} {:>8} {:>12} {:>8} {:>10}",
                "alpha", "beta", "mean_cost", "score", "completed"
            )?;
            for c in &result.cells {
                writeln!(
                    w,
                    "{:>8} {:>8} {:>12.4} {:>8.3} {:>10}",
                    c.alpha, c.beta, c.mean_cost, c.score, c.completed
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle {
            graph,
            mission,
            horizon,
            format,
        } => {
            let g = graph.load()?;
            let m = checked_mission(&mission, g)?;
            let r = brute_force_optimal(&m, horizon).map_err(|e| match e {
                OracleError::InvalidMission(msg) => Infeasible(msg).into(),
                other => anyhow::Error::from(other),
            })?;
            let witness: Option<Vec<Vec<String>>> = r
                .witness
                .as_ref()
                .map(|w| w.iter().map(|p| labels(&m.graph, p)).collect());
            match format {
                Format::Text => {
                    println!("optimal cost: {}", r.optimal_cost);
                    println!("states explored: {}", r.explored_states);
                    for (i, p) in witness.iter().flatten().enumerate() {
                        println!("agent {i}: {}", p.join(" -> "));
                    }
                }
                Format::Json => {
                    let doc = json!({
                        "mission": m.fingerprint(),
                        "horizon": horizon,
                        "optimal_cost": r.optimal_cost.is_finite().then_some(r.optimal_cost),
                        "explored_states": r.explored_states,
                        "witness": witness,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc)?);
                }
            }
            if r.optimal_cost.is_finite() {
                Ok(ExitCode::SUCCESS)
            } else {
                Err(Infeasible(format!(
                    "no plan covers every target within {horizon} steps"
                ))
                .into())
            }
        }
        Command::Validate { graph, mission } => {
            let g = graph.load()?;
            let m = mission.mission(g)?;
            let diagnostics = validate(&m);
            println!(
                "mission {}: {} agents, {} targets, {} nodes",
                m.fingerprint(),
                m.starts.len(),
                m.targets.len(),
                m.graph.node_count()
            );
            if diagnostics.is_empty() {
                println!("ok");
                return Ok(ExitCode::SUCCESS);
            }
            for d in &diagnostics {
                println!("{d}");
            }
            Ok(ExitCode::from(EXIT_INFEASIBLE))
        }
    }
}

/// Builds the mission and refuses one that can never be completed.
fn checked_mission(args: &MissionArgs, graph: std::sync::Arc<Graph>) -> Result<Mission> {
    let m = args.mission(graph)?;
    let diagnostics = validate(&m);
    if !diagnostics.is_empty() {
        let msg = diagnostics
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Infeasible(msg).into());
    }
    Ok(m)
}

fn experiment_error(e: ExperimentError) -> anyhow::Error {
    match e {
        ExperimentError::Infeasible(_) => Infeasible(e.to_string()).into(),
        other => other.into(),
    }
}

fn labels<'a>(g: &Graph, nodes: impl IntoIterator<Item = &'a NodeId>) -> Vec<String> {
    nodes.into_iter().map(|&v| g.label(v).to_string()).collect()
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_run_text(w: &mut dyn Write, m: &Mission, r: &MissionResult) -> Result<()> {
    let g = &m.graph;
    writeln!(
        w,
        "mission {}: {} agents, {} targets",
        m.fingerprint(),
        m.starts.len(),
        m.targets.len()
    )?;
    writeln!(
        w,
        "termination: {:?} after {} steps",
        r.termination, r.steps_taken
    )?;
    writeln!(w, "total cost: {}", r.total_cost)?;
    if !r.unvisited.is_empty() {
        writeln!(w, "unvisited: {}", labels(g, &r.unvisited).join(", "))?;
    }
    for (i, p) in r.per_agent_paths.iter().enumerate() {
        writeln!(w, "agent {i}: {}", labels(g, p).join(" -> "))?;
    }
    Ok(())
}
