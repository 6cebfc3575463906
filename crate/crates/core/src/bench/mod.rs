//! Benchmark driver: build, partition, optimize, execute and report.

mod config;
mod csv;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

pub use config::{parse_config, ConfigError, PartitionerKind, RunConfig, WorkloadKind};
pub use csv::{append_row, format_row, CSV_HEADER};

use crate::graph::{
    erm, partition_greedy, partition_hash, partition_random, read_edge_list, sbm, star, torus2d,
    write_edge_list, Graph, GraphError, HashMode, Partitioning,
};
use crate::optimizer::{optimize, Mode, OptimizerError, PassTimings};
use crate::runtime::{execute, ExecConfig, Metrics, RuntimeError};
use crate::workloads::{
    economics_on_graph, epidemics, gol_on_graph, pagerank, random_cells, EconomicsParams,
    EpidemicsParams, PageRankParams, Workload, WorkloadError,
};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("repetition {rep} produced checksum {got:016x}, first run produced {want:016x}")]
    Nondeterministic { rep: usize, got: u64, want: u64 },
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub config: RunConfig,
    pub rounds: u64,
    /// `None` when no round ran.
    pub mean_time_per_round_ms: Option<f64>,
    pub logical_messages: u64,
    pub wire_messages: u64,
    pub wire_values: u64,
    pub wire_bytes: u64,
    pub optimizer: PassTimings,
    pub graph_build_time_ms: f64,
    pub checksum: u64,
}

/// Everything a run produced, for callers that need more than the row.
#[derive(Debug)]
pub struct RunOutput {
    pub row: MetricsRow,
    pub metrics: Metrics,
    pub partitioning: Partitioning,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Largest `w <= sqrt(n)` dividing `n`, giving a `w x n/w` grid.
fn grid_shape(n: usize) -> Result<(usize, usize), ConfigError> {
    let mut w = (n as f64).sqrt() as usize;
    while w > 0 && n % w != 0 {
        w -= 1;
    }
    if w < 3 {
        return Err(ConfigError::Invalid(format!(
            "gol needs an agent count that factors into a grid of at least 3x3, got {n}"
        )));
    }
    Ok((w, n / w))
}

/// Generates (or loads) the workload graph.
pub fn build_graph(cfg: &RunConfig) -> Result<Graph, BenchError> {
    if let Some(path) = &cfg.load_graph {
        return Ok(read_edge_list(path)?);
    }
    let n = cfg.agents;
    Ok(match cfg.workload {
        WorkloadKind::Gol => {
            let (w, h) = grid_shape(n)?;
            torus2d(w, h)?
        }
        WorkloadKind::EpidemicsErm | WorkloadKind::Pagerank => erm(n, cfg.edge_p(), cfg.seed)?,
        WorkloadKind::EpidemicsSbm => sbm(n, cfg.sbm_blocks, cfg.edge_p(), cfg.sbm_p_out, cfg.seed)?,
        WorkloadKind::Economics => star(n)?,
    })
}

pub fn build_workload(cfg: &RunConfig, graph: Graph) -> Result<Workload, BenchError> {
    let n = graph.vertex_count();
    Ok(match cfg.workload {
        WorkloadKind::Gol => gol_on_graph(graph, random_cells(n, cfg.seed))?,
        WorkloadKind::EpidemicsErm | WorkloadKind::EpidemicsSbm => epidemics(
            graph,
            EpidemicsParams {
                beta: cfg.beta,
                recovery_rounds: cfg.recovery_rounds,
            },
            cfg.seed,
        )?,
        WorkloadKind::Economics => economics_on_graph(
            graph,
            EconomicsParams {
                window: cfg.window,
                jitter: cfg.jitter,
            },
        )?,
        WorkloadKind::Pagerank => pagerank(
            graph,
            PageRankParams {
                max_iteration: cfg.max_iteration,
                tolerance_mode: cfg.tolerance_mode,
            },
        )?,
    })
}

pub fn partition(cfg: &RunConfig, graph: &Graph) -> Result<Partitioning, BenchError> {
    let target = graph.vertex_count().div_ceil(cfg.partitions.max(1)).max(1);
    Ok(match cfg.partitioner {
        PartitionerKind::Random => partition_random(graph, target, cfg.seed)?,
        PartitionerKind::HashDiv => partition_hash(graph, target, HashMode::Div)?,
        PartitionerKind::HashMod => partition_hash(graph, target, HashMode::Mod)?,
        PartitionerKind::Greedy => partition_greedy(graph, target, cfg.seed)?,
    })
}

/// Graph build, partitioning, optimization, then `repetitions` timed
/// executions from the initial state. Counters come from the first
/// repetition; every repetition must reproduce its checksum.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, BenchError> {
    cfg.validate()?;
    let t = Instant::now();
    let graph = build_graph(cfg)?;
    let graph_build = t.elapsed();
    if let Some(path) = &cfg.save_graph {
        write_edge_list(&graph, path)?;
    }
    let parts = partition(cfg, &graph)?;
    let workload = build_workload(cfg, graph)?;
    let plan = optimize(&workload, &parts, cfg.mode.passes())?;

    let rounds = cfg.rounds();
    let exec = ExecConfig::new(rounds, cfg.threads, cfg.seed);
    let mut first: Option<(u64, Metrics)> = None;
    let mut times = Vec::new();
    for rep in 0..cfg.repetitions.max(1) {
        let (state, metrics) = execute(&plan, &workload.initial, &exec)?;
        let sum = state.checksum();
        if let Some(t) = metrics.mean_round_time() {
            times.push(ms(t));
        }
        match &first {
            None => first = Some((sum, metrics)),
            Some((want, _)) if *want != sum => {
                return Err(BenchError::Nondeterministic {
                    rep,
                    got: sum,
                    want: *want,
                })
            }
            Some(_) => {}
        }
    }
    let (checksum, metrics) = first.expect("at least one repetition");
    let mean = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
    let row = MetricsRow {
        config: cfg.clone(),
        rounds,
        mean_time_per_round_ms: mean,
        logical_messages: metrics.total(|r| r.logical_messages),
        wire_messages: metrics.total(|r| r.wire_units),
        wire_values: metrics.total(|r| r.wire_values),
        wire_bytes: metrics.total(|r| r.wire_bytes),
        optimizer: plan.timings,
        graph_build_time_ms: ms(graph_build),
        checksum,
    };
    Ok(RunOutput {
        row,
        metrics,
        partitioning: parts,
    })
}

/// Sweep axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Agents,
    Threads,
    Mode,
}

impl std::str::FromStr for Axis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "agents" => Ok(Axis::Agents),
            "threads" => Ok(Axis::Threads),
            "mode" => Ok(Axis::Mode),
            _ => Err(ConfigError::Invalid(format!(
                "unknown axis '{s}'; valid axes: agents, threads, mode"
            ))),
        }
    }
}

/// Runs `base` once per value along `axis`, appending one row per point
/// to `csv_path`.
pub fn sweep(
    base: &RunConfig,
    axis: Axis,
    values: &[String],
    csv_path: &Path,
) -> Result<Vec<MetricsRow>, BenchError> {
    let mut rows = Vec::with_capacity(values.len());
    for v in values {
        let mut cfg = base.clone();
        let key = match axis {
            Axis::Agents => "agents",
            Axis::Threads => "threads",
            Axis::Mode => "mode",
        };
        cfg.set(key, v)?;
        let row = run(&cfg)?.row;
        append_row(csv_path, &row)?;
        rows.push(row);
    }
    Ok(rows)
}

/// Checks whether mean times fall as the swept value grows; returns the
/// offending adjacent pairs.
pub fn non_monotone_points(rows: &[MetricsRow]) -> Vec<(usize, usize)> {
    rows.windows(2)
        .enumerate()
        .filter_map(|(i, w)| match (w[0].mean_time_per_round_ms, w[1].mean_time_per_round_ms) {
            (Some(a), Some(b)) if b > a => Some((i, i + 1)),
            _ => None,
        })
        .collect()
}

impl Mode {
    /// Modes in ablation order, for sweeps.
    pub fn names() -> impl Iterator<Item = &'static str> {
        Mode::ALL.into_iter().map(Mode::as_str)
    }
}
