use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fuseforge::bench::{
    self, non_monotone_points, parse_config, Axis, MetricsRow, RunConfig, CSV_HEADER,
};
use fuseforge::pi::{
    parse_program, probe_termination, reduce_all_with, ExploreLimits, Name, PiError, Probe,
    ReductionState, Universe, DEFAULT_NODE_LIMIT,
};

#[derive(Parser)]
#[command(name = "fuseforge", version, about = "Agent-based simulation benchmarks and process-calculus oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and append a metrics row.
    Run(RunArgs),
    /// Run a configuration once per value along an axis.
    Sweep(SweepArgs),
    /// Process-calculus tools.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Explore every reduction path of a process and print its terminal states.
    Reduce(ReduceArgs),
}

#[derive(Args)]
struct Output {
    /// Directory receiving the CSV file.
    #[arg(long, env = "FUSEFORGE_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// CSV file name inside the output directory.
    #[arg(long, default_value = "results.csv")]
    csv: String,
}

/// Run settings. Each flag overrides the same key from `--config`.
#[derive(Args)]
struct Settings {
    /// Flat key=value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    workload: Option<String>,
    #[arg(long)]
    agents: Option<String>,
    #[arg(long)]
    partitions: Option<String>,
    #[arg(long)]
    partitioner: Option<String>,
    /// unopt, merge, merge+cache, +local, +remote, full, full+pushdown
    #[arg(long, allow_hyphen_values = true)]
    mode: Option<String>,
    #[arg(long)]
    rounds: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    repetitions: Option<String>,
    #[arg(long)]
    edge_p: Option<String>,
    #[arg(long)]
    sbm_blocks: Option<String>,
    #[arg(long)]
    sbm_p_out: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    recovery_rounds: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    jitter: Option<String>,
    #[arg(long)]
    max_iteration: Option<String>,
    #[arg(long)]
    tolerance_mode: Option<String>,
    /// Read the graph from an edge-list file instead of generating it.
    #[arg(long)]
    load_graph: Option<PathBuf>,
    /// Write the graph used by the run to an edge-list file.
    #[arg(long)]
    save_graph: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    settings: Settings,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    /// agents, threads or mode
    #[arg(long)]
    axis: String,
    /// Comma-separated values; for the mode axis, omit to sweep every mode.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Vec<String>,
    #[command(flatten)]
    settings: Settings,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReduceArgs {
    /// File holding definitions followed by one process.
    file: Option<PathBuf>,
    /// Process text given inline instead of a file.
    #[arg(long, conflicts_with = "file")]
    expr: Option<String>,
    /// Depth bound on reduction paths.
    #[arg(long, default_value_t = 10_000)]
    max_steps: u64,
    /// Cap on distinct states explored.
    #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
    node_limit: usize,
    /// Follow only the first enabled redex at every step.
    #[arg(long)]
    single_path: bool,
    /// Value of a free name, as name=integer. Repeatable.
    #[arg(long = "env", value_name = "NAME=VALUE")]
    env: Vec<String>,
}

impl Settings {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (k, v) in parse_config(&text).with_context(|| path.display().to_string())? {
                cfg.set(&k, &v)?;
            }
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let flags = [
            ("workload", self.workload.clone()),
            ("agents", self.agents.clone()),
            ("partitions", self.partitions.clone()),
            ("partitioner", self.partitioner.clone()),
            ("mode", self.mode.clone()),
            ("rounds", self.rounds.clone()),
            ("threads", self.threads.clone()),
            ("seed", self.seed.clone()),
            ("repetitions", self.repetitions.clone()),
            ("edge-p", self.edge_p.clone()),
            ("sbm-blocks", self.sbm_blocks.clone()),
            ("sbm-p-out", self.sbm_p_out.clone()),
            ("beta", self.beta.clone()),
            ("recovery-rounds", self.recovery_rounds.clone()),
            ("window", self.window.clone()),
            ("jitter", self.jitter.clone()),
            ("max-iteration", self.max_iteration.clone()),
            ("tolerance-mode", self.tolerance_mode.clone()),
            ("load-graph", path(&self.load_graph)),
            ("save-graph", path(&self.save_graph)),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// `out-dir` from the config file, used when neither the flag nor the
    /// environment variable is set.
    fn config_out_dir(&self) -> Result<Option<PathBuf>> {
        let Some(path) = &self.config else {
            return Ok(None);
        };
        let text = fs::read_to_string(path)?;
        Ok(parse_config(&text)?
            .into_iter()
            .rev()
            .find(|(k, _)| k == "out-dir")
            .map(|(_, v)| PathBuf::from(v)))
    }
}

fn csv_path(output: &Output, settings: &Settings) -> Result<PathBuf> {
    let dir = match &output.out_dir {
        Some(d) => d.clone(),
        None => settings
            .config_out_dir()?
            .unwrap_or_else(|| PathBuf::from("fuseforge-out")),
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(&output.csv))
}

fn print_rows(rows: &[MetricsRow], path: &Path) {
    println!("{CSV_HEADER}");
    for r in rows {
        println!("{}", bench::format_row(r));
    }
    eprintln!("appended {} row(s) to {}", rows.len(), path.display());
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = args.settings.resolve()?;
    let path = csv_path(&args.output, &args.settings)?;
    let row = bench::run(&cfg)?.row;
    bench::append_row(&path, &row)?;
    print_rows(&[row], &path);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<ExitCode> {
    let axis: Axis = args.axis.parse()?;
    let cfg = args.settings.resolve()?;
    let values = if args.values.is_empty() {
        match axis {
            Axis::Mode => fuseforge::optimizer::Mode::names().map(str::to_owned).collect(),
            _ => bail!("--values is required for the {} axis", args.axis),
        }
    } else {
        args.values.clone()
    };
    let path = csv_path(&args.output, &args.settings)?;
    let rows = bench::sweep(&cfg, axis, &values, &path)?;
    print_rows(&rows, &path);
    match axis {
        Axis::Mode => {
            let first = rows[0].checksum;
            if let Some(r) = rows.iter().find(|r| r.checksum != first) {
                eprintln!(
                    "mode {} produced checksum {:016x}, mode {} produced {first:016x}",
                    r.config.mode, r.checksum, rows[0].config.mode
                );
                if !cfg.tolerance_mode {
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Axis::Threads | Axis::Agents => {
            for (a, b) in non_monotone_points(&rows) {
                eprintln!(
                    "warning: mean time per round rose from {} to {} ({:?} -> {:?} ms)",
                    values[a], values[b], rows[a].mean_time_per_round_ms, rows[b].mean_time_per_round_ms
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn reduce(args: ReduceArgs) -> Result<ExitCode> {
    let text = match (&args.file, &args.expr) {
        (Some(f), None) => {
            fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?
        }
        (None, Some(e)) => e.clone(),
        _ => bail!("give a process file or --expr"),
    };
    let program = parse_program(&text, Universe::with_builtins())?;
    let mut start = ReductionState::new(program.process);
    for kv in &args.env {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--env expects NAME=VALUE, got '{kv}'");
        };
        let v: i64 = v.trim().parse().with_context(|| format!("value of {k}"))?;
        start = start.with_env(Name::user(k.trim()), v);
    }
    let env_line = |s: &ReductionState| {
        s.env
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    if args.single_path {
        match probe_termination(&start, args.max_steps, &program.universe)? {
            Probe::Terminated { steps, state } => {
                println!("terminal: {}", state.process);
                println!("env: {}", env_line(&state));
                println!("steps: {steps}");
                println!("non-terminating: false");
            }
            Probe::StillRunning { steps, components } => {
                println!("steps: {steps}");
                println!("components: {components}");
                println!("non-terminating: true");
            }
        }
        return Ok(ExitCode::SUCCESS);
    }
    let limits = ExploreLimits {
        max_steps: args.max_steps,
        node_limit: args.node_limit,
    };
    let (exploration, exhausted) = match reduce_all_with(&start, limits, &program.universe) {
        Ok(e) => (e, false),
        Err(PiError::StateSpace { partial, .. }) => (*partial, true),
        Err(e) => return Err(e.into()),
    };
    for t in &exploration.terminals {
        println!("terminal: {}", t.process);
        println!("env: {}", env_line(t));
    }
    println!("explored: {}", exploration.explored);
    println!("depth: {}", exploration.depth);
    println!("non-terminating: {}", exploration.non_terminating());
    if exhausted {
        eprintln!("state space exceeded {} states; results are partial", args.node_limit);
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a).map(|()| ExitCode::SUCCESS),
        Command::Sweep(a) => sweep(a),
        Command::Oracle {
            command: OracleCommand::Reduce(a),
        } => reduce(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
