use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::optimizer::Mode;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("bad value '{value}' for {key}: {message}")]
    Value {
        key: String,
        value: String,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkloadKind {
    Gol,
    EpidemicsErm,
    EpidemicsSbm,
    Economics,
    Pagerank,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 5] = [
        WorkloadKind::Gol,
        WorkloadKind::EpidemicsErm,
        WorkloadKind::EpidemicsSbm,
        WorkloadKind::Economics,
        WorkloadKind::Pagerank,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadKind::Gol => "gol",
            WorkloadKind::EpidemicsErm => "epidemics-erm",
            WorkloadKind::EpidemicsSbm => "epidemics-sbm",
            WorkloadKind::Economics => "economics",
            WorkloadKind::Pagerank => "pagerank",
        }
    }

    pub fn default_rounds(self) -> u64 {
        match self {
            WorkloadKind::EpidemicsErm | WorkloadKind::EpidemicsSbm => 50,
            _ => 200,
        }
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WorkloadKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WorkloadKind::ALL
            .into_iter()
            .find(|w| w.as_str() == s)
            .ok_or_else(|| "valid workloads: gol, epidemics-erm, epidemics-sbm, economics, pagerank".into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionerKind {
    Random,
    HashDiv,
    HashMod,
    Greedy,
}

impl PartitionerKind {
    pub const ALL: [PartitionerKind; 4] = [
        PartitionerKind::Random,
        PartitionerKind::HashDiv,
        PartitionerKind::HashMod,
        PartitionerKind::Greedy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PartitionerKind::Random => "random",
            PartitionerKind::HashDiv => "hash-div",
            PartitionerKind::HashMod => "hash-mod",
            PartitionerKind::Greedy => "greedy",
        }
    }
}

impl fmt::Display for PartitionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PartitionerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PartitionerKind::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| "valid partitioners: random, hash-div, hash-mod, greedy".into())
    }
}

/// One benchmark run. Keys accepted by [`RunConfig::set`] match the
/// command-line flag names.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub workload: WorkloadKind,
    pub agents: usize,
    pub partitions: usize,
    pub partitioner: PartitionerKind,
    pub mode: Mode,
    /// `None` picks the workload default.
    pub rounds: Option<u64>,
    pub threads: usize,
    pub seed: u64,
    pub repetitions: usize,
    /// Edge probability for ERM graphs and within SBM blocks; `None` picks
    /// 0.01 (0.05 for PageRank).
    pub edge_p: Option<f64>,
    pub sbm_blocks: usize,
    pub sbm_p_out: f64,
    pub beta: f64,
    pub recovery_rounds: u32,
    pub window: usize,
    pub jitter: f64,
    pub max_iteration: u64,
    pub tolerance_mode: bool,
    pub load_graph: Option<PathBuf>,
    pub save_graph: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            workload: WorkloadKind::Gol,
            agents: 10_000,
            partitions: 10,
            partitioner: PartitionerKind::Greedy,
            mode: Mode::Full,
            rounds: None,
            threads: 1,
            seed: 1,
            repetitions: 3,
            edge_p: None,
            sbm_blocks: 5,
            sbm_p_out: 0.0,
            beta: 0.05,
            recovery_rounds: 5,
            window: 10,
            jitter: 0.05,
            max_iteration: 30,
            tolerance_mode: false,
            load_graph: None,
            save_graph: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::Value {
        key: key.to_owned(),
        value: value.to_owned(),
        message: e.to_string(),
    })
}

impl RunConfig {
    pub const KEYS: [&'static str; 21] = [
        "workload",
        "agents",
        "partitions",
        "partitioner",
        "mode",
        "rounds",
        "threads",
        "seed",
        "repetitions",
        "edge-p",
        "sbm-blocks",
        "sbm-p-out",
        "beta",
        "recovery-rounds",
        "window",
        "jitter",
        "max-iteration",
        "tolerance-mode",
        "load-graph",
        "save-graph",
        "out-dir",
    ];

    pub fn rounds(&self) -> u64 {
        self.rounds.unwrap_or(self.workload.default_rounds())
    }

    pub fn edge_p(&self) -> f64 {
        self.edge_p.unwrap_or(match self.workload {
            WorkloadKind::Pagerank => 0.05,
            _ => 0.01,
        })
    }

    /// Sets one key. `out-dir` is accepted and ignored here; the command
    /// line consumes it.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "workload" => self.workload = parse(key, v)?,
            "agents" => self.agents = parse(key, v)?,
            "partitions" => self.partitions = parse(key, v)?,
            "partitioner" => self.partitioner = parse(key, v)?,
            "mode" => self.mode = parse(key, v)?,
            "rounds" => self.rounds = Some(parse(key, v)?),
            "threads" => self.threads = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "repetitions" => self.repetitions = parse(key, v)?,
            "edge-p" => self.edge_p = Some(parse(key, v)?),
            "sbm-blocks" => self.sbm_blocks = parse(key, v)?,
            "sbm-p-out" => self.sbm_p_out = parse(key, v)?,
            "beta" => self.beta = parse(key, v)?,
            "recovery-rounds" => self.recovery_rounds = parse(key, v)?,
            "window" => self.window = parse(key, v)?,
            "jitter" => self.jitter = parse(key, v)?,
            "max-iteration" => self.max_iteration = parse(key, v)?,
            "tolerance-mode" => self.tolerance_mode = parse(key, v)?,
            "load-graph" => self.load_graph = Some(PathBuf::from(v)),
            "save-graph" => self.save_graph = Some(PathBuf::from(v)),
            "out-dir" => {}
            _ => return Err(ConfigError::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.threads == 0 {
            return Err(ConfigError::Invalid("threads must be >= 1".into()));
        }
        if self.partitions == 0 {
            return Err(ConfigError::Invalid("partitions must be >= 1".into()));
        }
        if self.repetitions == 0 {
            return Err(ConfigError::Invalid("repetitions must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parses flat `key = value` lines. Blank lines and lines starting with `#`
/// are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                message: format!("expected key=value, found '{line}'"),
            });
        };
        let k = k.trim();
        if !RunConfig::KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.to_owned()));
        }
        out.push((k.to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let pairs = parse_config("# demo\nworkload = economics\nagents=101\n\nmode = full+pushdown\n").unwrap();
        let mut c = RunConfig::default();
        for (k, v) in &pairs {
            c.set(k, v).unwrap();
        }
        c.set("agents", "51").unwrap();
        assert_eq!(c.workload, WorkloadKind::Economics);
        assert_eq!(c.agents, 51);
        assert_eq!(c.mode, Mode::FullPushdown);
        assert_eq!(c.rounds(), 200);
        assert!(parse_config("agents 5").is_err());
        assert!(parse_config("speed=9").is_err());
        let err = c.set("mode", "fast").unwrap_err().to_string();
        assert!(err.contains("merge+cache"), "{err}");
    }
}
