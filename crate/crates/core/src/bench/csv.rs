use std::fs::OpenOptions;
use std::io::{Read, Write};
use std::path::Path;

use super::{BenchError, MetricsRow};

pub const CSV_HEADER: &str = "workload,agents,partitions,partitioner,mode,rounds,threads,seed,\
mean_time_per_round_ms,total_rounds,logical_messages,wire_messages,wire_values,wire_bytes,\
optimizer_time_ms,opt_refine_ms,opt_pushdown_ms,opt_synthesize_ms,opt_rewrite_remote_ms,\
opt_rewrite_local_ms,opt_merge_ms,graph_build_time_ms,checksum";

fn float(v: f64) -> String {
    format!("{v:.5e}")
}

/// One CSV line without the trailing newline.
pub fn format_row(r: &MetricsRow) -> String {
    let c = &r.config;
    let t = &r.optimizer;
    let d = |d: std::time::Duration| float(d.as_secs_f64() * 1e3);
    [
        c.workload.to_string(),
        c.agents.to_string(),
        c.partitions.to_string(),
        c.partitioner.to_string(),
        c.mode.to_string(),
        r.rounds.to_string(),
        c.threads.to_string(),
        c.seed.to_string(),
        r.mean_time_per_round_ms.map(float).unwrap_or_default(),
        r.rounds.to_string(),
        r.logical_messages.to_string(),
        r.wire_messages.to_string(),
        r.wire_values.to_string(),
        r.wire_bytes.to_string(),
        d(t.total),
        d(t.refine),
        d(t.pushdown),
        d(t.synthesize),
        d(t.rewrite_remote),
        d(t.rewrite_local),
        d(t.merge),
        float(r.graph_build_time_ms),
        format!("{:016x}", r.checksum),
    ]
    .join(",")
}

/// Appends `row`, writing the header first when the file is new or empty.
/// An existing file must start with the same header.
pub fn append_row(path: &Path, row: &MetricsRow) -> Result<(), BenchError> {
    let io = |source| BenchError::Io {
        path: path.to_owned(),
        source,
    };
    let mut f = OpenOptions::new()
        .read(true)
        .append(true)
        .create(true)
        .open(path)
        .map_err(io)?;
    let mut existing = String::new();
    f.read_to_string(&mut existing).map_err(io)?;
    let mut chunk = String::new();
    if existing.is_empty() {
        chunk.push_str(CSV_HEADER);
        chunk.push('\n');
    } else if existing.lines().next() != Some(CSV_HEADER) {
        return Err(io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "existing file has a different header",
        )));
    }
    chunk.push_str(&format_row(row));
    chunk.push('\n');
    f.write_all(chunk.as_bytes()).map_err(io)
}
