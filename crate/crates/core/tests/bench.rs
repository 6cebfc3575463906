use fuseforge::bench::{self, append_row, format_row, parse_config, RunConfig, WorkloadKind, CSV_HEADER};
use fuseforge::optimizer::Mode;

fn small(mode: Mode) -> RunConfig {
    RunConfig {
        workload: WorkloadKind::Gol,
        agents: 400,
        partitions: 1,
        mode,
        rounds: Some(10),
        seed: 7,
        repetitions: 2,
        ..RunConfig::default()
    }
}

#[test]
fn unopt_and_full_agree_on_one_partition() {
    let a = bench::run(&small(Mode::Unopt)).unwrap().row;
    let b = bench::run(&small(Mode::Full)).unwrap().row;
    assert_eq!(a.checksum, b.checksum);
    assert_eq!(bench::run(&small(Mode::Full)).unwrap().row.checksum, b.checksum);
}

#[test]
fn rows_follow_the_documented_layout() {
    let row = bench::run(&small(Mode::Merge)).unwrap().row;
    let line = format_row(&row);
    let fields: Vec<&str> = line.split(',').collect();
    assert_eq!(fields.len(), CSV_HEADER.split(',').count());
    assert_eq!(&fields[..8], ["gol", "400", "1", "greedy", "merge", "10", "1", "7"]);
    let mean = fields[8];
    let mantissa = mean.split('e').next().unwrap();
    assert_eq!(mantissa.replace(['.', '-'], "").len(), 6, "{mean}");
    assert_eq!(fields[22].len(), 16);
    assert_eq!(u64::from_str_radix(fields[22], 16).unwrap(), row.checksum);
}

#[test]
fn zero_rounds_has_no_mean_time() {
    let mut cfg = small(Mode::Full);
    cfg.rounds = Some(0);
    let row = bench::run(&cfg).unwrap().row;
    assert_eq!(row.mean_time_per_round_ms, None);
    assert_eq!(format_row(&row).split(',').nth(8), Some(""));
}

#[test]
fn csv_appends_under_one_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let row = bench::run(&small(Mode::Unopt)).unwrap().row;
    append_row(&path, &row).unwrap();
    append_row(&path, &row).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| *l == CSV_HEADER).count(), 1);
    assert_eq!(text.lines().count(), 3);

    let other = dir.path().join("other.csv");
    std::fs::write(&other, "a,b\n").unwrap();
    let err = append_row(&other, &row).unwrap_err().to_string();
    assert!(err.contains("other.csv"), "{err}");
}

#[test]
fn sweep_over_threads_and_modes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let rows = bench::sweep(&small(Mode::Full), bench::Axis::Threads, &["1".into()], &path).unwrap();
    assert_eq!(rows.len(), 1);
    let modes: Vec<String> = Mode::names().map(str::to_owned).collect();
    let rows = bench::sweep(&small(Mode::Full), bench::Axis::Mode, &modes, &path).unwrap();
    assert!(rows.iter().all(|r| r.checksum == rows[0].checksum));
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 9);
}

#[test]
fn workload_defaults_and_bad_grids() {
    let pairs = parse_config("workload = epidemics-sbm\nagents = 500\n").unwrap();
    let mut cfg = RunConfig::default();
    for (k, v) in &pairs {
        cfg.set(k, v).unwrap();
    }
    assert_eq!(cfg.rounds(), 50);
    assert_eq!(cfg.partitioner.as_str(), "greedy");
    let mut gol = small(Mode::Full);
    gol.agents = 7;
    assert!(bench::run(&gol).is_err());
}
