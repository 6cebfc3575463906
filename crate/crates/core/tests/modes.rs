use fuseforge::equations::Value;
use fuseforge::graph::{erm, partition_greedy, partition_hash, partition_random, HashMode, Partitioning};
use fuseforge::optimizer::{optimize, Mode, PassSet};
use fuseforge::runtime::{checksum, execute, execute_reference, ExecConfig};
use fuseforge::workloads::{
    economics, epidemics, gol, pagerank, EconomicsParams, EpidemicsParams, PageRankParams,
    Workload,
};

fn run(w: &Workload, parts: &Partitioning, passes: PassSet, rounds: u64, threads: usize) -> Vec<Value> {
    let plan = optimize(w, parts, passes).unwrap();
    execute(&plan, &w.initial, &ExecConfig::new(rounds, threads, 7)).unwrap().0.values
}

fn all_modes_match_reference(w: &Workload, parts: &Partitioning, rounds: u64) {
    let want = execute_reference(w, rounds, 7).unwrap();
    for mode in Mode::ALL {
        let got = run(w, parts, mode.passes(), rounds, 2);
        assert_eq!(checksum(&got), checksum(&want), "{} mode {mode}", w.name);
    }
}

#[test]
fn gol_modes_agree() {
    let w = gol(20, 20, 7).unwrap();
    let parts = partition_greedy(&w.graph, 40, 7).unwrap();
    all_modes_match_reference(&w, &parts, 10);
}

#[test]
fn epidemics_modes_agree() {
    let g = erm(300, 0.02, 7).unwrap();
    let w = epidemics(g, EpidemicsParams::default(), 7).unwrap();
    let parts = partition_random(&w.graph, 50, 7).unwrap();
    all_modes_match_reference(&w, &parts, 20);
}

#[test]
fn economics_modes_agree() {
    let w = economics(301, EconomicsParams::default()).unwrap();
    let parts = partition_hash(&w.graph, 50, HashMode::Mod).unwrap();
    all_modes_match_reference(&w, &parts, 30);
}

#[test]
fn pagerank_modes_agree_without_pushdown() {
    let g = erm(120, 0.08, 3).unwrap();
    let w = pagerank(g, PageRankParams::default()).unwrap();
    let parts = partition_greedy(&w.graph, 30, 3).unwrap();
    all_modes_match_reference(&w, &parts, 35);
}

#[test]
fn dynamic_references_use_the_mailbox() {
    let w = gol(12, 12, 5).unwrap().with_all_dynamic();
    let parts = partition_greedy(&w.graph, 30, 5).unwrap();
    all_modes_match_reference(&w, &parts, 6);
}

#[test]
fn thread_count_does_not_change_results() {
    let g = erm(200, 0.05, 11).unwrap();
    let w = epidemics(g, EpidemicsParams { beta: 0.2, recovery_rounds: 3 }, 11).unwrap();
    let parts = partition_greedy(&w.graph, 25, 11).unwrap();
    for mode in [Mode::Unopt, Mode::Full, Mode::FullPushdown] {
        let one = run(&w, &parts, mode.passes(), 15, 1);
        for threads in [2, 8] {
            assert_eq!(run(&w, &parts, mode.passes(), 15, threads), one, "{mode} x{threads}");
        }
    }
}
