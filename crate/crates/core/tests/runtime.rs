use std::sync::Arc;

use fuseforge::equations::{Message, Value};
use fuseforge::graph::{complete, partition_hash, HashMode, Partitioning};
use fuseforge::optimizer::{optimize, Mode};
use fuseforge::runtime::{
    checksum, deliver, execute, ExecConfig, RuntimeError, PARTITION_HEADER_BYTES, WIRE_HEADER_BYTES,
};
use fuseforge::workloads::{gol, AffineContract, GolContract, Workload};

#[test]
fn zero_rounds_returns_the_initial_state() {
    let w = gol(5, 5, 3).unwrap();
    let plan = optimize(&w, &Partitioning::single(&w.graph), Mode::Full.passes()).unwrap();
    let (state, metrics) = execute(&plan, &w.initial, &ExecConfig::new(0, 1, 3)).unwrap();
    assert_eq!(state.values, w.initial);
    assert_eq!(state.checksum(), checksum(&w.initial));
    assert!(metrics.mean_round_time().is_none());
}

#[test]
fn initial_values_and_threads_are_checked() {
    let w = gol(5, 5, 3).unwrap();
    let plan = optimize(&w, &Partitioning::single(&w.graph), Mode::Unopt.passes()).unwrap();
    assert!(matches!(
        execute(&plan, &w.initial[..3], &ExecConfig::new(1, 1, 0)),
        Err(RuntimeError::InitialValues(3, 25))
    ));
    assert!(matches!(
        execute(&plan, &w.initial, &ExecConfig::new(1, 0, 0)),
        Err(RuntimeError::Config(_))
    ));
}

#[test]
fn wrong_value_type_is_reported() {
    let w = gol(4, 4, 3).unwrap();
    let plan = optimize(&w, &Partitioning::single(&w.graph), Mode::Unopt.passes()).unwrap();
    let mut bad = w.initial.clone();
    bad[5] = Value::Int(1);
    assert!(execute(&plan, &bad, &ExecConfig::new(1, 1, 0)).is_err());
}

#[test]
fn deliver_orders_by_sender() {
    let c = GolContract::new();
    let got = deliver(&c, 0, &[(5, Message::Int(1)), (-2, Message::Int(0)), (3, Message::Int(1))]).unwrap();
    assert_eq!(got, [Message::Int(0), Message::Int(1), Message::Int(1)]);
    assert!(deliver(&c, 0, &[(1, Message::Float(0.5))]).is_err());
}

fn two_agents() -> Workload {
    let f: Arc<dyn fuseforge::equations::ComputeMethod> = Arc::new(AffineContract::add("f"));
    Workload::from_graph("pair", complete(2), |_| f.clone(), vec![Value::Int(1), Value::Int(2)]).unwrap()
}

#[test]
fn wire_accounting_per_mode() {
    let w = two_agents();
    let parts = Partitioning::from_assignment(&w.graph, vec![0, 1]);
    let run = |mode: Mode| {
        let plan = optimize(&w, &parts, mode.passes()).unwrap();
        let (state, m) = execute(&plan, &w.initial, &ExecConfig::new(3, 1, 0)).unwrap();
        (state.values, m)
    };
    let (values, unopt) = run(Mode::Unopt);
    // (1,2) -> (3,3) -> (6,6) -> (12,12)
    assert_eq!(values, [Value::Int(12), Value::Int(12)]);
    for r in &unopt.rounds {
        assert_eq!((r.logical_messages, r.wire_units, r.wire_values), (2, 2, 2));
        assert_eq!(r.wire_bytes, 2 * (WIRE_HEADER_BYTES + 8));
        assert_eq!((r.mailbox_sent, r.mailbox_consumed), (2, 2));
    }
    let (_, merged) = run(Mode::Merge);
    assert_eq!(
        merged.rounds[0].wire_bytes,
        2 * (WIRE_HEADER_BYTES + PARTITION_HEADER_BYTES + 8)
    );
    let (values, full) = run(Mode::Full);
    assert_eq!(values, [Value::Int(12), Value::Int(12)]);
    for r in &full.rounds {
        assert_eq!((r.wire_units, r.wire_values), (2, 2));
        assert_eq!(r.wire_bytes, 2 * (WIRE_HEADER_BYTES + 8));
        assert_eq!(r.mailbox_sent, 0);
    }
}

#[test]
fn watched_agent_counts_inbound_units() {
    let w = gol(6, 6, 2).unwrap();
    let parts = partition_hash(&w.graph, 12, HashMode::Div).unwrap();
    let mut cfg = ExecConfig::new(2, 1, 0);
    cfg.watch = vec![0];
    let plan = optimize(&w, &parts, Mode::Unopt.passes()).unwrap();
    let (_, m) = execute(&plan, &w.initial, &cfg).unwrap();
    // Agent 0's remote neighbors sit in the last two rows.
    let remote = w.graph.neighbors(0).iter().filter(|&&v| parts.partition_of(v) != 0).count() as u64;
    assert_eq!(remote, 3);
    assert!(m.rounds.iter().all(|r| r.watched_inbound == [remote]));
}
