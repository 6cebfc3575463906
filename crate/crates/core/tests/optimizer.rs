use fuseforge::equations::{StateRef, Value};
use fuseforge::graph::{path, partition_hash, HashMode, Partitioning};
use fuseforge::optimizer::{optimize, Buffer, Mode, OptimizerError, PassSet, Route, StagedExpr};
use fuseforge::workloads::{economics, gol, pagerank, EconomicsParams, PageRankParams, Workload};

fn halves(w: &Workload) -> Partitioning {
    partition_hash(&w.graph, w.agent_count().div_ceil(2), HashMode::Div).unwrap()
}

#[test]
fn rewrite_remote_without_synthesize_is_rejected() {
    let w = gol(6, 6, 1).unwrap();
    let err = optimize(&w, &halves(&w), PassSet::REFINE | PassSet::REWRITE_REMOTE).unwrap_err();
    assert!(matches!(
        err,
        OptimizerError::MissingPrerequisite {
            pass: "rewrite-remote",
            requires: "synthesize"
        }
    ));
    assert!(optimize(&w, &halves(&w), PassSet::SYNTHESIZE).is_err());
    assert!(optimize(&w, &halves(&w), PassSet::PUSHDOWN).is_err());
}

#[test]
fn partitioning_must_cover_the_workload() {
    let w = gol(6, 6, 1).unwrap();
    let other = gol(3, 3, 1).unwrap();
    let parts = Partitioning::single(&other.graph);
    assert!(matches!(
        optimize(&w, &parts, PassSet::empty()),
        Err(OptimizerError::Coverage { partitioned: 9, agents: 36 })
    ));
}

#[test]
fn unopt_routes_everything_through_the_mailbox() {
    let w = gol(6, 6, 1).unwrap();
    let plan = optimize(&w, &halves(&w), Mode::Unopt.passes()).unwrap();
    assert!(plan.caches.is_empty());
    for p in &plan.partitions {
        assert!(!p.merged && !p.double_buffered);
        for a in &p.agents {
            assert_eq!(a.routes.len(), 8);
            assert!(a.routes.iter().all(|(_, r)| *r == Route::Mailbox));
        }
    }
}

#[test]
fn one_cache_per_directed_partition_pair() {
    // A path split in two: only agents 2 and 3 talk across.
    let w = Workload::from_graph(
        "path",
        path(6),
        |_| std::sync::Arc::new(fuseforge::workloads::MinHopContract::new()),
        (0..6).map(Value::Int).collect(),
    )
    .unwrap();
    let parts = halves(&w);
    let plan = optimize(&w, &parts, Mode::MergeCache.passes()).unwrap();
    assert_eq!(plan.caches.len(), 2);
    let c01 = plan.caches.iter().find(|c| c.source == 0).unwrap();
    assert_eq!((c01.dest, c01.schema.clone()), (1, vec![StateRef::agent(2)]));
    let c10 = plan.caches.iter().find(|c| c.source == 1).unwrap();
    assert_eq!((c10.dest, c10.schema.clone()), (0, vec![StateRef::agent(3)]));
    assert_eq!(
        plan.agent(3).routes,
        vec![
            (StateRef::agent(2), Route::CacheUnpack { cache: c01.id, offset: 0 }),
            (StateRef::agent(4), Route::Mailbox),
        ]
    );

    let full = optimize(&w, &parts, Mode::Full.passes()).unwrap();
    let staged = full.agent(3).staged().to_string();
    assert_eq!(
        full.agent(3).routes,
        vec![
            (StateRef::agent(2), Route::CacheRead { cache: c01.id, offset: 0 }),
            (StateRef::agent(4), Route::Local),
        ]
    );
    assert!(full.partitions.iter().all(|p| p.merged && p.double_buffered));
    assert!(matches!(
        full.agent(3).program[1].expr,
        StagedExpr::LocalRead { buffer: Buffer::Previous, .. }
    ));
    assert!(staged.contains("op"), "{staged}");
}

#[test]
fn dynamic_references_stay_in_the_mailbox() {
    let w = gol(6, 6, 1).unwrap().with_all_dynamic();
    let plan = optimize(&w, &halves(&w), Mode::Full.passes()).unwrap();
    assert!(plan.caches.is_empty());
    for p in &plan.partitions {
        for a in &p.agents {
            assert_eq!(a.refined.dynamic.len(), 8);
            assert!(a.routes.iter().all(|(_, r)| r.via_mailbox()));
        }
    }
}

#[test]
fn pushdown_places_one_aggregator_per_remote_partition() {
    let w = economics(41, EconomicsParams::default()).unwrap();
    let parts = partition_hash(&w.graph, 10, HashMode::Div).unwrap();
    let plan = optimize(&w, &parts, Mode::FullPushdown.passes()).unwrap();
    let aggs: Vec<_> = plan.aggregators().collect();
    assert_eq!(aggs.len(), 4);
    let mut ids: Vec<i64> = aggs.iter().map(|a| a.id).collect();
    ids.sort_unstable();
    assert_eq!(ids, [-4, -3, -2, -1]);
    for a in &aggs {
        assert_eq!(a.target, 0);
        assert!(a.senders.iter().all(|&s| parts.partition_of(s) == a.host));
        assert_ne!(a.host, parts.partition_of(0));
    }
    let market = plan.agent(0);
    let aggregate_inputs = market
        .program
        .iter()
        .filter(|i| i.sender < 0)
        .count();
    assert_eq!(aggregate_inputs, 4);
}

#[test]
fn pushdown_requires_algebraic_flags() {
    let mut w = pagerank(fuseforge::graph::ring(6).unwrap(), PageRankParams::default()).unwrap();
    w.pushdown_targets = vec![0];
    let parts = partition_hash(&w.graph, 3, HashMode::Div).unwrap();
    assert!(matches!(
        optimize(&w, &parts, Mode::FullPushdown.passes()),
        Err(OptimizerError::PushdownPrecondition { target: 0, .. })
    ));
}

#[test]
fn merged_forest_shares_cache_leaves() {
    let w = gol(6, 6, 1).unwrap();
    let plan = optimize(&w, &halves(&w), Mode::Full.passes()).unwrap();
    let p = &plan.partitions[0];
    let forest = p.merged_forest(&plan.owner);
    let trees: usize = p.agents.iter().map(|a| a.tree(p.id(), &plan.owner).node_count()).sum();
    assert!(forest.node_count() < trees);
}
