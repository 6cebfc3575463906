//! Generators and property checks shared by the acceptance harness and the
//! proptest suites.
#![allow(dead_code)]

use std::sync::Arc;

use fuseforge::equations::{ComputeMethod, Message, TypeTag, Value};
use fuseforge::graph::{
    erm, partition_greedy, partition_hash, partition_random, ring, Graph, HashMode, Partitioning,
};
use fuseforge::optimizer::{optimize, Mode, Plan};
use fuseforge::pi::{normalize, Name, Process, Universe};
use fuseforge::rng::{self, Rng, SliceRandom, SplitMix64};
use fuseforge::runtime::{execute, execute_reference, ExecConfig};
use fuseforge::workloads::{
    gol, gol_from_cells, pagerank, power_iteration, AffineContract, EpidemicsContract,
    EpidemicsParams, GolContract, MarketContract, MinHopContract, PageRankContract,
    PageRankParams, Workload,
};

pub const FREE: [&str; 3] = ["a", "b", "c"];

/// A random process of depth at most `depth` over free names `a b c`.
/// Binders and restrictions use the two names in `bound`; two calls with
/// equal generator states and different `bound` pairs give alpha-equivalent
/// processes.
pub fn random_process(r: &mut SplitMix64, depth: u32, bound: [&str; 2]) -> Process {
    gen(r, depth, bound, &mut Vec::new())
}

fn any_name(r: &mut SplitMix64, scope: &[Name]) -> Name {
    let k = r.gen_range(0..FREE.len() + scope.len());
    match FREE.get(k) {
        Some(f) => Name::user(f),
        None => scope[k - FREE.len()],
    }
}

fn gen(r: &mut SplitMix64, depth: u32, bound: [&str; 2], scope: &mut Vec<Name>) -> Process {
    let choice = if depth == 0 {
        r.gen_range(0..3)
    } else {
        r.gen_range(0..8)
    };
    let sub = depth.saturating_sub(1);
    match choice {
        0 => Process::Nil,
        1 => {
            let channel = any_name(r, scope);
            let payload = (0..r.gen_range(0..=2)).map(|_| any_name(r, scope)).collect();
            let cont = if depth == 0 { Process::Nil } else { gen(r, sub, bound, scope) };
            Process::output(channel, payload, cont)
        }
        2 => {
            let channel = any_name(r, scope);
            let binders: Vec<Name> = bound[..r.gen_range(0..=2)].iter().map(|b| Name::user(b)).collect();
            let mark = scope.len();
            scope.extend(&binders);
            let cont = if depth == 0 { Process::Nil } else { gen(r, sub, bound, scope) };
            scope.truncate(mark);
            Process::input(channel, binders, cont)
        }
        3 => Process::par(gen(r, sub, bound, scope), gen(r, sub, bound, scope)),
        4 => Process::choice(gen(r, sub, bound, scope), gen(r, sub, bound, scope)),
        5 | 6 => {
            let n = Name::user(bound[r.gen_range(0..2)]);
            scope.push(n);
            let body = gen(r, sub, bound, scope);
            scope.pop();
            Process::restrict(n, body)
        }
        _ => Process::replicate(gen(r, sub, bound, scope)),
    }
}

/// Idempotence of normalization and every congruence axiom, at top level
/// and under an input prefix, on processes drawn from `seed`.
pub fn check_congruence(seed: u64) -> Result<(), String> {
    let u = Universe::new();
    let nf = |p: &Process| normalize(p, &u).map_err(|e| e.to_string());
    let mut r = rng::keyed(seed, 0xC0);
    let mut twin = r.clone();
    let p = random_process(&mut r, 5, ["x", "y"]);
    let p_alpha = random_process(&mut twin, 5, ["u", "v"]);
    let q = random_process(&mut r, 4, ["x", "y"]);
    let s = random_process(&mut r, 4, ["x", "y"]);

    let once = nf(&p)?;
    if nf(&once)? != once {
        return Err(format!("normalize not idempotent on {p}"));
    }

    let (a, b) = (Name::user("a"), Name::user("b"));
    let par = Process::par;
    let choice = Process::choice;
    let mut cases = vec![
        ("CHOICE-COMM", choice(p.clone(), q.clone()), choice(q.clone(), p.clone())),
        (
            "CHOICE-ASSOC",
            choice(choice(p.clone(), q.clone()), s.clone()),
            choice(p.clone(), choice(q.clone(), s.clone())),
        ),
        ("CHOICE-IDENT", choice(p.clone(), Process::Nil), p.clone()),
        ("PAR-COMM", par(p.clone(), q.clone()), par(q.clone(), p.clone())),
        (
            "PAR-ASSOC",
            par(par(p.clone(), q.clone()), s.clone()),
            par(p.clone(), par(q.clone(), s.clone())),
        ),
        ("PAR-IDENT", par(p.clone(), Process::Nil), p.clone()),
        (
            "RES-SWAP",
            Process::restrict(a, Process::restrict(b, p.clone())),
            Process::restrict(b, Process::restrict(a, p.clone())),
        ),
        ("RES-ANN", Process::restrict(a, Process::Nil), Process::Nil),
        (
            "REPLICATION",
            Process::replicate(q.clone()),
            par(q.clone(), Process::replicate(q.clone())),
        ),
        ("ALPHA-CONV", p.clone(), p_alpha),
    ];
    if let Some(n) = FREE.iter().map(|f| Name::user(f)).find(|n| !q.is_free(*n)) {
        cases.push((
            "RES-SCOPE",
            Process::restrict(n, par(q.clone(), s.clone())),
            par(q.clone(), Process::restrict(n, s.clone())),
        ));
    }
    for (axiom, lhs, rhs) in cases {
        let guard = |p: Process| Process::input(Name::user("c"), vec![Name::user("x")], p);
        if nf(&lhs)? != nf(&rhs)? {
            return Err(format!("{axiom}: {lhs}  vs  {rhs}"));
        }
        if nf(&guard(lhs.clone()))? != nf(&guard(rhs.clone()))? {
            return Err(format!("{axiom} under a prefix: {lhs}  vs  {rhs}"));
        }
    }
    Ok(())
}

/// Every partitioner yields a disjoint cover with sizes within the target.
pub fn check_partition_cover(seed: u64) -> Result<(), String> {
    let mut r = rng::keyed(seed, 0xAB);
    let n = r.gen_range(1..=300);
    let p = r.gen_range(0.0..0.05);
    let g = erm(n, p, seed).map_err(|e| e.to_string())?;
    let target = r.gen_range(1..=n);
    let runs: [(&str, Partitioning); 4] = [
        ("random", partition_random(&g, target, seed).map_err(|e| e.to_string())?),
        ("hash-div", partition_hash(&g, target, HashMode::Div).map_err(|e| e.to_string())?),
        ("hash-mod", partition_hash(&g, target, HashMode::Mod).map_err(|e| e.to_string())?),
        ("greedy", partition_greedy(&g, target, seed).map_err(|e| e.to_string())?),
    ];
    for (name, parts) in runs {
        let fail = |what: String| Err(format!("{name} n={n} target={target}: {what}"));
        let mut seen = vec![0u32; n];
        let mut edges = 0;
        for (i, part) in parts.parts.iter().enumerate() {
            if part.id as usize != i {
                return fail(format!("partition {i} has id {}", part.id));
            }
            if part.len() > target {
                return fail(format!("partition {i} has {} members", part.len()));
            }
            if !part.members.windows(2).all(|w| w[0] < w[1]) {
                return fail(format!("partition {i} members not sorted"));
            }
            for &v in &part.members {
                seen[v as usize] += 1;
                if parts.assignment[v as usize] != part.id {
                    return fail(format!("vertex {v} assignment disagrees"));
                }
            }
            edges += part.internal_edges.len() + part.cross_edges.len();
        }
        if let Some(v) = seen.iter().position(|&c| c != 1) {
            return fail(format!("vertex {v} covered {} times", seen[v]));
        }
        if edges != 2 * g.edge_count() {
            return fail(format!("{edges} directed edges for {} undirected", g.edge_count()));
        }
    }
    Ok(())
}

/// Contracts whose flags allow pushdown.
pub fn regroupable_contracts() -> Vec<Arc<dyn ComputeMethod>> {
    vec![
        Arc::new(AffineContract::add("f")),
        Arc::new(MinHopContract::new()),
        Arc::new(GolContract::new()),
        Arc::new(EpidemicsContract::new(EpidemicsParams::default()).unwrap()),
        Arc::new(MarketContract::new()),
        Arc::new(PageRankContract::new(PageRankParams {
            tolerance_mode: true,
            ..PageRankParams::default()
        })),
    ]
}

fn same_message(a: Option<Message>, b: Option<Message>) -> bool {
    match (a, b) {
        (Some(Message::Float(x)), Some(Message::Float(y))) => {
            (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-300)
        }
        _ => a == b,
    }
}

/// Folding a random multiset whole equals folding random groups and then
/// folding the partial results in random order.
pub fn check_fold_regrouping(seed: u64) -> Result<(), String> {
    let contracts = regroupable_contracts();
    let mut r = rng::keyed(seed, 0xF0);
    let c = &contracts[r.gen_range(0..contracts.len())];
    if !c.algebraic_flags().allows_regrouping() {
        return Err(format!("{} does not allow regrouping", c.id()));
    }
    let len = r.gen_range(0..=20);
    let mut ms: Vec<Message> = (0..len)
        .map(|_| match c.in_type() {
            TypeTag::Float => Message::Float(r.gen::<f64>()),
            TypeTag::Bool => Message::Bool(r.gen()),
            _ => Message::Int(r.gen_range(-1000..=1000)),
        })
        .collect();
    let whole = c.partial_compute(&ms);
    ms.shuffle(&mut r);
    let mut partials = Vec::new();
    let mut rest = &ms[..];
    while !rest.is_empty() {
        let k = r.gen_range(1..=rest.len());
        partials.extend(c.partial_compute(&rest[..k]));
        rest = &rest[k..];
    }
    partials.shuffle(&mut r);
    let regrouped = c.partial_compute(&partials);
    if same_message(whole, regrouped) {
        Ok(())
    } else {
        Err(format!("{}: {ms:?} folds to {whole:?} whole, {regrouped:?} regrouped", c.id()))
    }
}

fn run_plan(w: &Workload, plan: &Plan, rounds: u64) -> Vec<Value> {
    execute(plan, &w.initial, &ExecConfig::new(rounds, 2, 7))
        .expect("execution succeeds")
        .0
        .values
}

/// Two random intra-partition evaluation orders give identical states on a
/// double-buffered Game of Life.
pub fn check_double_buffer(seed_a: u64, seed_b: u64) -> Result<(), String> {
    let w = gol(30, 30, 11).unwrap();
    let parts = partition_greedy(&w.graph, 150, 3).unwrap();
    let mut a = optimize(&w, &parts, Mode::Full.passes()).unwrap();
    let mut b = optimize(&w, &parts, Mode::Full.passes()).unwrap();
    a.shuffle_merged_orders(seed_a);
    b.shuffle_merged_orders(seed_b);
    if a.partitions.iter().zip(&b.partitions).all(|(x, y)| x.merged_order == y.merged_order) {
        return Err("shuffles produced the same orders".into());
    }
    let va = run_plan(&w, &a, 10);
    let vb = run_plan(&w, &b, 10);
    let reference = execute_reference(&w, 10, 7).unwrap();
    if va != vb || va != reference {
        return Err(format!("orders {seed_a} and {seed_b} disagree"));
    }
    Ok(())
}

fn live_cells(values: &[Value], width: usize) -> Vec<(usize, usize)> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == Value::Bool(true))
        .map(|(i, _)| (i % width, i / width))
        .collect()
}

fn gol_after(width: usize, height: usize, alive: &[(usize, usize)], rounds: u64) -> Vec<(usize, usize)> {
    let mut cells = vec![false; width * height];
    for &(x, y) in alive {
        cells[y * width + x] = true;
    }
    let w = gol_from_cells(width, height, cells).unwrap();
    let parts = partition_hash(&w.graph, 16, HashMode::Div).unwrap();
    let plan = optimize(&w, &parts, Mode::Full.passes()).unwrap();
    live_cells(&run_plan(&w, &plan, rounds), width)
}

/// Block is still; blinker has period two.
pub fn check_gol_patterns() -> Result<(), String> {
    let block = [(2, 2), (3, 2), (2, 3), (3, 3)];
    for t in [1, 2, 7] {
        let got = gol_after(8, 8, &block, t);
        if got != block {
            return Err(format!("block after {t} rounds: {got:?}"));
        }
    }
    let horizontal = [(2, 4), (3, 4), (4, 4)];
    let vertical = [(3, 3), (3, 4), (3, 5)];
    for (t, want) in [(1, &vertical), (2, &horizontal), (5, &vertical), (8, &horizontal)] {
        let got = gol_after(8, 8, &horizontal, t);
        if got != want[..] {
            return Err(format!("blinker after {t} rounds: {got:?}"));
        }
    }
    Ok(())
}

pub fn pagerank_ranks(g: Graph, max_iteration: u64, rounds: u64, mode: Mode) -> Vec<f64> {
    let w = pagerank(
        g,
        PageRankParams {
            max_iteration,
            tolerance_mode: false,
        },
    )
    .unwrap();
    let parts = partition_hash(&w.graph, 2, HashMode::Div).unwrap();
    let plan = optimize(&w, &parts, mode.passes()).unwrap();
    run_plan(&w, &plan, rounds)
        .iter()
        .map(|v| match v {
            Value::PageRank(s) => s.pr,
            other => panic!("unexpected value {other:?}"),
        })
        .collect()
}

/// On a 3-cycle every rank converges to 1. Returns the largest deviation
/// from 1 and from the power-iteration oracle.
pub fn pagerank_triangle(max_iteration: u64) -> (f64, f64) {
    let rounds = max_iteration + 1;
    let pr = pagerank_ranks(ring(3).unwrap(), max_iteration, rounds, Mode::Full);
    let oracle = power_iteration(&ring(3).unwrap(), rounds as usize);
    let to_one = pr.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    let to_oracle = pr.iter().zip(&oracle).map(|(p, o)| (p - o).abs()).fold(0.0, f64::max);
    (to_one, to_oracle)
}
