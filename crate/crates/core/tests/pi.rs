use std::collections::BTreeSet;

use fuseforge::equations::{BehavioralEquation, ComputeMethodId, StateRef};
use fuseforge::pi::{
    parse_program, reduce_all, translate_looping, translate_nonrecursive, translate_recursive, Name,
    PiError, Process, ReductionState, Universe,
};

fn outputs(p: &Process, channel: &str, out: &mut BTreeSet<Vec<i64>>) {
    match p {
        Process::Output { channel: c, payload, cont } => {
            let values: Option<Vec<i64>> = payload.iter().map(Name::literal_value).collect();
            if let (true, Some(v)) = (c.hint() == channel, values) {
                out.insert(v);
            }
            outputs(cont, channel, out);
        }
        Process::Input { cont, .. } | Process::Apply { cont, .. } => outputs(cont, channel, out),
        Process::Choice(a, b) | Process::Parallel(a, b) => {
            outputs(a, channel, out);
            outputs(b, channel, out);
        }
        Process::Restriction(_, b) | Process::Replication(b) => outputs(b, channel, out),
        Process::Nil | Process::Call { .. } => {}
    }
}

fn plus() -> Universe {
    let mut u = Universe::new();
    u.register_fn("f", |a| a.iter().sum());
    u
}

#[test]
fn translations_check_their_case() {
    let mut u = plus();
    let f = ComputeMethodId::new("f");
    let rec = BehavioralEquation::recursive(1, f, [2]).unwrap();
    let step = BehavioralEquation::new(StateRef::agent(1), f, vec![StateRef::agent(2)], StateRef::agent(3)).unwrap();
    assert!(matches!(translate_nonrecursive(&rec), Err(PiError::WrongCase(_))));
    assert!(matches!(translate_recursive(&step, &mut u), Err(PiError::WrongCase(_))));
    assert!(matches!(translate_looping(&step, &mut u), Err(PiError::WrongCase(_))));
}

#[test]
fn nonrecursive_step_publishes_to_the_next_state() {
    let u = plus();
    let step = BehavioralEquation::new(
        StateRef::agent(1),
        ComputeMethodId::new("f"),
        vec![StateRef::agent(2), StateRef::agent(4)],
        StateRef::at(1, 1),
    )
    .unwrap();
    let init = |a: &str, v| Process::replicate(Process::output(Name::user(a), vec![Name::lit(v)], Process::Nil));
    let p = Process::par_all([init("p1", 1), init("p2", 10), init("p4", 100), translate_nonrecursive(&step).unwrap()]);
    let ex = reduce_all(&ReductionState::new(p), 100, &u).unwrap();
    assert_eq!(ex.terminals.len(), 1);
    let mut seen = BTreeSet::new();
    outputs(&ex.terminals[0].process, "p1_1", &mut seen);
    assert_eq!(seen, BTreeSet::from([vec![111]]));
}

#[test]
fn recursive_state_waits_for_resume_and_reports_on_yield() {
    let mut u = plus();
    let eq = BehavioralEquation::recursive(1, ComputeMethodId::new("f"), [2]).unwrap();
    let start = translate_recursive(&eq, &mut u).unwrap();
    let stuck = reduce_all(
        &ReductionState::new(Process::par(start.clone(), Process::output(Name::user("p1"), vec![Name::lit(5)], Process::Nil))),
        50,
        &u,
    )
    .unwrap();
    let mut none = BTreeSet::new();
    outputs(&stuck.terminals[0].process, "done", &mut none);
    assert!(none.is_empty(), "no progress without resume");

    let program = parse_program(
        "(| (out resume (6)) (out p1 (5)) (in yield (who value r1) (out done (value))))",
        u,
    )
    .unwrap();
    let ex = reduce_all(
        &ReductionState::new(Process::par(start, program.process)),
        50,
        &program.universe,
    )
    .unwrap();
    assert_eq!(ex.terminals.len(), 1);
    let (mut done, mut published) = (BTreeSet::new(), BTreeSet::new());
    outputs(&ex.terminals[0].process, "done", &mut done);
    outputs(&ex.terminals[0].process, "p1", &mut published);
    assert_eq!(done, BTreeSet::from([vec![11]]));
    assert_eq!(published, BTreeSet::from([vec![11]]));
}

#[test]
fn looping_composition_never_settles() {
    let mut u = plus();
    let eq = BehavioralEquation::recursive(1, ComputeMethodId::new("f"), [1]).unwrap();
    let p = Process::par(
        Process::replicate(Process::output(Name::user("p1"), vec![Name::lit(1)], Process::Nil)),
        translate_looping(&eq, &mut u).unwrap(),
    );
    let ex = reduce_all(&ReductionState::new(p), 12, &u).unwrap();
    assert!(ex.non_terminating());
}

#[test]
fn dram_cell_loses_the_overwritten_value() {
    let prog = parse_program(
        "(def (B i o) (in i (x) (+ (out o (x) (call B i o)) (call B i o))))
         (new (i o) (| (call B i o) (out i (5) (out i (6) (in o (x) (out seen (x)))))))",
        Universe::new(),
    )
    .unwrap();
    let ex = reduce_all(&ReductionState::new(prog.process), 20, &prog.universe).unwrap();
    let mut seen = BTreeSet::new();
    for t in &ex.terminals {
        outputs(&t.process, "seen", &mut seen);
    }
    assert_eq!(seen, BTreeSet::from([vec![6]]));
}
