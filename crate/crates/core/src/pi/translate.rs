//! Translation of behavioral equations into processes.

use super::{Name, PiError, Process, Universe};
use crate::equations::{BehavioralEquation, StateRef};

/// Reduction steps taken by one function application.
pub const APPLY_STEP_COST: u64 = 1;

/// Channel on which the scheduler hands referenced values to a recursive
/// state at the start of a superstep.
pub const RESUME: &str = "resume";
/// Channel on which a recursive state reports its name, new value and
/// reference set to the scheduler.
pub const YIELD: &str = "yield";

/// Channel name of a state: `p{agent}`, or `p{agent}_{generation}` for an
/// unrolled generation.
pub fn state_name(s: StateRef) -> Name {
    match s.generation {
        None => Name::user(&format!("p{}", s.agent)),
        Some(g) => Name::user(&format!("p{}_{g}", s.agent)),
    }
}

fn collector_binders(n: usize) -> Vec<Name> {
    (1..=n).map(|k| Name::user(&format!("m{k}"))).collect()
}

/// `p(x).(new d m)(i1(m).d<m> | ... | in(m).d<m> | d(m1)...d(mn).[[y = f(m1..mn, x)]].!q<y>)`
pub fn translate_nonrecursive(eq: &BehavioralEquation) -> Result<Process, PiError> {
    if eq.is_recursive() {
        return Err(PiError::WrongCase(format!(
            "{} is recursive; use the recursive translation",
            state_name(eq.lhs)
        )));
    }
    Ok(chained(eq, Process::Nil, true))
}

/// Builds the non-recursive shape with `then` running in parallel with the
/// replicated output of the result.
fn chained(eq: &BehavioralEquation, then: Process, replicated: bool) -> Process {
    let (x, d, m, y) = (
        Name::user("x"),
        Name::user("d"),
        Name::user("m"),
        Name::user("y"),
    );
    let p = state_name(eq.lhs);
    let q = state_name(eq.rhs);
    let ms = collector_binders(eq.references.len());

    let receivers = eq.references.iter().map(|i| {
        Process::input(
            state_name(*i),
            vec![m],
            Process::output(d, vec![m], Process::Nil),
        )
    });
    let mut args = ms.clone();
    args.push(x);
    let publish = Process::output(q, vec![y], Process::Nil);
    let publish = if replicated {
        Process::replicate(publish)
    } else {
        publish
    };
    let tail = if then == Process::Nil {
        publish
    } else {
        Process::par(publish, then)
    };
    let collector = ms.iter().rev().fold(
        Process::apply(eq.compute.0, args, y, tail),
        |acc, mk| Process::input(d, vec![*mk], acc),
    );
    Process::input(
        p,
        vec![x],
        Process::restrict_all([d, m], Process::par_all(receivers.chain([collector]))),
    )
}

/// Registers `P(resume, yield, p, i1..in) = resume(m1..mn).p(x).[[y = f(m1..mn, x)]].
/// (yield<p, y, i1..in>.P(..) | p<y>.0)` and returns the call that starts it.
pub fn translate_recursive(eq: &BehavioralEquation, u: &mut Universe) -> Result<Process, PiError> {
    if !eq.is_recursive() {
        return Err(PiError::WrongCase(format!(
            "{} := ... .{} is not recursive",
            state_name(eq.lhs),
            state_name(eq.rhs)
        )));
    }
    let (x, y) = (Name::user("x"), Name::user("y"));
    let (resume, yld) = (Name::user(RESUME), Name::user(YIELD));
    let p = state_name(eq.lhs);
    let refs: Vec<Name> = eq.references.iter().map(|r| state_name(*r)).collect();
    let ms = collector_binders(refs.len());

    let ident = format!("Rec_{p}");
    let mut params = vec![resume, yld, p];
    params.extend(refs.iter().copied());
    let again = Process::Call {
        ident: crate::symbol::Symbol::intern(&ident),
        args: params.clone(),
    };
    let mut report = vec![p, y];
    report.extend(refs.iter().copied());
    let mut args = ms.clone();
    args.push(x);
    let body = Process::input(
        resume,
        ms,
        Process::input(
            p,
            vec![x],
            Process::apply(
                eq.compute.0,
                args,
                y,
                Process::par(
                    Process::output(yld, report, again.clone()),
                    Process::output(p, vec![y], Process::Nil),
                ),
            ),
        ),
    );
    u.define(&ident, params, body)?;
    Ok(again)
}

/// The naive recursive composition: the non-recursive shape that restarts
/// itself after publishing, without any superstep synchronization.
pub fn translate_looping(eq: &BehavioralEquation, u: &mut Universe) -> Result<Process, PiError> {
    if !eq.is_recursive() {
        return Err(PiError::WrongCase(format!(
            "{} := ... .{} is not recursive",
            state_name(eq.lhs),
            state_name(eq.rhs)
        )));
    }
    let p = state_name(eq.lhs);
    let ident = format!("Loop_{p}");
    let mut params = vec![p];
    for r in &eq.references {
        let n = state_name(*r);
        if !params.contains(&n) {
            params.push(n);
        }
    }
    let again = Process::Call {
        ident: crate::symbol::Symbol::intern(&ident),
        args: params.clone(),
    };
    u.define(&ident, params, chained(eq, again.clone(), true))?;
    Ok(again)
}
