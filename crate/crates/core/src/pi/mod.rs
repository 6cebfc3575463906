//! A π-calculus core used as an executable semantic oracle.
//!
//! Processes are built with [`Process`] constructors or parsed from the
//! s-expression syntax in [`parse_program`]. [`normalize`] computes a
//! canonical representative under structural congruence, [`reduce_step`]
//! enumerates every one-step reduction, and [`reduce_all`] explores the whole
//! reduction graph of small systems. [`translate_nonrecursive`] and
//! [`translate_recursive`] turn behavioral equations into processes so that
//! tiny BSP systems can be checked against the runtime.

mod normalize;
mod parse;
mod process;
mod reduce;
mod translate;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

pub use normalize::{normalize, strip_top_restrictions};
pub use parse::{parse_process, parse_program, Program};
pub use process::{Name, NameKind, Process};
pub use reduce::{
    probe_termination, reduce_all, reduce_all_with, reduce_step, Exploration, ExploreLimits,
    Label, Probe, ReductionState, Successor, DEFAULT_NODE_LIMIT,
};
pub use translate::{
    state_name, translate_looping, translate_nonrecursive, translate_recursive, APPLY_STEP_COST,
    RESUME, YIELD,
};

use crate::symbol::Symbol;

/// Host function bound to a [`Process::Apply`] node. Arguments arrive in the
/// order written in the process (for translated equations: received
/// messages first, the state's own value last).
pub type HostFn = Arc<dyn Fn(&[i64]) -> i64 + Send + Sync>;

#[derive(Debug, thiserror::Error)]
pub enum PiError {
    #[error("input on {channel} binds {binder} twice")]
    DuplicateBinders { channel: String, binder: String },
    #[error("unknown process identifier {0}")]
    UnknownDefinition(String),
    #[error("{ident} expects {expected} arguments, got {got}")]
    CallArity {
        ident: String,
        expected: usize,
        got: usize,
    },
    #[error("definition {ident} has free names {names} not among its parameters")]
    OpenDefinition { ident: String, names: String },
    #[error("unguarded recursion while unfolding {0}")]
    UnguardedRecursion(String),
    #[error("arity mismatch on channel {channel}: output sends {sent}, input binds {expected}")]
    ArityMismatch {
        channel: String,
        sent: usize,
        expected: usize,
    },
    #[error("no host function registered for {0}")]
    UnknownFunction(String),
    #[error("wrong translation case: {0}")]
    WrongCase(String),
    #[error("state space exceeded {limit} states ({} irreducible found so far)", partial.terminals.len())]
    StateSpace {
        limit: usize,
        partial: Box<Exploration>,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Debug)]
pub struct Definition {
    pub params: Vec<Name>,
    pub body: Process,
}

/// Process definitions and host functions shared by a family of processes.
#[derive(Clone, Default)]
pub struct Universe {
    defs: HashMap<Symbol, Definition>,
    funcs: HashMap<Symbol, HostFn>,
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Universe")
            .field("defs", &self.defs.keys().collect::<Vec<_>>())
            .field("funcs", &self.funcs.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Universe {
    pub fn new() -> Self {
        Self::default()
    }

    /// Universe with the arithmetic functions used by the CLI grammar:
    /// `add` (sum of all arguments), `sub` (last argument minus the sum of
    /// the others), `mul`, `min`, `max`.
    pub fn with_builtins() -> Self {
        let mut u = Self::new();
        u.register_fn("add", |a| a.iter().sum());
        u.register_fn("sub", |a| match a.split_last() {
            Some((x, ms)) => x - ms.iter().sum::<i64>(),
            None => 0,
        });
        u.register_fn("mul", |a| a.iter().product());
        u.register_fn("min", |a| a.iter().copied().min().unwrap_or(0));
        u.register_fn("max", |a| a.iter().copied().max().unwrap_or(0));
        u
    }

    pub fn register_fn(
        &mut self,
        name: &str,
        f: impl Fn(&[i64]) -> i64 + Send + Sync + 'static,
    ) -> Symbol {
        let sym = Symbol::intern(name);
        self.funcs.insert(sym, Arc::new(f));
        sym
    }

    pub fn function(&self, name: Symbol) -> Option<&HostFn> {
        self.funcs.get(&name)
    }

    /// Registers `ident(params) = body`. The body may only mention its
    /// parameters freely.
    pub fn define(&mut self, ident: &str, params: Vec<Name>, body: Process) -> Result<(), PiError> {
        let allowed: BTreeSet<Name> = params.iter().copied().collect();
        let open: Vec<String> = body
            .free_names()
            .into_iter()
            .filter(|n| !allowed.contains(n) && n.literal_value().is_none())
            .map(|n| n.to_string())
            .collect();
        if !open.is_empty() {
            return Err(PiError::OpenDefinition {
                ident: ident.to_owned(),
                names: open.join(", "),
            });
        }
        self.defs
            .insert(Symbol::intern(ident), Definition { params, body });
        Ok(())
    }

    pub fn definition(&self, ident: Symbol) -> Option<&Definition> {
        self.defs.get(&ident)
    }

    /// Body of `ident` instantiated with `args`, binders freshened.
    pub fn unfold(&self, ident: Symbol, args: &[Name]) -> Result<Process, PiError> {
        let def = self
            .defs
            .get(&ident)
            .ok_or_else(|| PiError::UnknownDefinition(ident.to_string()))?;
        if def.params.len() != args.len() {
            return Err(PiError::CallArity {
                ident: ident.to_string(),
                expected: def.params.len(),
                got: args.len(),
            });
        }
        let map = def
            .params
            .iter()
            .copied()
            .zip(args.iter().copied())
            .collect();
        Ok(def.body.freshen().substitute(&map))
    }
}
