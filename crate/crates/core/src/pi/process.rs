use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use crate::symbol::Symbol;

/// Identity of a name. Equality, ordering and hashing of [`Name`] use only
/// this part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NameKind {
    /// A name that stands for an integer value. Results of function
    /// applications are substituted as literals.
    Lit(i64),
    /// A name written by the user.
    User(Symbol),
    /// A name generated while opening a restriction or a replicated copy.
    Fresh(u32),
    /// A bound name in canonical form, numbered by binder nesting level.
    Bound(u32),
}

/// A π-calculus name (channel or value).
///
/// Every name carries a display hint: the user text it descends from. The
/// hint never takes part in comparisons, so alpha-equivalent processes
/// compare equal even when their bound names were spelled differently.
#[derive(Clone, Copy)]
pub struct Name {
    pub kind: NameKind,
    pub hint: Symbol,
}

static FRESH: AtomicU32 = AtomicU32::new(0);

impl Name {
    pub fn user(text: &str) -> Name {
        let sym = Symbol::intern(text);
        Name {
            kind: NameKind::User(sym),
            hint: sym,
        }
    }

    pub fn lit(value: i64) -> Name {
        Name {
            kind: NameKind::Lit(value),
            hint: Symbol::intern(&value.to_string()),
        }
    }

    /// A name distinct from every user, literal and previously generated name.
    pub fn fresh(hint: Symbol) -> Name {
        Name {
            kind: NameKind::Fresh(FRESH.fetch_add(1, AtomicOrdering::Relaxed)),
            hint,
        }
    }

    pub(crate) fn bound(level: u32, hint: Symbol) -> Name {
        Name {
            kind: NameKind::Bound(level),
            hint,
        }
    }

    pub fn literal_value(&self) -> Option<i64> {
        match self.kind {
            NameKind::Lit(v) => Some(v),
            _ => None,
        }
    }

    pub fn hint(&self) -> &'static str {
        self.hint.as_str()
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}
impl Eq for Name {}

impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Name {
    fn cmp(&self, other: &Self) -> Ordering {
        self.kind.cmp(&other.kind)
    }
}
impl Hash for Name {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NameKind::Lit(v) => write!(f, "{v}"),
            NameKind::User(s) => write!(f, "{s}"),
            NameKind::Fresh(n) => write!(f, "{}~{n}", self.hint),
            NameKind::Bound(n) => write!(f, "{}#{n}", self.hint),
        }
    }
}

/// A process expression.
///
/// `Choice` and `Parallel` are binary; n-ary forms are right-nested.
/// `Apply` is the opaque function-application step `[[y = f(args)]].cont`,
/// binding `result` in `cont`. `Call` instantiates a named, parameterized
/// process definition held by a [`Universe`](super::Universe).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Nil,
    Output {
        channel: Name,
        payload: Vec<Name>,
        cont: Box<Process>,
    },
    Input {
        channel: Name,
        binders: Vec<Name>,
        cont: Box<Process>,
    },
    Choice(Box<Process>, Box<Process>),
    Parallel(Box<Process>, Box<Process>),
    Restriction(Name, Box<Process>),
    Replication(Box<Process>),
    Apply {
        func: Symbol,
        args: Vec<Name>,
        result: Name,
        cont: Box<Process>,
    },
    Call {
        ident: Symbol,
        args: Vec<Name>,
    },
}

impl Process {
    pub fn output(channel: Name, payload: Vec<Name>, cont: Process) -> Process {
        Process::Output {
            channel,
            payload,
            cont: Box::new(cont),
        }
    }

    pub fn input(channel: Name, binders: Vec<Name>, cont: Process) -> Process {
        Process::Input {
            channel,
            binders,
            cont: Box::new(cont),
        }
    }

    pub fn apply(func: Symbol, args: Vec<Name>, result: Name, cont: Process) -> Process {
        Process::Apply {
            func,
            args,
            result,
            cont: Box::new(cont),
        }
    }

    pub fn restrict(name: Name, body: Process) -> Process {
        Process::Restriction(name, Box::new(body))
    }

    pub fn restrict_all(names: impl IntoIterator<Item = Name>, body: Process) -> Process {
        let names: Vec<Name> = names.into_iter().collect();
        names
            .into_iter()
            .rev()
            .fold(body, |acc, n| Process::restrict(n, acc))
    }

    pub fn replicate(body: Process) -> Process {
        Process::Replication(Box::new(body))
    }

    pub fn call(ident: &str, args: Vec<Name>) -> Process {
        Process::Call {
            ident: Symbol::intern(ident),
            args,
        }
    }

    pub fn par(left: Process, right: Process) -> Process {
        Process::Parallel(Box::new(left), Box::new(right))
    }

    pub fn choice(left: Process, right: Process) -> Process {
        Process::Choice(Box::new(left), Box::new(right))
    }

    /// Right-nested parallel composition; empty input gives `Nil`.
    pub fn par_all(parts: impl IntoIterator<Item = Process>) -> Process {
        right_nest(parts.into_iter().collect(), Process::par)
    }

    /// Right-nested choice; empty input gives `Nil`.
    pub fn choice_all(parts: impl IntoIterator<Item = Process>) -> Process {
        right_nest(parts.into_iter().collect(), Process::choice)
    }

    /// Free names. Calls contribute their arguments; definitions are closed
    /// over their parameters.
    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn is_free(&self, name: Name) -> bool {
        self.free_names().contains(&name)
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let add = |n: &Name, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
            if !bound.contains(n) {
                out.insert(*n);
            }
        };
        match self {
            Process::Nil => {}
            Process::Output {
                channel,
                payload,
                cont,
            } => {
                add(channel, bound, out);
                payload.iter().for_each(|n| add(n, bound, out));
                cont.collect_free(bound, out);
            }
            Process::Input {
                channel,
                binders,
                cont,
            } => {
                add(channel, bound, out);
                let mark = bound.len();
                bound.extend(binders.iter().copied());
                cont.collect_free(bound, out);
                bound.truncate(mark);
            }
            Process::Choice(l, r) | Process::Parallel(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Process::Restriction(n, body) => {
                bound.push(*n);
                body.collect_free(bound, out);
                bound.pop();
            }
            Process::Replication(body) => body.collect_free(bound, out),
            Process::Apply {
                args, result, cont, ..
            } => {
                args.iter().for_each(|n| add(n, bound, out));
                bound.push(*result);
                cont.collect_free(bound, out);
                bound.pop();
            }
            Process::Call { args, .. } => args.iter().for_each(|n| add(n, bound, out)),
        }
    }

    /// Capture-avoiding simultaneous substitution of free names.
    pub fn substitute(&self, map: &HashMap<Name, Name>) -> Process {
        if map.is_empty() {
            return self.clone();
        }
        let range: BTreeSet<Name> = map.values().copied().collect();
        self.subst_inner(map, &range)
    }

    fn subst_inner(&self, map: &HashMap<Name, Name>, range: &BTreeSet<Name>) -> Process {
        let s = |n: &Name| *map.get(n).unwrap_or(n);
        match self {
            Process::Nil => Process::Nil,
            Process::Output {
                channel,
                payload,
                cont,
            } => Process::output(
                s(channel),
                payload.iter().map(s).collect(),
                cont.subst_inner(map, range),
            ),
            Process::Input {
                channel,
                binders,
                cont,
            } => {
                let (binders, inner) = rebind(binders, map, range);
                Process::input(s(channel), binders, cont.subst_inner(&inner, range))
            }
            Process::Choice(l, r) => {
                Process::choice(l.subst_inner(map, range), r.subst_inner(map, range))
            }
            Process::Parallel(l, r) => {
                Process::par(l.subst_inner(map, range), r.subst_inner(map, range))
            }
            Process::Restriction(n, body) => {
                let (names, inner) = rebind(std::slice::from_ref(n), map, range);
                Process::restrict(names[0], body.subst_inner(&inner, range))
            }
            Process::Replication(body) => Process::replicate(body.subst_inner(map, range)),
            Process::Apply {
                func,
                args,
                result,
                cont,
            } => {
                let (names, inner) = rebind(std::slice::from_ref(result), map, range);
                Process::apply(
                    *func,
                    args.iter().map(s).collect(),
                    names[0],
                    cont.subst_inner(&inner, range),
                )
            }
            Process::Call { ident, args } => Process::Call {
                ident: *ident,
                args: args.iter().map(s).collect(),
            },
        }
    }

    /// Replaces every binder with a fresh name. Used when copying a
    /// replicated body or unfolding a definition.
    pub fn freshen(&self) -> Process {
        match self {
            Process::Nil | Process::Call { .. } => self.clone(),
            Process::Output {
                channel,
                payload,
                cont,
            } => Process::output(*channel, payload.clone(), cont.freshen()),
            Process::Input {
                channel,
                binders,
                cont,
            } => {
                let fresh: Vec<Name> = binders.iter().map(|b| Name::fresh(b.hint)).collect();
                let map = binders.iter().copied().zip(fresh.iter().copied()).collect();
                Process::input(*channel, fresh, cont.substitute(&map).freshen())
            }
            Process::Choice(l, r) => Process::choice(l.freshen(), r.freshen()),
            Process::Parallel(l, r) => Process::par(l.freshen(), r.freshen()),
            Process::Restriction(n, body) => {
                let fresh = Name::fresh(n.hint);
                let map = HashMap::from([(*n, fresh)]);
                Process::restrict(fresh, body.substitute(&map).freshen())
            }
            Process::Replication(body) => Process::replicate(body.freshen()),
            Process::Apply {
                func,
                args,
                result,
                cont,
            } => {
                let fresh = Name::fresh(result.hint);
                let map = HashMap::from([(*result, fresh)]);
                Process::apply(*func, args.clone(), fresh, cont.substitute(&map).freshen())
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Process::Nil | Process::Call { .. } => 0,
            Process::Output { cont, .. }
            | Process::Input { cont, .. }
            | Process::Apply { cont, .. } => cont.size(),
            Process::Choice(l, r) | Process::Parallel(l, r) => l.size() + r.size(),
            Process::Restriction(_, b) | Process::Replication(b) => b.size(),
        }
    }
}

fn right_nest(mut parts: Vec<Process>, join: fn(Process, Process) -> Process) -> Process {
    let Some(mut acc) = parts.pop() else {
        return Process::Nil;
    };
    while let Some(p) = parts.pop() {
        acc = join(p, acc);
    }
    acc
}

/// Drops shadowed entries from `map` and renames binders that would capture
/// a substituted name.
fn rebind(
    binders: &[Name],
    map: &HashMap<Name, Name>,
    range: &BTreeSet<Name>,
) -> (Vec<Name>, HashMap<Name, Name>) {
    let mut inner = map.clone();
    let mut out = Vec::with_capacity(binders.len());
    for b in binders {
        inner.remove(b);
        if range.contains(b) {
            let fresh = Name::fresh(b.hint);
            inner.insert(*b, fresh);
            out.push(fresh);
        } else {
            out.push(*b);
        }
    }
    (out, inner)
}

fn write_names(f: &mut fmt::Formatter<'_>, names: &[Name]) -> fmt::Result {
    f.write_str("(")?;
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{n}")?;
    }
    f.write_str(")")
}

fn collect_nary<'a>(p: &'a Process, par: bool, out: &mut Vec<&'a Process>) {
    match (p, par) {
        (Process::Parallel(l, r), true) | (Process::Choice(l, r), false) => {
            collect_nary(l, par, out);
            collect_nary(r, par, out);
        }
        _ => out.push(p),
    }
}

/// S-expression rendering, readable back by [`parse_program`](super::parse_program).
impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Nil => f.write_str("0"),
            Process::Output {
                channel,
                payload,
                cont,
            } => {
                write!(f, "(out {channel} ")?;
                write_names(f, payload)?;
                write!(f, " {cont})")
            }
            Process::Input {
                channel,
                binders,
                cont,
            } => {
                write!(f, "(in {channel} ")?;
                write_names(f, binders)?;
                write!(f, " {cont})")
            }
            Process::Choice(..) | Process::Parallel(..) => {
                let par = matches!(self, Process::Parallel(..));
                let mut parts = Vec::new();
                collect_nary(self, par, &mut parts);
                f.write_str(if par { "(|" } else { "(+" })?;
                for p in parts {
                    write!(f, " {p}")?;
                }
                f.write_str(")")
            }
            Process::Restriction(..) => {
                let mut names = Vec::new();
                let mut body = self;
                while let Process::Restriction(n, b) = body {
                    names.push(*n);
                    body = b;
                }
                f.write_str("(new ")?;
                write_names(f, &names)?;
                write!(f, " {body})")
            }
            Process::Replication(body) => write!(f, "(! {body})"),
            Process::Apply {
                func,
                args,
                result,
                cont,
            } => {
                write!(f, "(apply {func} ")?;
                write_names(f, args)?;
                write!(f, " {result} {cont})")
            }
            Process::Call { ident, args } => {
                write!(f, "(call {ident}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
