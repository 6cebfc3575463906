//! One-step reduction and bounded exploration of the reduction graph.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::normalize::{normalize, open_into, summands_into};
use super::{Name, PiError, Process, Universe};
use crate::symbol::Symbol;

const MAX_UNFOLD: Option<u32> = Some(64);

/// Default cap on distinct states visited by [`reduce_all`].
pub const DEFAULT_NODE_LIMIT: usize = 100_000;

/// A process together with the values known for free value names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionState {
    pub process: Process,
    /// Values of free names that are not literals. Arguments of a function
    /// application must be literals or appear here.
    pub env: BTreeMap<Name, i64>,
    pub steps: u64,
}

impl ReductionState {
    pub fn new(process: Process) -> Self {
        Self {
            process,
            env: BTreeMap::new(),
            steps: 0,
        }
    }

    pub fn with_env(mut self, name: Name, value: i64) -> Self {
        self.env.insert(name, value);
        self
    }
}

/// What happened in one reduction step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    /// A communication on `channel` carrying `payload`.
    Comm { channel: Name, payload: Vec<Name> },
    /// A function application step.
    Apply {
        func: Symbol,
        args: Vec<i64>,
        value: i64,
    },
}

#[derive(Clone, Debug)]
pub struct Successor {
    pub state: ReductionState,
    pub label: Label,
}

/// Every state reachable in one step from `s`, in canonical form.
///
/// One successor is produced per redex; redexes that lead to congruent
/// states are not merged.
pub fn reduce_step(s: &ReductionState, u: &Universe) -> Result<Vec<Successor>, PiError> {
    let mut soup = Soup::open(&s.process, u)?;
    let (offers, redexes) = soup.redexes(&s.env, u)?;
    let mut out = Vec::with_capacity(redexes.len());
    for r in &redexes {
        let mut next = soup.clone();
        let label = next.fire(&offers, r, u)?;
        out.push(Successor {
            state: ReductionState {
                process: normalize(&next.to_process(), u)?,
                env: s.env.clone(),
                steps: s.steps + 1,
            },
            label,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub struct ExploreLimits {
    /// Depth bound: states at this many steps are not expanded further.
    pub max_steps: u64,
    /// Cap on distinct states visited.
    pub node_limit: usize,
}

/// Result of a bounded breadth-first exploration.
#[derive(Clone, Debug, Default)]
pub struct Exploration {
    /// Distinct irreducible states reached within the bound.
    pub terminals: Vec<ReductionState>,
    /// Reducible states left at the depth bound.
    pub frontier: usize,
    /// Distinct states visited.
    pub explored: usize,
    /// Deepest level expanded.
    pub depth: u64,
}

impl Exploration {
    /// Whether some path was still running when the bound was reached.
    pub fn non_terminating(&self) -> bool {
        self.frontier > 0
    }
}

/// Explores all reduction paths of `s` up to `max_steps` steps.
pub fn reduce_all(
    s: &ReductionState,
    max_steps: u64,
    u: &Universe,
) -> Result<Exploration, PiError> {
    reduce_all_with(
        s,
        ExploreLimits {
            max_steps,
            node_limit: DEFAULT_NODE_LIMIT,
        },
        u,
    )
}

pub fn reduce_all_with(
    s: &ReductionState,
    limits: ExploreLimits,
    u: &Universe,
) -> Result<Exploration, PiError> {
    let start = ReductionState {
        process: normalize(&s.process, u)?,
        env: s.env.clone(),
        steps: s.steps,
    };
    let mut seen: HashSet<(Process, BTreeMap<Name, i64>)> = HashSet::new();
    seen.insert((start.process.clone(), start.env.clone()));
    let mut result = Exploration::default();
    let mut terminal_keys: HashSet<Process> = HashSet::new();
    let mut level = vec![start];
    let mut depth = 0u64;
    while !level.is_empty() {
        let mut next = Vec::new();
        for st in level {
            let succs = reduce_step(&st, u)?;
            if succs.is_empty() {
                if terminal_keys.insert(st.process.clone()) {
                    result.terminals.push(st);
                }
                continue;
            }
            if depth >= limits.max_steps {
                result.frontier += 1;
                continue;
            }
            for succ in succs {
                let key = (succ.state.process.clone(), succ.state.env.clone());
                if seen.insert(key) {
                    next.push(succ.state);
                }
            }
            if seen.len() > limits.node_limit {
                result.explored = seen.len();
                result.depth = depth;
                return Err(PiError::StateSpace {
                    limit: limits.node_limit,
                    partial: Box::new(result),
                });
            }
        }
        result.depth = depth;
        if next.is_empty() {
            break;
        }
        depth += 1;
        level = next;
    }
    result.explored = seen.len();
    Ok(result)
}

/// Outcome of following a single reduction path.
#[derive(Clone, Debug)]
pub enum Probe {
    Terminated { steps: u64, state: ReductionState },
    /// The path was still reducible after the step budget.
    StillRunning { steps: u64, components: usize },
}

/// Follows the first enabled redex at every step for up to `max_steps`
/// steps, without canonicalizing intermediate states. Cheap enough to run
/// for tens of thousands of steps on systems whose state keeps growing.
pub fn probe_termination(
    s: &ReductionState,
    max_steps: u64,
    u: &Universe,
) -> Result<Probe, PiError> {
    let mut soup = Soup::open(&s.process, u)?;
    for step in 0..max_steps {
        let (offers, redexes) = soup.redexes(&s.env, u)?;
        let Some(r) = redexes.first() else {
            return Ok(Probe::Terminated {
                steps: step,
                state: ReductionState {
                    process: normalize(&soup.to_process(), u)?,
                    env: s.env.clone(),
                    steps: s.steps + step,
                },
            });
        };
        soup.fire(&offers, r, u)?;
    }
    Ok(Probe::StillRunning {
        steps: max_steps,
        components: soup.comps.len(),
    })
}

/// A freshened copy of a replicated body, opened into components.
#[derive(Clone, Debug)]
struct RepCopy {
    restricted: Vec<Name>,
    comps: Vec<Process>,
}

/// A process opened at top level: restricted names and parallel components.
#[derive(Clone, Debug)]
struct Soup {
    restricted: Vec<Name>,
    comps: Vec<Process>,
    /// For each replicated component, a freshened copy of its body.
    copies: Vec<Option<RepCopy>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Site {
    Comp(usize),
    Rep { comp: usize, part: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Out,
    In,
    Apply,
}

#[derive(Clone, Debug)]
struct Offer {
    site: Site,
    summand: Option<usize>,
    kind: Kind,
    prefix: Process,
}

#[derive(Clone, Debug)]
enum Redex {
    Apply {
        offer: usize,
        args: Vec<i64>,
        value: i64,
    },
    Comm { out: usize, inp: usize },
}

fn channel_of(p: &Process) -> Option<Name> {
    match p {
        Process::Output { channel, .. } | Process::Input { channel, .. } => Some(*channel),
        _ => None,
    }
}

fn open_copy(body: &Process, u: &Universe) -> Result<RepCopy, PiError> {
    let mut restricted = Vec::new();
    let mut comps = Vec::new();
    open_into(&body.freshen(), u, &mut restricted, &mut comps, MAX_UNFOLD)?;
    Ok(RepCopy { restricted, comps })
}

/// Prefix summands of a component: the component itself if it is a prefix,
/// or the prefix summands of a choice.
fn prefixes(p: &Process, u: &Universe) -> Result<Vec<(Option<usize>, Process)>, PiError> {
    match p {
        Process::Output { .. } | Process::Input { .. } | Process::Apply { .. } => {
            Ok(vec![(None, p.clone())])
        }
        Process::Choice(..) => {
            let mut raw = Vec::new();
            summands_into(p, u, &mut raw, MAX_UNFOLD)?;
            Ok(raw
                .into_iter()
                .enumerate()
                .filter(|(_, s)| {
                    matches!(
                        s,
                        Process::Output { .. } | Process::Input { .. } | Process::Apply { .. }
                    )
                })
                .map(|(i, s)| (Some(i), s))
                .collect())
        }
        _ => Ok(Vec::new()),
    }
}

fn kind_of(p: &Process) -> Kind {
    match p {
        Process::Output { .. } => Kind::Out,
        Process::Input { .. } => Kind::In,
        _ => Kind::Apply,
    }
}

fn select_summand(p: &Process, summand: Option<usize>, u: &Universe) -> Result<Process, PiError> {
    match summand {
        None => Ok(p.clone()),
        Some(i) => {
            let mut raw = Vec::new();
            summands_into(p, u, &mut raw, MAX_UNFOLD)?;
            Ok(raw.swap_remove(i))
        }
    }
}

impl Soup {
    fn open(p: &Process, u: &Universe) -> Result<Self, PiError> {
        let mut restricted = Vec::new();
        let mut comps = Vec::new();
        open_into(p, u, &mut restricted, &mut comps, MAX_UNFOLD)?;
        let copies = vec![None; comps.len()];
        Ok(Self {
            restricted,
            comps,
            copies,
        })
    }

    fn to_process(&self) -> Process {
        Process::restrict_all(
            self.restricted.iter().copied(),
            Process::par_all(self.comps.iter().cloned()),
        )
    }

    fn push(&mut self, p: Process, u: &Universe) -> Result<(), PiError> {
        let start = self.comps.len();
        open_into(&p, u, &mut self.restricted, &mut self.comps, MAX_UNFOLD)?;
        self.copies.resize(self.comps.len().max(start), None);
        Ok(())
    }

    fn redexes(
        &mut self,
        env: &BTreeMap<Name, i64>,
        u: &Universe,
    ) -> Result<(Vec<Offer>, Vec<Redex>), PiError> {
        let mut offers = Vec::new();
        for i in 0..self.comps.len() {
            if let Process::Replication(body) = &self.comps[i] {
                if self.copies[i].is_none() {
                    self.copies[i] = Some(open_copy(body, u)?);
                }
                let copy = self.copies[i].as_ref().unwrap();
                for (part, c) in copy.comps.iter().enumerate() {
                    for (summand, prefix) in prefixes(c, u)? {
                        let kind = kind_of(&prefix);
                        // Replicated applications are never unfolded on their own.
                        if kind != Kind::Apply {
                            offers.push(Offer {
                                site: Site::Rep { comp: i, part },
                                summand,
                                kind,
                                prefix,
                            });
                        }
                    }
                }
            } else {
                for (summand, prefix) in prefixes(&self.comps[i], u)? {
                    offers.push(Offer {
                        site: Site::Comp(i),
                        summand,
                        kind: kind_of(&prefix),
                        prefix,
                    });
                }
            }
        }

        let mut redexes = Vec::new();
        let mut by_channel: BTreeMap<Name, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for (k, o) in offers.iter().enumerate() {
            match o.kind {
                Kind::Apply => {
                    let Process::Apply { func, args, .. } = &o.prefix else {
                        unreachable!()
                    };
                    let values: Option<Vec<i64>> = args
                        .iter()
                        .map(|a| a.literal_value().or_else(|| env.get(a).copied()))
                        .collect();
                    if let Some(values) = values {
                        let f = u
                            .function(*func)
                            .ok_or_else(|| PiError::UnknownFunction(func.to_string()))?;
                        let value = f(&values);
                        redexes.push(Redex::Apply {
                            offer: k,
                            args: values,
                            value,
                        });
                    }
                }
                Kind::Out => by_channel
                    .entry(channel_of(&o.prefix).unwrap())
                    .or_default()
                    .0
                    .push(k),
                Kind::In => by_channel
                    .entry(channel_of(&o.prefix).unwrap())
                    .or_default()
                    .1
                    .push(k),
            }
        }
        for (channel, (outs, ins)) in &by_channel {
            for &o in outs {
                for &i in ins {
                    if !self.compatible(&offers[o], &offers[i]) {
                        continue;
                    }
                    let (Process::Output { payload, .. }, Process::Input { binders, .. }) =
                        (&offers[o].prefix, &offers[i].prefix)
                    else {
                        unreachable!()
                    };
                    if payload.len() != binders.len() {
                        return Err(PiError::ArityMismatch {
                            channel: channel.to_string(),
                            sent: payload.len(),
                            expected: binders.len(),
                        });
                    }
                    redexes.push(Redex::Comm { out: o, inp: i });
                }
            }
        }
        Ok((offers, redexes))
    }

    /// Whether two offers can meet: distinct components, or two copies of
    /// one replication (which cannot share copy-local channels).
    fn compatible(&self, a: &Offer, b: &Offer) -> bool {
        match (a.site, b.site) {
            (Site::Comp(x), Site::Comp(y)) => x != y,
            (Site::Rep { comp: x, part: p }, Site::Rep { comp: y, part: q }) if x == y && p == q => {
                let copy = self.copies[x].as_ref().unwrap();
                let ch = channel_of(&a.prefix).unwrap();
                !copy.restricted.contains(&ch)
            }
            _ => true,
        }
    }

    /// Takes the prefix named by `offer` out of the soup. Returns the prefix
    /// process; leftovers of replicated copies are added to `extra`.
    fn take(
        &mut self,
        offer: &Offer,
        fresh_copy: bool,
        remove: &mut Vec<usize>,
        extra: &mut Vec<Process>,
        u: &Universe,
    ) -> Result<Process, PiError> {
        match offer.site {
            Site::Comp(i) => {
                remove.push(i);
                select_summand(&self.comps[i], offer.summand, u)
            }
            Site::Rep { comp, part } => {
                let copy = if fresh_copy {
                    let Process::Replication(body) = &self.comps[comp] else {
                        unreachable!()
                    };
                    open_copy(body, u)?
                } else {
                    self.copies[comp].take().unwrap()
                };
                self.restricted.extend(copy.restricted);
                let mut chosen = None;
                for (k, c) in copy.comps.into_iter().enumerate() {
                    if k == part {
                        chosen = Some(select_summand(&c, offer.summand, u)?);
                    } else {
                        extra.push(c);
                    }
                }
                Ok(chosen.unwrap())
            }
        }
    }

    fn fire(&mut self, offers: &[Offer], r: &Redex, u: &Universe) -> Result<Label, PiError> {
        let mut remove = Vec::new();
        let mut extra = Vec::new();
        let label = match r {
            Redex::Apply { offer, args, value } => {
                let prefix = self.take(&offers[*offer], false, &mut remove, &mut extra, u)?;
                let Process::Apply {
                    func, result, cont, ..
                } = prefix
                else {
                    unreachable!()
                };
                extra.push(cont.substitute(&HashMap::from([(result, Name::lit(*value))])));
                Label::Apply {
                    func,
                    args: args.clone(),
                    value: *value,
                }
            }
            &Redex::Comm { out, inp } => {
                let (a, b) = (&offers[out], &offers[inp]);
                let same_part = matches!(
                    (a.site, b.site),
                    (Site::Rep { comp: x, part: p }, Site::Rep { comp: y, part: q }) if x == y && p == q
                );
                let same_rep = matches!(
                    (a.site, b.site),
                    (Site::Rep { comp: x, .. }, Site::Rep { comp: y, .. }) if x == y
                );
                let sender = if same_rep && !same_part {
                    // Both prefixes come from one copy: open it once.
                    self.take_pair(a, b, &mut extra, u)?
                } else {
                    let s = self.take(a, false, &mut remove, &mut extra, u)?;
                    let r = self.take(b, same_part, &mut remove, &mut extra, u)?;
                    (s, r)
                };
                let (
                    Process::Output {
                        channel,
                        payload,
                        cont: out_cont,
                    },
                    Process::Input {
                        binders,
                        cont: in_cont,
                        ..
                    },
                ) = sender
                else {
                    unreachable!()
                };
                let map: HashMap<Name, Name> = binders
                    .iter()
                    .copied()
                    .zip(payload.iter().copied())
                    .collect();
                extra.push(*out_cont);
                extra.push(in_cont.substitute(&map));
                Label::Comm { channel, payload }
            }
        };
        remove.sort_unstable();
        remove.dedup();
        for i in remove.into_iter().rev() {
            self.comps.remove(i);
            self.copies.remove(i);
        }
        for p in extra {
            self.push(p, u)?;
        }
        Ok(label)
    }

    fn take_pair(
        &mut self,
        a: &Offer,
        b: &Offer,
        extra: &mut Vec<Process>,
        u: &Universe,
    ) -> Result<(Process, Process), PiError> {
        let (Site::Rep { comp, part: pa }, Site::Rep { part: pb, .. }) = (a.site, b.site) else {
            unreachable!()
        };
        let copy = self.copies[comp].take().unwrap();
        self.restricted.extend(copy.restricted);
        let (mut sa, mut sb) = (None, None);
        for (k, c) in copy.comps.into_iter().enumerate() {
            if k == pa {
                sa = Some(select_summand(&c, a.summand, u)?);
            } else if k == pb {
                sb = Some(select_summand(&c, b.summand, u)?);
            } else {
                extra.push(c);
            }
        }
        Ok((sa.unwrap(), sb.unwrap()))
    }
}
