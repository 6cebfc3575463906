//! Canonical forms under structural congruence.
//!
//! The canonical representative of a process is obtained by
//! * flattening parallel composition and choice, dropping `0`,
//! * unfolding definitions that sit in active positions (those below a
//!   prefix stay folded),
//! * pushing every restriction down to the smallest group of parallel
//!   components that mention it, and dropping unused restrictions,
//! * renaming every bound name to its binder nesting level,
//! * sorting components and summands, picking the smallest ordering of each
//!   restriction chain,
//! * absorbing copies of a replicated body into the replication.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Name, PiError, Process, Universe};

/// Maximum nesting of definition unfoldings in one active position.
const MAX_UNFOLD: u32 = 64;

/// Restriction chains longer than this are ordered by first occurrence
/// instead of by trying every permutation.
const MAX_PERMUTED_CHAIN: usize = 5;

/// Returns the canonical representative of `p`.
///
/// Two processes are structurally congruent (with definitions unfolded in
/// active positions) exactly when their canonical forms are equal, up to the
/// heuristic ordering of restriction chains longer than five names.
pub fn normalize(p: &Process, u: &Universe) -> Result<Process, PiError> {
    Canon {
        u,
        ren: Vec::new(),
        guarded: false,
    }
    .soup(p, 0)
}

/// Splits off the outermost restriction chain of a process.
pub fn strip_top_restrictions(p: &Process) -> (Vec<Name>, &Process) {
    let mut names = Vec::new();
    let mut cur = p;
    while let Process::Restriction(n, body) = cur {
        names.push(*n);
        cur = body;
    }
    (names, cur)
}

/// Opens `p` into top-level components, freshening restricted names.
/// Definitions are unfolded when `fuel` is given and kept as components
/// otherwise.
pub(crate) fn open_into(
    p: &Process,
    u: &Universe,
    restricted: &mut Vec<Name>,
    comps: &mut Vec<Process>,
    fuel: Option<u32>,
) -> Result<(), PiError> {
    match p {
        Process::Nil => Ok(()),
        Process::Parallel(l, r) => {
            open_into(l, u, restricted, comps, fuel)?;
            open_into(r, u, restricted, comps, fuel)
        }
        Process::Restriction(n, body) => {
            let fresh = Name::fresh(n.hint);
            restricted.push(fresh);
            let body = body.substitute(&HashMap::from([(*n, fresh)]));
            open_into(&body, u, restricted, comps, fuel)
        }
        Process::Call { ident, args } if fuel.is_some() => {
            let Some(f @ 1..) = fuel else {
                return Err(PiError::UnguardedRecursion(ident.to_string()));
            };
            let body = u.unfold(*ident, args)?;
            open_into(&body, u, restricted, comps, Some(f - 1))
        }
        _ => {
            comps.push(p.clone());
            Ok(())
        }
    }
}

/// Flattens a choice into summands, unfolding definitions and dropping `0`.
pub(crate) fn summands_into(
    p: &Process,
    u: &Universe,
    out: &mut Vec<Process>,
    fuel: Option<u32>,
) -> Result<(), PiError> {
    match p {
        Process::Nil => Ok(()),
        Process::Choice(l, r) => {
            summands_into(l, u, out, fuel)?;
            summands_into(r, u, out, fuel)
        }
        Process::Call { ident, args } if fuel.is_some() => {
            let Some(f @ 1..) = fuel else {
                return Err(PiError::UnguardedRecursion(ident.to_string()));
            };
            let body = u.unfold(*ident, args)?;
            summands_into(&body, u, out, Some(f - 1))
        }
        _ => {
            out.push(p.clone());
            Ok(())
        }
    }
}

struct Canon<'a> {
    u: &'a Universe,
    /// Renaming stack from original binders to canonical names.
    ren: Vec<(Name, Name)>,
    /// Set below a prefix, where definitions stay folded.
    guarded: bool,
}

impl Canon<'_> {
    fn fuel(&self) -> Option<u32> {
        (!self.guarded).then_some(MAX_UNFOLD)
    }

    fn guarded_soup(&mut self, p: &Process, depth: u32) -> Result<Process, PiError> {
        let outer = std::mem::replace(&mut self.guarded, true);
        let r = self.soup(p, depth);
        self.guarded = outer;
        r
    }

    fn lookup(&self, n: Name) -> Name {
        self.ren
            .iter()
            .rev()
            .find(|(from, _)| *from == n)
            .map(|(_, to)| *to)
            .unwrap_or(n)
    }

    /// Canonical form of a process in an active position, with `depth`
    /// binders already in scope.
    fn soup(&mut self, p: &Process, depth: u32) -> Result<Process, PiError> {
        let mut restricted = Vec::new();
        let mut comps = Vec::new();
        open_into(p, self.u, &mut restricted, &mut comps, self.fuel())?;

        if restricted.is_empty() {
            let mut out = Vec::with_capacity(comps.len());
            for c in &comps {
                out.push(self.comp(c, depth)?);
            }
            return Ok(assemble(out));
        }

        let frees: Vec<BTreeSet<Name>> = comps.iter().map(|c| c.free_names()).collect();
        // Union-find over components that share a restricted name.
        let mut parent: Vec<usize> = (0..comps.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut owner: BTreeMap<usize, Vec<Name>> = BTreeMap::new();
        let mut anchored: Vec<(Name, usize)> = Vec::new();
        for &r in &restricted {
            let users: Vec<usize> = (0..comps.len()).filter(|&i| frees[i].contains(&r)).collect();
            let Some(&first) = users.first() else {
                continue;
            };
            for &other in &users[1..] {
                let (a, b) = (find(&mut parent, first), find(&mut parent, other));
                if a != b {
                    parent[b] = a;
                }
            }
            anchored.push((r, first));
        }
        for (r, first) in anchored {
            let root = find(&mut parent, first);
            owner.entry(root).or_default().push(r);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..comps.len() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }

        let mut out = Vec::new();
        for (root, members) in groups {
            let names = owner.remove(&root).unwrap_or_default();
            if names.is_empty() {
                for &i in &members {
                    out.push(self.comp(&comps[i], depth)?);
                }
            } else {
                let parts: Vec<&Process> = members.iter().map(|&i| &comps[i]).collect();
                out.push(self.chain(&names, &parts, depth)?);
            }
        }
        Ok(assemble(out))
    }

    /// Canonical `(new names) (parts)`: tries every order of the chain and
    /// keeps the smallest result.
    fn chain(&mut self, names: &[Name], parts: &[&Process], depth: u32) -> Result<Process, PiError> {
        let orders: Vec<Vec<Name>> = if names.len() <= MAX_PERMUTED_CHAIN {
            permutations(names)
        } else {
            vec![names.to_vec()]
        };
        let mut best: Option<Process> = None;
        for order in orders {
            let mark = self.ren.len();
            let mut bound = Vec::with_capacity(order.len());
            for (i, n) in order.iter().enumerate() {
                let b = Name::bound(depth + i as u32, n.hint);
                self.ren.push((*n, b));
                bound.push(b);
            }
            let inner = depth + order.len() as u32;
            let mut body = Vec::with_capacity(parts.len());
            for p in parts {
                body.push(self.comp(p, inner)?);
            }
            self.ren.truncate(mark);
            let cand = Process::restrict_all(bound, assemble(body));
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
        Ok(best.unwrap_or(Process::Nil))
    }

    /// Canonical form of a single component (not `0`, `|` or `new`).
    fn comp(&mut self, p: &Process, depth: u32) -> Result<Process, PiError> {
        match p {
            Process::Output {
                channel,
                payload,
                cont,
            } => Ok(Process::output(
                self.lookup(*channel),
                payload.iter().map(|n| self.lookup(*n)).collect(),
                self.guarded_soup(cont, depth)?,
            )),
            Process::Input {
                channel,
                binders,
                cont,
            } => {
                let mut seen = BTreeSet::new();
                for b in binders {
                    if !seen.insert(*b) {
                        return Err(PiError::DuplicateBinders {
                            channel: channel.to_string(),
                            binder: b.to_string(),
                        });
                    }
                }
                let ch = self.lookup(*channel);
                let mark = self.ren.len();
                let mut bound = Vec::with_capacity(binders.len());
                for (i, b) in binders.iter().enumerate() {
                    let c = Name::bound(depth + i as u32, b.hint);
                    self.ren.push((*b, c));
                    bound.push(c);
                }
                let cont = self.guarded_soup(cont, depth + binders.len() as u32);
                self.ren.truncate(mark);
                Ok(Process::input(ch, bound, cont?))
            }
            Process::Apply {
                func,
                args,
                result,
                cont,
            } => {
                let args = args.iter().map(|n| self.lookup(*n)).collect();
                let r = Name::bound(depth, result.hint);
                self.ren.push((*result, r));
                let cont = self.guarded_soup(cont, depth + 1);
                self.ren.pop();
                Ok(Process::apply(*func, args, r, cont?))
            }
            Process::Replication(body) => Ok(Process::replicate(self.soup(body, depth)?)),
            Process::Choice(..) => {
                let mut raw = Vec::new();
                summands_into(p, self.u, &mut raw, self.fuel())?;
                let mut out = Vec::with_capacity(raw.len());
                for s in &raw {
                    let c = self.soup(s, depth)?;
                    if c != Process::Nil {
                        flatten_choice(c, &mut out);
                    }
                }
                out.sort();
                Ok(Process::choice_all(out))
            }
            Process::Call { ident, args } => Ok(Process::Call {
                ident: *ident,
                args: args.iter().map(|n| self.lookup(*n)).collect(),
            }),
            _ => self.soup(p, depth),
        }
    }
}

fn flatten_choice(p: Process, out: &mut Vec<Process>) {
    match p {
        Process::Choice(l, r) => {
            flatten_choice(*l, out);
            flatten_choice(*r, out);
        }
        other => out.push(other),
    }
}

fn flatten_par(p: Process, out: &mut Vec<Process>) {
    match p {
        Process::Parallel(l, r) => {
            flatten_par(*l, out);
            flatten_par(*r, out);
        }
        Process::Nil => {}
        other => out.push(other),
    }
}

/// Sorts canonical components, absorbs copies of replicated bodies and
/// rebuilds a right-nested parallel composition.
fn assemble(comps: Vec<Process>) -> Process {
    let mut flat = Vec::with_capacity(comps.len());
    for c in comps {
        flatten_par(c, &mut flat);
    }
    if flat.iter().any(|c| matches!(c, Process::Replication(_))) {
        flat = absorb(flat);
    }
    flat.sort();
    Process::par_all(flat)
}

/// Applies `P | !P -> !P` until no copy of any replicated body remains.
fn absorb(comps: Vec<Process>) -> Vec<Process> {
    let mut reps: Vec<Process> = Vec::new();
    let mut rest: BTreeMap<Process, usize> = BTreeMap::new();
    for c in comps {
        match c {
            Process::Replication(_) => reps.push(c),
            other => *rest.entry(other).or_default() += 1,
        }
    }
    reps.sort();
    let bodies: Vec<Vec<Process>> = reps
        .iter()
        .map(|r| {
            let Process::Replication(body) = r else {
                unreachable!()
            };
            let mut parts = Vec::new();
            flatten_par((**body).clone(), &mut parts);
            parts
        })
        .collect();
    let mut rep_counts: BTreeMap<Process, usize> = BTreeMap::new();
    for r in &reps {
        *rep_counts.entry(r.clone()).or_default() += 1;
    }
    loop {
        let mut changed = false;
        for (r, parts) in reps.iter().zip(&bodies) {
            if parts.is_empty() || !rep_counts.contains_key(r) {
                continue;
            }
            // A body part may itself be a replication sitting beside us.
            let mut need: BTreeMap<&Process, usize> = BTreeMap::new();
            for part in parts {
                *need.entry(part).or_default() += 1;
            }
            let available = need.iter().all(|(part, k)| {
                let have = match part {
                    Process::Replication(_) => {
                        let own = usize::from(*part == r);
                        rep_counts.get(*part).copied().unwrap_or(0).saturating_sub(own)
                    }
                    _ => rest.get(*part).copied().unwrap_or(0),
                };
                have >= *k
            });
            if !available {
                continue;
            }
            for (part, k) in need {
                let table = if matches!(part, Process::Replication(_)) {
                    &mut rep_counts
                } else {
                    &mut rest
                };
                let slot = table.get_mut(part).unwrap();
                *slot -= k;
                if *slot == 0 {
                    table.remove(part);
                }
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let mut out = Vec::new();
    for (p, k) in rest.into_iter().chain(rep_counts) {
        out.extend(std::iter::repeat(p).take(k));
    }
    out
}

fn permutations(names: &[Name]) -> Vec<Vec<Name>> {
    if names.len() <= 1 {
        return vec![names.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..names.len() {
        let mut rest = names.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::user(s)
    }
    fn out(c: &str, v: &str, k: Process) -> Process {
        Process::output(n(c), vec![n(v)], k)
    }
    fn inp(c: &str, b: &str, k: Process) -> Process {
        Process::input(n(c), vec![n(b)], k)
    }
    fn canon(p: &Process) -> Process {
        normalize(p, &Universe::new()).unwrap()
    }

    #[test]
    fn parallel_is_commutative_associative_with_unit() {
        let a = out("a", "x", Process::Nil);
        let b = inp("b", "y", Process::Nil);
        let c = out("c", "z", Process::Nil);
        let l = Process::par(Process::par(a.clone(), b.clone()), c.clone());
        let r = Process::par(c, Process::par(Process::Nil, Process::par(b, a)));
        assert_eq!(canon(&l), canon(&r));
    }

    #[test]
    fn alpha_equivalent_inputs_agree() {
        let l = inp("a", "x", out("b", "x", Process::Nil));
        let r = inp("a", "y", out("b", "y", Process::Nil));
        assert_eq!(canon(&l), canon(&r));
        let other = inp("a", "y", out("b", "z", Process::Nil));
        assert_ne!(canon(&l), canon(&other));
    }

    #[test]
    fn restriction_scope_and_garbage() {
        let a = out("a", "x", Process::Nil);
        let b = inp("b", "y", Process::Nil);
        let wide = Process::restrict(n("a"), Process::par(a.clone(), b.clone()));
        let narrow = Process::par(Process::restrict(n("a"), a), b.clone());
        assert_eq!(canon(&wide), canon(&narrow));
        let dead = Process::restrict(n("q"), b.clone());
        assert_eq!(canon(&dead), canon(&b));
    }

    #[test]
    fn restriction_order_is_irrelevant() {
        let body = Process::par(out("a", "b", Process::Nil), inp("b", "x", Process::Nil));
        let ab = Process::restrict_all([n("a"), n("b")], body.clone());
        let ba = Process::restrict_all([n("b"), n("a")], body);
        assert_eq!(canon(&ab), canon(&ba));
    }

    #[test]
    fn replication_absorbs_copies() {
        let p = out("a", "x", Process::Nil);
        let bang = Process::replicate(p.clone());
        let both = Process::par(p.clone(), Process::par(bang.clone(), p));
        assert_eq!(canon(&both), canon(&bang));
    }

    #[test]
    fn duplicate_binders_are_rejected() {
        let p = Process::input(n("a"), vec![n("x"), n("x")], Process::Nil);
        assert!(matches!(
            normalize(&p, &Universe::new()),
            Err(PiError::DuplicateBinders { .. })
        ));
    }

    #[test]
    fn unguarded_definitions_are_rejected() {
        let mut u = Universe::new();
        u.define("X", vec![], Process::call("X", vec![])).unwrap();
        assert!(matches!(
            normalize(&Process::call("X", vec![]), &u),
            Err(PiError::UnguardedRecursion(_))
        ));
    }
}
