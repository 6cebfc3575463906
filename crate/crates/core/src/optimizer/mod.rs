//! Specializes per-agent equations into per-partition plans.
//!
//! Passes run in a fixed order: refine, pushdown, synthesize,
//! rewrite-remote, rewrite-local, merge. Any subset that respects the
//! dependencies below is valid; [`Mode`] names the benchmark subsets.
//!
//! | pass           | requires   |
//! |----------------|------------|
//! | synthesize     | refine     |
//! | rewrite-remote | synthesize |
//! | rewrite-local  | refine     |
//! | pushdown       | refine     |

mod plan;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use bitflags::bitflags;

pub use plan::{
    AgentPlan, Buffer, CacheId, DynamicStateRef, MessageCache, PartitionPlan, PassTimings, Plan,
    RefinedNeighbors, Route, StagedExpr, StagedInput,
};

use crate::equations::{AgentId, BehavioralEquation, ComputeMethodId, ContractError, PartitionId, StateRef};
use crate::graph::{Partition, Partitioning};
use crate::workloads::Workload;

bitflags! {
    #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
    pub struct PassSet: u8 {
        const MERGE = 1;
        const REFINE = 1 << 1;
        const SYNTHESIZE = 1 << 2;
        const REWRITE_REMOTE = 1 << 3;
        const REWRITE_LOCAL = 1 << 4;
        const PUSHDOWN = 1 << 5;
    }
}

const DEPENDENCIES: [(PassSet, PassSet); 4] = [
    (PassSet::SYNTHESIZE, PassSet::REFINE),
    (PassSet::REWRITE_REMOTE, PassSet::SYNTHESIZE),
    (PassSet::REWRITE_LOCAL, PassSet::REFINE),
    (PassSet::PUSHDOWN, PassSet::REFINE),
];

fn pass_name(p: PassSet) -> &'static str {
    match p {
        PassSet::MERGE => "merge",
        PassSet::REFINE => "refine",
        PassSet::SYNTHESIZE => "synthesize",
        PassSet::REWRITE_REMOTE => "rewrite-remote",
        PassSet::REWRITE_LOCAL => "rewrite-local",
        PassSet::PUSHDOWN => "pushdown",
        _ => "?",
    }
}

impl PassSet {
    pub fn validate(self) -> Result<(), OptimizerError> {
        for (pass, needs) in DEPENDENCIES {
            if self.contains(pass) && !self.contains(needs) {
                return Err(OptimizerError::MissingPrerequisite {
                    pass: pass_name(pass),
                    requires: pass_name(needs),
                });
            }
        }
        Ok(())
    }
}

/// Benchmark modes, each a fixed pass subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Unopt,
    Merge,
    MergeCache,
    Local,
    Remote,
    Full,
    FullPushdown,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Unopt,
        Mode::Merge,
        Mode::MergeCache,
        Mode::Local,
        Mode::Remote,
        Mode::Full,
        Mode::FullPushdown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Unopt => "unopt",
            Mode::Merge => "merge",
            Mode::MergeCache => "merge+cache",
            Mode::Local => "+local",
            Mode::Remote => "+remote",
            Mode::Full => "full",
            Mode::FullPushdown => "full+pushdown",
        }
    }

    pub fn passes(self) -> PassSet {
        let cache = PassSet::MERGE | PassSet::REFINE | PassSet::SYNTHESIZE;
        match self {
            Mode::Unopt => PassSet::empty(),
            Mode::Merge => PassSet::MERGE,
            Mode::MergeCache => cache,
            Mode::Local => cache | PassSet::REWRITE_LOCAL,
            Mode::Remote => cache | PassSet::REWRITE_REMOTE,
            Mode::Full => cache | PassSet::REWRITE_LOCAL | PassSet::REWRITE_REMOTE,
            Mode::FullPushdown => {
                cache | PassSet::REWRITE_LOCAL | PassSet::REWRITE_REMOTE | PassSet::PUSHDOWN
            }
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown mode '{0}'; valid modes: unopt, merge, merge+cache, +local, +remote, full, full+pushdown")]
pub struct UnknownMode(pub String);

impl FromStr for Mode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UnknownMode(s.to_owned()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OptimizerError {
    #[error("pass {pass} requires pass {requires}")]
    MissingPrerequisite {
        pass: &'static str,
        requires: &'static str,
    },
    #[error("cannot push aggregation into agent {target}: {method} is not declared associative and commutative")]
    PushdownPrecondition { target: AgentId, method: ComputeMethodId },
    #[error("pipeline order: {0}")]
    PipelineOrder(String),
    #[error("agent {agent} references nonexistent agent {reference}")]
    DanglingReference { agent: AgentId, reference: AgentId },
    #[error("partitioning covers {partitioned} agents, workload has {agents}")]
    Coverage { partitioned: usize, agents: usize },
    #[error(transparent)]
    Contract(#[from] ContractError),
}

/// Classifies `part`'s members' references. `owner` gives every agent's
/// partition; unmarked references are dynamic.
pub fn refine_communication(
    part: &Partition,
    equations: &[BehavioralEquation],
    static_marks: &[Vec<StateRef>],
    owner: &[PartitionId],
) -> Result<Vec<RefinedNeighbors>, OptimizerError> {
    let mut out = Vec::with_capacity(part.members.len());
    for &a in &part.members {
        let eq = &equations[a as usize];
        let marks: HashSet<StateRef> = static_marks[a as usize].iter().copied().collect();
        let mut r = RefinedNeighbors::default();
        for &s in &eq.references {
            let Some(&home) = owner.get(s.agent as usize) else {
                return Err(OptimizerError::DanglingReference {
                    agent: a,
                    reference: s.agent,
                });
            };
            if !marks.contains(&s) {
                r.dynamic.push(s);
            } else if home == part.id {
                r.local_static.push(s);
            } else {
                r.remote_static.push((s, home));
            }
        }
        r.local_static.sort();
        r.remote_static.sort();
        out.push(r);
    }
    Ok(out)
}

/// One cache per directed partition pair with static remote reads still
/// routed through the mailbox; those routes become cache transports.
pub fn synthesize_caches(plans: &mut [PartitionPlan]) -> Vec<MessageCache> {
    let mut schemas: BTreeMap<(PartitionId, PartitionId), Vec<StateRef>> = BTreeMap::new();
    for p in plans.iter() {
        for a in &p.agents {
            for &(s, route) in &a.routes {
                if route != Route::Mailbox {
                    continue;
                }
                if let Some(src) = remote_home(a, s) {
                    schemas.entry((src, p.id())).or_default().push(s);
                }
            }
        }
    }
    let caches: Vec<MessageCache> = schemas
        .into_iter()
        .enumerate()
        .map(|(i, ((src, dst), schema))| MessageCache::new(i as CacheId, src, dst, schema))
        .collect();
    let index: BTreeMap<(PartitionId, PartitionId), CacheId> =
        caches.iter().map(|c| ((c.source, c.dest), c.id)).collect();
    for p in plans.iter_mut() {
        let dst = p.id();
        for a in &mut p.agents {
            for i in 0..a.routes.len() {
                let (s, route) = a.routes[i];
                if route != Route::Mailbox {
                    continue;
                }
                let Some(src) = remote_home(a, s) else {
                    continue;
                };
                let cid = index[&(src, dst)];
                if let Some(offset) = caches[cid as usize].offset_of(s) {
                    a.routes[i].1 = Route::CacheUnpack { cache: cid, offset };
                }
            }
        }
    }
    for c in &caches {
        plans[c.dest as usize].inbound_caches.push(c.id);
        plans[c.source as usize].outbound_caches.push(c.id);
    }
    caches
}

/// Static remote reads become in-place cache reads.
pub fn rewrite_remote(plan: &mut PartitionPlan) -> Result<(), OptimizerError> {
    for a in &mut plan.agents {
        for i in 0..a.routes.len() {
            let (s, route) = a.routes[i];
            let is_remote_static = remote_home(a, s).is_some();
            match route {
                Route::CacheUnpack { cache, offset } => {
                    a.routes[i].1 = Route::CacheRead { cache, offset }
                }
                Route::Mailbox if is_remote_static => {
                    return Err(OptimizerError::PipelineOrder(format!(
                        "agent {} reads {s} remotely with no cache synthesized",
                        a.agent
                    )))
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Static local reads become reads of the previous superstep's published
/// messages; the partition becomes double-buffered.
pub fn rewrite_local(plan: &mut PartitionPlan) {
    for a in &mut plan.agents {
        for i in 0..a.routes.len() {
            let (s, route) = a.routes[i];
            if route == Route::Mailbox && a.refined.local_static.binary_search(&s).is_ok() {
                a.routes[i].1 = Route::Local;
            }
        }
    }
    plan.double_buffered = true;
}

/// Runs the partition as one unit in ascending agent order.
pub fn merge(plan: &mut PartitionPlan) {
    plan.merged = true;
    plan.merged_order = (0..plan.agents.len() as u32).collect();
}

/// Replaces `target`'s references from each other partition with one
/// aggregate hosted there. `next_id` supplies negative ids.
pub fn aggregation_pushdown(
    plans: &mut [PartitionPlan],
    owner: &[PartitionId],
    local_index: &[u32],
    target: AgentId,
    next_id: &mut i64,
) -> Result<(), OptimizerError> {
    let home = owner[target as usize] as usize;
    let t = &plans[home].agents[local_index[target as usize] as usize];
    if !t.method.algebraic_flags().allows_regrouping() {
        return Err(OptimizerError::PushdownPrecondition {
            target,
            method: t.method.id(),
        });
    }
    let fold_op = t.method.id();
    let mut groups: BTreeMap<PartitionId, Vec<AgentId>> = BTreeMap::new();
    for &(s, route) in &t.routes {
        let q = owner[s.agent as usize];
        if q as usize != home && route == Route::Mailbox {
            groups.entry(q).or_default().push(s.agent);
        }
    }
    let mut ids = BTreeMap::new();
    for (q, mut senders) in groups {
        senders.sort_unstable();
        *next_id -= 1;
        let id = *next_id;
        ids.insert(q, id);
        plans[q as usize].aggregators.push(DynamicStateRef {
            id,
            host: q,
            target,
            fold_op,
            senders,
        });
    }
    let t = &mut plans[home].agents[local_index[target as usize] as usize];
    for (s, route) in &mut t.routes {
        if let Some(&id) = ids.get(&owner[s.agent as usize]) {
            if *route == Route::Mailbox {
                *route = Route::Aggregate(id);
            }
        }
    }
    Ok(())
}

fn remote_home(a: &AgentPlan, s: StateRef) -> Option<PartitionId> {
    let r = &a.refined.remote_static;
    r.binary_search_by_key(&s, |&(x, _)| x).ok().map(|i| r[i].1)
}

/// Builds staged programs and the sender-side mailbox lists from the routes.
fn link(plans: &mut [PartitionPlan], caches: &[MessageCache], owner: &[PartitionId], local_index: &[u32]) {
    let mut mail_out: Vec<Vec<Vec<AgentId>>> = plans
        .iter()
        .map(|p| vec![Vec::new(); p.agents.len()])
        .collect();
    let mut unpack: Vec<Vec<Vec<u32>>> = caches.iter().map(|c| vec![Vec::new(); c.len()]).collect();
    for p in plans.iter_mut() {
        for (i, a) in p.agents.iter_mut().enumerate() {
            let mut program = Vec::with_capacity(a.routes.len());
            let mut aggregates = Vec::new();
            for &(s, route) in &a.routes {
                let sender = s.agent as i64;
                let expr = match route {
                    Route::Mailbox => {
                        let q = owner[s.agent as usize] as usize;
                        mail_out[q][local_index[s.agent as usize] as usize].push(a.agent);
                        StagedExpr::MailboxRead { sender }
                    }
                    Route::Local => StagedExpr::LocalRead {
                        target: s,
                        buffer: Buffer::Previous,
                    },
                    Route::CacheUnpack { cache, offset } => {
                        unpack[cache as usize][offset as usize].push(i as u32);
                        StagedExpr::MailboxRead { sender }
                    }
                    Route::CacheRead { cache, offset } => StagedExpr::CacheRead { cache, offset },
                    Route::Aggregate(id) => {
                        if !aggregates.contains(&id) {
                            aggregates.push(id);
                            program.push(StagedInput {
                                sender: id,
                                expr: StagedExpr::MailboxRead { sender: id },
                            });
                        }
                        continue;
                    }
                };
                program.push(StagedInput { sender, expr });
            }
            program.sort_by_key(|i| i.sender);
            a.program = program;
        }
    }
    for (p, out) in plans.iter_mut().zip(mail_out) {
        p.mail_out = out;
        for lists in &mut p.mail_out {
            lists.sort_unstable();
        }
        p.cache_unpack = p
            .inbound_caches
            .iter()
            .map(|&c| std::mem::take(&mut unpack[c as usize]))
            .collect();
    }
}

/// Runs the passes in `passes` over `workload` placed by `partitioning`.
pub fn optimize(
    workload: &Workload,
    partitioning: &Partitioning,
    passes: PassSet,
) -> Result<Plan, OptimizerError> {
    passes.validate()?;
    let start = Instant::now();
    let n = workload.agent_count();
    if partitioning.assignment.len() != n {
        return Err(OptimizerError::Coverage {
            partitioned: partitioning.assignment.len(),
            agents: n,
        });
    }
    let owner = partitioning.assignment.clone();
    let mut local_index = vec![0u32; n];
    for p in &partitioning.parts {
        for (i, &a) in p.members.iter().enumerate() {
            local_index[a as usize] = i as u32;
        }
    }
    let mut timings = PassTimings::default();

    let mut plans = Vec::with_capacity(partitioning.parts.len());
    for part in &partitioning.parts {
        let refined = if passes.contains(PassSet::REFINE) {
            let t = Instant::now();
            let r = refine_communication(part, &workload.equations, &workload.static_marks, &owner)?;
            timings.refine += t.elapsed();
            r
        } else {
            for &a in &part.members {
                for s in &workload.equations[a as usize].references {
                    if s.agent as usize >= n {
                        return Err(OptimizerError::DanglingReference {
                            agent: a,
                            reference: s.agent,
                        });
                    }
                }
            }
            part.members
                .iter()
                .map(|&a| RefinedNeighbors {
                    dynamic: workload.equations[a as usize].references.clone(),
                    ..Default::default()
                })
                .collect()
        };
        let mut agents = Vec::with_capacity(part.members.len());
        for (&a, refined) in part.members.iter().zip(refined) {
            let eq = &workload.equations[a as usize];
            let method = workload.registry.get(eq.compute)?.clone();
            agents.push(AgentPlan {
                agent: a,
                equation: eq.clone(),
                method,
                refined,
                routes: eq.references.iter().map(|&s| (s, Route::Mailbox)).collect(),
                program: Vec::new(),
            });
        }
        plans.push(PartitionPlan {
            partition: part.clone(),
            merged_order: (0..agents.len() as u32).collect(),
            agents,
            inbound_caches: Vec::new(),
            outbound_caches: Vec::new(),
            aggregators: Vec::new(),
            merged: false,
            double_buffered: false,
            mail_out: Vec::new(),
            cache_unpack: Vec::new(),
        });
    }

    if passes.contains(PassSet::PUSHDOWN) {
        let t = Instant::now();
        let mut next_id = 0;
        for &target in &workload.pushdown_targets {
            aggregation_pushdown(&mut plans, &owner, &local_index, target, &mut next_id)?;
        }
        timings.pushdown = t.elapsed();
    }
    let mut caches = Vec::new();
    if passes.contains(PassSet::SYNTHESIZE) {
        let t = Instant::now();
        caches = synthesize_caches(&mut plans);
        timings.synthesize = t.elapsed();
    }
    let mut time_each = |pass: PassSet, slot: &mut Duration, f: &mut dyn FnMut(&mut PartitionPlan) -> Result<(), OptimizerError>| {
        if passes.contains(pass) {
            let t = Instant::now();
            for p in plans.iter_mut() {
                f(p)?;
            }
            *slot = t.elapsed();
        }
        Ok::<(), OptimizerError>(())
    };
    time_each(PassSet::REWRITE_REMOTE, &mut timings.rewrite_remote, &mut |p| rewrite_remote(p))?;
    time_each(PassSet::REWRITE_LOCAL, &mut timings.rewrite_local, &mut |p| {
        rewrite_local(p);
        Ok(())
    })?;
    time_each(PassSet::MERGE, &mut timings.merge, &mut |p| {
        merge(p);
        Ok(())
    })?;

    link(&mut plans, &caches, &owner, &local_index);
    timings.total = start.elapsed();
    Ok(Plan {
        passes,
        partitions: plans,
        caches,
        owner,
        local_index,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_round_trip_and_respect_dependencies() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
            m.passes().validate().unwrap();
        }
        let e = "fast".parse::<Mode>().unwrap_err();
        assert!(e.to_string().contains("full+pushdown"));
        let err = (PassSet::REFINE | PassSet::REWRITE_REMOTE).validate().unwrap_err();
        assert!(err.to_string().contains("synthesize"), "{err}");
    }
}
