//! Bulk-synchronous execution of optimized plans.
//!
//! Each superstep has three phases. In the send phase every partition
//! publishes its members' messages, fills its outbound caches and aggregates
//! and queues mailbox envelopes. At the barrier, cache banks flip and
//! envelopes are delivered into inboxes sorted by sender. In the compute
//! phase every agent folds its inputs in ascending sender order and writes
//! its next value into a second buffer, so no read observes a value written
//! in the same superstep.
//!
//! Merged partitions run as one task each; unmerged partitions run one task
//! per agent. Tasks are multiplexed over a pool of `threads` threads.

use std::hash::Hasher;
use std::mem;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::equations::{AgentId, ComputeMethod, ContractError, Message, PartitionId, StepCtx, Value};
use crate::optimizer::{PassSet, PassTimings, Plan, Route, StagedExpr};

/// Header bytes of a wire unit, and the extra partition-id header that
/// cross-partition envelopes carry in merge-only execution.
pub const WIRE_HEADER_BYTES: u64 = 8;
pub const PARTITION_HEADER_BYTES: u64 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecConfig {
    pub rounds: u64,
    pub threads: usize,
    pub seed: u64,
    /// Agents whose inbound cross-partition traffic is recorded per round.
    pub watch: Vec<AgentId>,
}

impl ExecConfig {
    pub fn new(rounds: u64, threads: usize, seed: u64) -> Self {
        Self {
            rounds,
            threads,
            seed,
            watch: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub sender: i64,
    pub receiver: AgentId,
    pub message: Message,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState {
    pub superstep: u64,
    /// Indexed by agent id.
    pub values: Vec<Value>,
}

impl SimulationState {
    pub fn checksum(&self) -> u64 {
        checksum(&self.values)
    }
}

/// FNV-1a over the values in agent order; floats by bit pattern.
pub fn checksum(values: &[Value]) -> u64 {
    let mut h = fnv::FnvHasher::default();
    for v in values {
        v.digest(&mut h);
    }
    h.finish()
}

/// Counters for the messages consumed in one superstep.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundMetrics {
    pub time: Duration,
    /// Agent-level messages: every non-silent state times its readers.
    pub logical_messages: u64,
    /// Cross-partition transfers: one per envelope, one per cache holding
    /// at least one message.
    pub wire_units: u64,
    pub wire_values: u64,
    pub wire_bytes: u64,
    pub mailbox_sent: u64,
    pub mailbox_consumed: u64,
    /// Per watched agent: wire units that carry data it reads.
    pub watched_inbound: Vec<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    pub rounds: Vec<RoundMetrics>,
    pub optimizer: PassTimings,
}

impl Metrics {
    /// `None` when no round ran.
    pub fn mean_round_time(&self) -> Option<Duration> {
        let n = self.rounds.len() as u32;
        (n > 0).then(|| self.rounds.iter().map(|r| r.time).sum::<Duration>() / n)
    }

    pub fn total<F: Fn(&RoundMetrics) -> u64>(&self, f: F) -> u64 {
        self.rounds.iter().map(f).sum()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RuntimeError {
    #[error("agent {agent} is covered by {plans} plans")]
    Coverage { agent: AgentId, plans: usize },
    #[error("{0} initial values for {1} agents")]
    InitialValues(usize, usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Contract(#[from] ContractError),
}

/// Orders `raw` by sender and converts each payload with the receiver's
/// `deserialize`, checking the result against its incoming type.
pub fn deliver(
    contract: &dyn ComputeMethod,
    receiver: AgentId,
    raw: &[(i64, Message)],
) -> Result<Vec<Message>, ContractError> {
    let mut sorted = raw.to_vec();
    sorted.sort_by_key(|e| e.0);
    sorted
        .into_iter()
        .map(|(sender, m)| incoming(contract, sender, receiver, m))
        .collect()
}

#[inline]
fn incoming(
    contract: &dyn ComputeMethod,
    sender: i64,
    receiver: AgentId,
    m: Message,
) -> Result<Message, ContractError> {
    let d = contract.deserialize(m);
    if d.tag() != contract.in_type() {
        return Err(ContractError::MessageType {
            method: contract.id(),
            sender,
            receiver,
            got: d.tag(),
            expected: contract.in_type(),
        });
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug)]
enum Src {
    Local(u32),
    Cache(u32, u32),
}

struct Member {
    agent: AgentId,
    method: Arc<dyn ComputeMethod>,
    /// Inputs read in place, by ascending sender.
    inputs: Vec<(i64, Src)>,
    mail_out: Vec<(PartitionId, AgentId)>,
    readers: u64,
}

struct Aggregator {
    id: i64,
    target: AgentId,
    target_part: PartitionId,
    method: Arc<dyn ComputeMethod>,
    senders: Vec<u32>,
}

struct OutCache {
    id: u32,
    slots: Vec<u32>,
    bank: Vec<Option<Message>>,
}

struct Unpack {
    cache: u32,
    senders: Vec<i64>,
    receivers: Vec<Vec<u32>>,
}

struct Worker {
    merged: bool,
    members: Vec<Member>,
    order: Vec<u32>,
    values: Vec<Value>,
    next: Vec<Value>,
    published: Vec<Option<Message>>,
    inbox: Vec<Vec<(i64, Message)>>,
    out_caches: Vec<OutCache>,
    unpack: Vec<Unpack>,
    aggregators: Vec<Aggregator>,
    scratch: Vec<Message>,
    logical: u64,
    mailbox: u64,
}

struct CacheInfo {
    source: PartitionId,
    dest: PartitionId,
    len: usize,
    readers: Vec<AgentId>,
}

fn compile(plan: &Plan, initial: &[Value]) -> Result<(Vec<Worker>, Vec<CacheInfo>), RuntimeError> {
    let n = plan.agent_count();
    if initial.len() != n {
        return Err(RuntimeError::InitialValues(initial.len(), n));
    }
    let mut cover = vec![0usize; n];
    for p in &plan.partitions {
        for &a in &p.partition.members {
            match cover.get_mut(a as usize) {
                Some(c) => *c += 1,
                None => return Err(RuntimeError::Coverage { agent: a, plans: 1 }),
            }
        }
    }
    if let Some((a, &c)) = cover.iter().enumerate().find(|(_, &c)| c != 1) {
        return Err(RuntimeError::Coverage {
            agent: a as AgentId,
            plans: c,
        });
    }

    let mut readers = vec![0u64; n];
    let mut caches: Vec<CacheInfo> = plan
        .caches
        .iter()
        .map(|c| CacheInfo {
            source: c.source,
            dest: c.dest,
            len: c.len(),
            readers: Vec::new(),
        })
        .collect();
    for p in &plan.partitions {
        for a in &p.agents {
            for &(s, route) in &a.routes {
                readers[s.agent as usize] += 1;
                if let Route::CacheRead { cache, .. } | Route::CacheUnpack { cache, .. } = route {
                    let rs = &mut caches[cache as usize].readers;
                    if rs.last() != Some(&a.agent) {
                        rs.push(a.agent);
                    }
                }
            }
        }
    }

    let mut workers = Vec::with_capacity(plan.partitions.len());
    for p in &plan.partitions {
        let mut members = Vec::with_capacity(p.agents.len());
        let mut values = Vec::with_capacity(p.agents.len());
        for (i, a) in p.agents.iter().enumerate() {
            let v = initial[a.agent as usize];
            if v.tag() != a.method.value_type() {
                return Err(ContractError::ValueType {
                    method: a.method.id(),
                    agent: a.agent,
                    got: v.tag(),
                    expected: a.method.value_type(),
                }
                .into());
            }
            values.push(v);
            let inputs = a
                .program
                .iter()
                .filter_map(|inp| match &inp.expr {
                    StagedExpr::LocalRead { target, .. } => {
                        Some((inp.sender, Src::Local(plan.local_index[target.agent as usize])))
                    }
                    StagedExpr::CacheRead { cache, offset } => {
                        Some((inp.sender, Src::Cache(*cache, *offset)))
                    }
                    _ => None,
                })
                .collect();
            members.push(Member {
                agent: a.agent,
                method: a.method.clone(),
                inputs,
                mail_out: p.mail_out[i]
                    .iter()
                    .map(|&r| (plan.owner[r as usize], r))
                    .collect(),
                readers: readers[a.agent as usize],
            });
        }
        let out_caches = p
            .outbound_caches
            .iter()
            .map(|&c| {
                let cache = &plan.caches[c as usize];
                OutCache {
                    id: c,
                    slots: cache
                        .schema
                        .iter()
                        .map(|s| plan.local_index[s.agent as usize])
                        .collect(),
                    bank: vec![None; cache.len()],
                }
            })
            .collect();
        let unpack = p
            .inbound_caches
            .iter()
            .zip(&p.cache_unpack)
            .filter(|(_, recv)| recv.iter().any(|r| !r.is_empty()))
            .map(|(&c, recv)| Unpack {
                cache: c,
                senders: plan.caches[c as usize]
                    .schema
                    .iter()
                    .map(|s| s.agent as i64)
                    .collect(),
                receivers: recv.clone(),
            })
            .collect();
        let aggregators = p
            .aggregators
            .iter()
            .map(|d| Aggregator {
                id: d.id,
                target: d.target,
                target_part: plan.owner[d.target as usize],
                method: plan.agent(d.target).method.clone(),
                senders: d
                    .senders
                    .iter()
                    .map(|&s| plan.local_index[s as usize])
                    .collect(),
            })
            .collect();
        let k = members.len();
        workers.push(Worker {
            merged: p.merged,
            members,
            order: p.merged_order.clone(),
            next: values.clone(),
            values,
            published: vec![None; k],
            inbox: vec![Vec::new(); k],
            out_caches,
            unpack,
            aggregators,
            scratch: Vec::new(),
            logical: 0,
            mailbox: 0,
        });
    }
    Ok((workers, caches))
}

fn gather(
    m: &Member,
    inbox: &[(i64, Message)],
    published: &[Option<Message>],
    cache_read: &[Vec<Option<Message>>],
    out: &mut Vec<Message>,
) -> Result<(), ContractError> {
    out.clear();
    let mut j = 0;
    for &(sender, src) in &m.inputs {
        while j < inbox.len() && inbox[j].0 < sender {
            out.push(inbox[j].1);
            j += 1;
        }
        let msg = match src {
            Src::Local(i) => published[i as usize],
            Src::Cache(c, o) => cache_read[c as usize][o as usize],
        };
        if let Some(msg) = msg {
            out.push(incoming(m.method.as_ref(), sender, m.agent, msg)?);
        }
    }
    out.extend(inbox[j..].iter().map(|e| e.1));
    Ok(())
}

fn step(
    m: &Member,
    value: &Value,
    messages: &[Message],
    superstep: u64,
    seed: u64,
) -> Value {
    let ctx = StepCtx {
        agent: m.agent,
        superstep,
        seed,
    };
    m.method.update_state(value, m.method.partial_compute(messages), &ctx)
}

impl Worker {
    fn compute(&mut self, cache_read: &[Vec<Option<Message>>], superstep: u64, seed: u64) -> Result<(), ContractError> {
        if self.merged {
            let mut scratch = mem::take(&mut self.scratch);
            for &i in &self.order {
                let i = i as usize;
                let m = &self.members[i];
                gather(m, &self.inbox[i], &self.published, cache_read, &mut scratch)?;
                self.next[i] = step(m, &self.values[i], &scratch, superstep, seed);
            }
            self.scratch = scratch;
        } else {
            let (members, inbox, published, values) =
                (&self.members, &self.inbox, &self.published, &self.values);
            self.next
                .par_iter_mut()
                .enumerate()
                .try_for_each_init(Vec::new, |scratch, (i, slot)| {
                    let m = &members[i];
                    gather(m, &inbox[i], published, cache_read, scratch)?;
                    *slot = step(m, &values[i], scratch, superstep, seed);
                    Ok::<(), ContractError>(())
                })?;
        }
        mem::swap(&mut self.values, &mut self.next);
        Ok(())
    }

    fn send(&mut self, outbox: &mut [Vec<Envelope>]) -> Result<(), ContractError> {
        self.logical = 0;
        self.mailbox = 0;
        if self.merged {
            for (i, m) in self.members.iter().enumerate() {
                let msg = m.method.state_to_message(&self.values[i]);
                self.published[i] = msg;
                if let Some(msg) = msg {
                    self.logical += m.readers;
                    for &(dp, r) in &m.mail_out {
                        outbox[dp as usize].push(Envelope {
                            sender: m.agent as i64,
                            receiver: r,
                            message: msg,
                        });
                    }
                    self.mailbox += m.mail_out.len() as u64;
                }
            }
        } else {
            // Each agent emits its own envelopes.
            let sent: Vec<(Option<Message>, Vec<(PartitionId, Envelope)>)> = self
                .members
                .par_iter()
                .zip(self.values.par_iter())
                .map(|(m, v)| {
                    let msg = m.method.state_to_message(v);
                    let envs = match msg {
                        Some(message) => m
                            .mail_out
                            .iter()
                            .map(|&(dp, r)| {
                                (
                                    dp,
                                    Envelope {
                                        sender: m.agent as i64,
                                        receiver: r,
                                        message,
                                    },
                                )
                            })
                            .collect(),
                        None => Vec::new(),
                    };
                    (msg, envs)
                })
                .collect();
            for (i, (msg, envs)) in sent.into_iter().enumerate() {
                self.published[i] = msg;
                if msg.is_some() {
                    self.logical += self.members[i].readers;
                }
                self.mailbox += envs.len() as u64;
                for (dp, e) in envs {
                    outbox[dp as usize].push(e);
                }
            }
        }
        for oc in &mut self.out_caches {
            for (slot, &li) in oc.bank.iter_mut().zip(&oc.slots) {
                *slot = self.published[li as usize];
            }
        }
        for ag in &self.aggregators {
            self.scratch.clear();
            for &s in &ag.senders {
                if let Some(msg) = self.published[s as usize] {
                    let sender = self.members[s as usize].agent as i64;
                    self.scratch
                        .push(incoming(ag.method.as_ref(), sender, ag.target, msg)?);
                }
            }
            if let Some(message) = ag.method.partial_compute(&self.scratch) {
                outbox[ag.target_part as usize].push(Envelope {
                    sender: ag.id,
                    receiver: ag.target,
                    message,
                });
                self.mailbox += 1;
            }
        }
        Ok(())
    }

    fn receive(
        &mut self,
        me: usize,
        outboxes: &[Vec<Vec<Envelope>>],
        cache_read: &[Vec<Option<Message>>],
        local_index: &[u32],
    ) -> Result<u64, ContractError> {
        for ib in &mut self.inbox {
            ib.clear();
        }
        let mut consumed = 0;
        for src in outboxes {
            for e in &src[me] {
                let i = local_index[e.receiver as usize] as usize;
                let m = &self.members[i];
                let msg = incoming(m.method.as_ref(), e.sender, e.receiver, e.message)?;
                self.inbox[i].push((e.sender, msg));
                consumed += 1;
            }
        }
        for u in &self.unpack {
            let bank = &cache_read[u.cache as usize];
            for (slot, recv) in u.receivers.iter().enumerate() {
                let Some(msg) = bank[slot] else {
                    continue;
                };
                for &r in recv {
                    let m = &self.members[r as usize];
                    let d = incoming(m.method.as_ref(), u.senders[slot], m.agent, msg)?;
                    self.inbox[r as usize].push((u.senders[slot], d));
                }
            }
        }
        for ib in &mut self.inbox {
            if ib.len() > 1 {
                ib.sort_unstable_by_key(|e| e.0);
            }
        }
        Ok(consumed)
    }
}

/// Runs `plan` for `config.rounds` supersteps from `initial`.
pub fn execute(
    plan: &Plan,
    initial: &[Value],
    config: &ExecConfig,
) -> Result<(SimulationState, Metrics), RuntimeError> {
    if config.threads == 0 {
        return Err(RuntimeError::Config("threads must be >= 1".into()));
    }
    let (mut workers, caches) = compile(plan, initial)?;
    let parts = workers.len();
    let header = if plan.passes.contains(PassSet::MERGE) && !plan.passes.contains(PassSet::SYNTHESIZE) {
        PARTITION_HEADER_BYTES
    } else {
        0
    };
    let watch_caches: Vec<Vec<usize>> = config
        .watch
        .iter()
        .map(|w| {
            (0..caches.len())
                .filter(|&c| caches[c].readers.contains(w))
                .collect()
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| RuntimeError::Config(e.to_string()))?;

    let mut outboxes: Vec<Vec<Vec<Envelope>>> = vec![vec![Vec::new(); parts]; parts];
    let mut cache_read: Vec<Vec<Option<Message>>> = caches.iter().map(|c| vec![None; c.len]).collect();
    let mut metrics = Metrics {
        rounds: Vec::with_capacity(config.rounds as usize),
        optimizer: plan.timings,
    };

    pool.install(|| -> Result<(), RuntimeError> {
        for t in 0..config.rounds {
            let start = Instant::now();
            workers
                .par_iter_mut()
                .zip(outboxes.par_iter_mut())
                .try_for_each(|(w, out)| w.send(out))?;

            // Barrier.
            let mut rm = RoundMetrics {
                watched_inbound: vec![0; config.watch.len()],
                ..Default::default()
            };
            for w in &mut workers {
                rm.logical_messages += w.logical;
                rm.mailbox_sent += w.mailbox;
                for oc in &mut w.out_caches {
                    mem::swap(&mut oc.bank, &mut cache_read[oc.id as usize]);
                }
            }
            for (c, info) in caches.iter().enumerate() {
                let filled = cache_read[c].iter().filter(|m| m.is_some()).count() as u64;
                if filled > 0 && info.source != info.dest {
                    rm.wire_units += 1;
                    rm.wire_values += filled;
                    rm.wire_bytes += WIRE_HEADER_BYTES + 8 * info.len as u64;
                    for (k, cs) in watch_caches.iter().enumerate() {
                        if cs.contains(&c) {
                            rm.watched_inbound[k] += 1;
                        }
                    }
                }
            }
            for (src, row) in outboxes.iter().enumerate() {
                for (dst, envs) in row.iter().enumerate() {
                    if src == dst {
                        continue;
                    }
                    rm.wire_units += envs.len() as u64;
                    rm.wire_values += envs.len() as u64;
                    for e in envs {
                        rm.wire_bytes += WIRE_HEADER_BYTES + header + e.message.wire_bytes();
                        if let Some(k) = config.watch.iter().position(|&a| a == e.receiver) {
                            rm.watched_inbound[k] += 1;
                        }
                    }
                }
            }
            let consumed: Vec<u64> = workers
                .par_iter_mut()
                .enumerate()
                .map(|(me, w)| w.receive(me, &outboxes, &cache_read, &plan.local_index))
                .collect::<Result<_, _>>()?;
            rm.mailbox_consumed = consumed.iter().sum();
            for row in &mut outboxes {
                for envs in row {
                    envs.clear();
                }
            }

            workers
                .par_iter_mut()
                .try_for_each(|w| w.compute(&cache_read, t, config.seed))?;
            rm.time = start.elapsed();
            metrics.rounds.push(rm);
        }
        Ok(())
    })?;

    let mut values = vec![Value::Bool(false); plan.agent_count()];
    for w in &workers {
        for (m, v) in w.members.iter().zip(&w.values) {
            values[m.agent as usize] = *v;
        }
    }
    Ok((
        SimulationState {
            superstep: config.rounds,
            values,
        },
        metrics,
    ))
}

/// Reference semantics: every agent folds `state_to_message` of its
/// references' previous values in ascending sender order.
pub fn execute_reference(
    workload: &crate::workloads::Workload,
    rounds: u64,
    seed: u64,
) -> Result<Vec<Value>, ContractError> {
    let methods: Vec<&Arc<dyn ComputeMethod>> = workload
        .equations
        .iter()
        .map(|eq| workload.registry.get(eq.compute))
        .collect::<Result<_, _>>()?;
    let mut values = workload.initial.clone();
    let mut buf = Vec::new();
    for t in 0..rounds {
        let published: Vec<Option<Message>> = values
            .iter()
            .zip(&methods)
            .map(|(v, m)| m.state_to_message(v))
            .collect();
        let mut next = values.clone();
        for (a, eq) in workload.equations.iter().enumerate() {
            let m = methods[a];
            let mut refs: Vec<u32> = eq.references.iter().map(|r| r.agent).collect();
            refs.sort_unstable();
            buf.clear();
            for r in refs {
                if let Some(msg) = published[r as usize] {
                    buf.push(incoming(m.as_ref(), r as i64, a as AgentId, msg)?);
                }
            }
            let ctx = StepCtx {
                agent: a as AgentId,
                superstep: t,
                seed,
            };
            next[a] = m.update_state(&values[a], m.partial_compute(&buf), &ctx);
        }
        values = next;
    }
    Ok(values)
}
