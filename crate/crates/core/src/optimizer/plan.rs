use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use super::PassSet;
use crate::equations::{
    Accessor, AgentId, ApplyNode, BehavioralEquation, ComputationTree, ComputeMethod,
    ComputeMethodId, Leaf, LeafSource, MergedForest, PartitionId, StateRef,
};
use crate::graph::Partition;
use crate::rng::{self, SliceRandom};

/// An agent's references split by placement and communication pattern.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefinedNeighbors {
    pub local_static: Vec<StateRef>,
    pub remote_static: Vec<(StateRef, PartitionId)>,
    pub dynamic: Vec<StateRef>,
}

impl RefinedNeighbors {
    pub fn len(&self) -> usize {
        self.local_static.len() + self.remote_static.len() + self.dynamic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub type CacheId = u32;

/// Slot buffer carrying the messages of `source`'s boundary agents that
/// `dest` reads, ordered by agent id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageCache {
    pub id: CacheId,
    pub source: PartitionId,
    pub dest: PartitionId,
    pub schema: Vec<StateRef>,
    offsets: HashMap<StateRef, u32>,
}

impl MessageCache {
    pub(crate) fn new(id: CacheId, source: PartitionId, dest: PartitionId, mut schema: Vec<StateRef>) -> Self {
        schema.sort();
        schema.dedup();
        let offsets = schema
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i as u32))
            .collect();
        Self {
            id,
            source,
            dest,
            schema,
            offsets,
        }
    }

    pub fn offset_of(&self, s: StateRef) -> Option<u32> {
        self.offsets.get(&s).copied()
    }

    pub fn len(&self) -> usize {
        self.schema.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schema.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Buffer {
    Current,
    Previous,
}

/// Precompiled read and fold instructions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StagedExpr {
    CacheRead { cache: CacheId, offset: u32 },
    LocalRead { target: StateRef, buffer: Buffer },
    /// A message delivered through the mailbox; negative senders are
    /// optimizer-created aggregates.
    MailboxRead { sender: i64 },
    PartialFold { inputs: Vec<StagedExpr>, via: ComputeMethodId },
}

impl fmt::Display for StagedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StagedExpr::CacheRead { cache, offset } => write!(f, "({cache},{offset})@c"),
            StagedExpr::LocalRead { target, buffer } => match buffer {
                Buffer::Current => write!(f, "local({target})"),
                Buffer::Previous => write!(f, "local({target}')"),
            },
            StagedExpr::MailboxRead { sender } => write!(f, "mail({sender})"),
            StagedExpr::PartialFold { inputs, via } => {
                write!(f, "{via}(")?;
                for (i, e) in inputs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// How one reference reaches its reader.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    /// Agent-to-agent message.
    Mailbox,
    /// Read of the sender's published message in the same partition.
    Local,
    /// Transported in a cache, then dispatched into the reader's mailbox.
    CacheUnpack { cache: CacheId, offset: u32 },
    /// Read in place from an inbound cache.
    CacheRead { cache: CacheId, offset: u32 },
    /// Folded into an aggregate before crossing partitions.
    Aggregate(i64),
}

impl Route {
    pub fn via_mailbox(&self) -> bool {
        matches!(self, Route::Mailbox | Route::CacheUnpack { .. } | Route::Aggregate(_))
    }
}

/// One input of a staged program, keyed by its sender for fold order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StagedInput {
    pub sender: i64,
    pub expr: StagedExpr,
}

#[derive(Clone, Debug)]
pub struct AgentPlan {
    pub agent: AgentId,
    pub equation: BehavioralEquation,
    pub method: Arc<dyn ComputeMethod>,
    pub refined: RefinedNeighbors,
    /// One route per reference, in reference order.
    pub routes: Vec<(StateRef, Route)>,
    /// Inputs sorted by sender; filled in when the pipeline finishes.
    pub program: Vec<StagedInput>,
}

impl AgentPlan {
    /// The staged update program as a single fold.
    pub fn staged(&self) -> StagedExpr {
        StagedExpr::PartialFold {
            inputs: self.program.iter().map(|i| i.expr.clone()).collect(),
            via: self.equation.compute,
        }
    }

    /// Computation tree of the (rewritten) program. Leaves that still cross
    /// partitions are `Remote`.
    pub fn tree(&self, home: PartitionId, owner: &[PartitionId]) -> ComputationTree {
        let mut leaves = vec![Leaf {
            source: LeafSource::State(self.equation.lhs),
            accessor: Accessor::Local,
            partition: Some(home),
        }];
        let mut seen_aggregates = Vec::new();
        for &(r, route) in &self.routes {
            let remote_part = Some(owner[r.agent as usize]);
            let leaf = match route {
                Route::Mailbox | Route::CacheUnpack { .. } => Leaf {
                    source: LeafSource::State(r),
                    accessor: if remote_part == Some(home) {
                        Accessor::Local
                    } else {
                        Accessor::Remote
                    },
                    partition: remote_part,
                },
                Route::Local => Leaf {
                    source: LeafSource::State(r),
                    accessor: Accessor::Local,
                    partition: Some(home),
                },
                Route::CacheRead { cache, offset } => Leaf {
                    source: LeafSource::CacheOffset { cache, offset },
                    accessor: Accessor::Local,
                    partition: Some(home),
                },
                Route::Aggregate(id) => {
                    if seen_aggregates.contains(&id) {
                        continue;
                    }
                    seen_aggregates.push(id);
                    Leaf {
                        source: LeafSource::Dynamic(id),
                        accessor: Accessor::Remote,
                        partition: remote_part,
                    }
                }
            };
            leaves.push(leaf);
        }
        ComputationTree {
            root: ApplyNode {
                result: self.equation.rhs,
                op: self.equation.compute,
                partition: Some(home),
            },
            leaves,
        }
    }
}

/// A state created by aggregation pushdown: folds the messages of `senders`
/// (all in `host`) for `target` with the target's `partial_compute`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicStateRef {
    pub id: i64,
    pub host: PartitionId,
    pub target: AgentId,
    pub fold_op: ComputeMethodId,
    pub senders: Vec<AgentId>,
}

impl DynamicStateRef {
    pub fn staged(&self) -> StagedExpr {
        StagedExpr::PartialFold {
            inputs: self
                .senders
                .iter()
                .map(|&s| StagedExpr::LocalRead {
                    target: StateRef::agent(s),
                    buffer: Buffer::Current,
                })
                .collect(),
            via: self.fold_op,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PartitionPlan {
    pub partition: Partition,
    /// Aligned with `partition.members`.
    pub agents: Vec<AgentPlan>,
    pub inbound_caches: Vec<CacheId>,
    pub outbound_caches: Vec<CacheId>,
    /// Aggregates hosted by this partition.
    pub aggregators: Vec<DynamicStateRef>,
    /// Execution order over member indices.
    pub merged_order: Vec<u32>,
    pub merged: bool,
    pub double_buffered: bool,
    /// Per member: readers that receive its message through the mailbox.
    pub mail_out: Vec<Vec<AgentId>>,
    /// Per inbound cache (same order as `inbound_caches`), per slot: member
    /// indices that receive the slot through the mailbox.
    pub cache_unpack: Vec<Vec<Vec<u32>>>,
}

impl PartitionPlan {
    pub fn id(&self) -> PartitionId {
        self.partition.id
    }

    /// Trees of all members with shared leaves merged.
    pub fn merged_forest(&self, owner: &[PartitionId]) -> MergedForest {
        let trees: Vec<ComputationTree> = self
            .agents
            .iter()
            .map(|a| a.tree(self.id(), owner))
            .collect();
        MergedForest::merge(&trees)
    }
}

/// Wall time spent in each pass, summed over partitions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PassTimings {
    pub refine: Duration,
    pub pushdown: Duration,
    pub synthesize: Duration,
    pub rewrite_remote: Duration,
    pub rewrite_local: Duration,
    pub merge: Duration,
    /// Including route linking.
    pub total: Duration,
}

/// The optimizer's output for a whole workload.
#[derive(Clone, Debug)]
pub struct Plan {
    pub passes: PassSet,
    pub partitions: Vec<PartitionPlan>,
    pub caches: Vec<MessageCache>,
    /// Partition of every agent.
    pub owner: Vec<PartitionId>,
    /// Index of every agent within its partition.
    pub local_index: Vec<u32>,
    pub timings: PassTimings,
}

impl Plan {
    pub fn agent_count(&self) -> usize {
        self.owner.len()
    }

    pub fn agent(&self, a: AgentId) -> &AgentPlan {
        &self.partitions[self.owner[a as usize] as usize].agents[self.local_index[a as usize] as usize]
    }

    /// Replaces every partition's execution order with a seeded permutation.
    pub fn shuffle_merged_orders(&mut self, seed: u64) {
        for p in &mut self.partitions {
            let mut rng = rng::keyed(seed, p.id() as u64);
            p.merged_order.shuffle(&mut rng);
        }
    }

    pub fn aggregators(&self) -> impl Iterator<Item = &DynamicStateRef> {
        self.partitions.iter().flat_map(|p| p.aggregators.iter())
    }
}
