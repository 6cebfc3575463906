//! Partitioning strategies.

use std::collections::VecDeque;

use super::{Graph, GraphError, VertexId};
use crate::equations::PartitionId;
use crate::rng::{self, Rng, SliceRandom};

/// An edge leaving a partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CrossEdge {
    pub source: VertexId,
    pub target: VertexId,
    pub target_partition: PartitionId,
}

/// A set of co-located vertices with its induced topology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub id: PartitionId,
    /// Sorted ascending.
    pub members: Vec<VertexId>,
    /// Directed edges with both ends inside the partition.
    pub internal_edges: Vec<(VertexId, VertexId)>,
    /// Directed edges from a member to a vertex of another partition.
    pub cross_edges: Vec<CrossEdge>,
}

impl Partition {
    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A disjoint cover of a graph's vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partitioning {
    pub parts: Vec<Partition>,
    /// Partition of every vertex.
    pub assignment: Vec<PartitionId>,
}

impl Partitioning {
    /// Builds partitions from a vertex-to-partition map. Partition ids must
    /// be dense; empty partitions are kept.
    pub fn from_assignment(g: &Graph, assignment: Vec<PartitionId>) -> Self {
        assert_eq!(assignment.len(), g.vertex_count());
        let count = assignment.iter().map(|&p| p as usize + 1).max().unwrap_or(0);
        let mut parts: Vec<Partition> = (0..count)
            .map(|id| Partition {
                id: id as PartitionId,
                members: Vec::new(),
                internal_edges: Vec::new(),
                cross_edges: Vec::new(),
            })
            .collect();
        for v in 0..g.vertex_count() as VertexId {
            let part = &mut parts[assignment[v as usize] as usize];
            part.members.push(v);
            for &w in g.neighbors(v) {
                let target_partition = assignment[w as usize];
                if target_partition == part.id {
                    part.internal_edges.push((v, w));
                } else {
                    part.cross_edges.push(CrossEdge {
                        source: v,
                        target: w,
                        target_partition,
                    });
                }
            }
        }
        Self { parts, assignment }
    }

    /// Everything in one partition.
    pub fn single(g: &Graph) -> Self {
        Self::from_assignment(g, vec![0; g.vertex_count()])
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn partition_of(&self, v: VertexId) -> PartitionId {
        self.assignment[v as usize]
    }

    /// Number of directed edges between different partitions.
    pub fn cross_edge_count(&self) -> usize {
        self.parts.iter().map(|p| p.cross_edges.len()).sum()
    }
}

fn check_target(target: usize) -> Result<(), GraphError> {
    if target == 0 {
        Err(GraphError::Parameter("target partition size must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// Seeded shuffle of the vertices, cut into chunks of `target` vertices.
pub fn partition_random(g: &Graph, target: usize, seed: u64) -> Result<Partitioning, GraphError> {
    check_target(target)?;
    let mut order: Vec<VertexId> = (0..g.vertex_count() as VertexId).collect();
    order.shuffle(&mut rng::keyed(seed, 0x7A2D));
    let mut assignment = vec![0; g.vertex_count()];
    for (i, v) in order.into_iter().enumerate() {
        assignment[v as usize] = (i / target) as PartitionId;
    }
    Ok(Partitioning::from_assignment(g, assignment))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HashMode {
    /// `id / target`: consecutive id ranges.
    Div,
    /// `id mod ceil(n / target)`: strided round-robin.
    Mod,
}

pub fn partition_hash(g: &Graph, target: usize, mode: HashMode) -> Result<Partitioning, GraphError> {
    check_target(target)?;
    let n = g.vertex_count();
    let k = n.div_ceil(target).max(1);
    let assignment = (0..n)
        .map(|v| match mode {
            HashMode::Div => (v / target) as PartitionId,
            HashMode::Mod => (v % k) as PartitionId,
        })
        .collect();
    Ok(Partitioning::from_assignment(g, assignment))
}

/// Breadth-first growth: each partition starts at a randomly chosen
/// unplaced vertex and absorbs unplaced neighbors in FIFO order (neighbors
/// in ascending id) until it reaches `target` vertices. When the reachable
/// unplaced region runs out first, a new random start joins the same
/// partition.
pub fn partition_greedy(g: &Graph, target: usize, seed: u64) -> Result<Partitioning, GraphError> {
    check_target(target)?;
    let n = g.vertex_count();
    let mut rng = rng::keyed(seed, 0x6EED);
    const UNPLACED: PartitionId = PartitionId::MAX;
    let mut assignment = vec![UNPLACED; n];
    // Unplaced vertices in ascending order, compacted lazily.
    let mut unplaced: Vec<VertexId> = (0..n as VertexId).collect();
    let mut placed = 0usize;
    let mut part: PartitionId = 0;
    let mut queue = VecDeque::new();
    while placed < n {
        let mut size = 0usize;
        while size < target && placed < n {
            unplaced.retain(|&v| assignment[v as usize] == UNPLACED);
            let start = unplaced[rng.gen_range(0..unplaced.len())];
            assignment[start as usize] = part;
            placed += 1;
            size += 1;
            queue.clear();
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                if size >= target {
                    break;
                }
                for &w in g.neighbors(v) {
                    if size >= target {
                        break;
                    }
                    if assignment[w as usize] == UNPLACED {
                        assignment[w as usize] = part;
                        placed += 1;
                        size += 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        part += 1;
    }
    Ok(Partitioning::from_assignment(g, assignment))
}
