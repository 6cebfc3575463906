use std::collections::{BTreeMap, HashMap};

use super::{BehavioralEquation, ComputeMethodId, EquationError, PartitionId, StateRef};

/// What a leaf reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LeafSource {
    State(StateRef),
    CacheOffset { cache: u32, offset: u32 },
    /// A state created by the optimizer; ids are negative.
    Dynamic(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Accessor {
    Local,
    Remote,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Leaf {
    pub source: LeafSource,
    pub accessor: Accessor,
    pub partition: Option<PartitionId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ApplyNode {
    pub result: StateRef,
    pub op: ComputeMethodId,
    pub partition: Option<PartitionId>,
}

/// An equation drawn as an apply node over its inputs: the state's own
/// value followed by its references.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ComputationTree {
    pub root: ApplyNode,
    pub leaves: Vec<Leaf>,
}

impl ComputationTree {
    pub fn node_count(&self) -> usize {
        1 + self.leaves.len()
    }
}

/// Builds the tree of `eq`. The leaf for the state's own value is local;
/// a reference is local exactly when it is placed with the state.
pub fn to_computation_tree(
    eq: &BehavioralEquation,
    placement: &HashMap<StateRef, PartitionId>,
) -> Result<ComputationTree, EquationError> {
    let place = |s: StateRef| {
        placement
            .get(&s)
            .copied()
            .ok_or(EquationError::MissingPlacement(s))
    };
    let home = place(eq.lhs)?;
    let mut leaves = Vec::with_capacity(eq.references.len() + 1);
    leaves.push(Leaf {
        source: LeafSource::State(eq.lhs),
        accessor: Accessor::Local,
        partition: Some(home),
    });
    for r in &eq.references {
        let p = place(*r)?;
        leaves.push(Leaf {
            source: LeafSource::State(*r),
            accessor: if p == home {
                Accessor::Local
            } else {
                Accessor::Remote
            },
            partition: Some(p),
        });
    }
    Ok(ComputationTree {
        root: ApplyNode {
            result: eq.rhs,
            op: eq.compute,
            partition: Some(home),
        },
        leaves,
    })
}

/// Trees of several agents with leaves shared by structural identity
/// `(source, accessor)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MergedForest {
    pub roots: Vec<ApplyNode>,
    pub leaves: Vec<Leaf>,
    /// `(root index, leaf index)` in input order per root.
    pub edges: Vec<(usize, usize)>,
}

impl MergedForest {
    pub fn merge<'a>(trees: impl IntoIterator<Item = &'a ComputationTree>) -> Self {
        let mut forest = MergedForest::default();
        let mut index: BTreeMap<(LeafSource, Accessor), usize> = BTreeMap::new();
        for tree in trees {
            let r = forest.roots.len();
            forest.roots.push(tree.root);
            for leaf in &tree.leaves {
                let k = *index.entry((leaf.source, leaf.accessor)).or_insert_with(|| {
                    forest.leaves.push(*leaf);
                    forest.leaves.len() - 1
                });
                forest.edges.push((r, k));
            }
        }
        forest
    }

    pub fn node_count(&self) -> usize {
        self.roots.len() + self.leaves.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_placement_marks_remote_leaves() {
        let op = ComputeMethodId::new("op");
        let eq = BehavioralEquation::new(
            StateRef::agent(1),
            op,
            vec![StateRef::agent(2), StateRef::agent(3), StateRef::agent(4)],
            StateRef::at(1, 1),
        )
        .unwrap();
        let placement: HashMap<StateRef, PartitionId> = [(1, 1), (2, 1), (3, 2), (4, 2)]
            .into_iter()
            .map(|(a, p)| (StateRef::agent(a), p))
            .collect();
        let t = to_computation_tree(&eq, &placement).unwrap();
        let acc: Vec<Accessor> = t.leaves.iter().map(|l| l.accessor).collect();
        assert_eq!(
            acc,
            [Accessor::Local, Accessor::Local, Accessor::Remote, Accessor::Remote]
        );
        assert_eq!(t.root.result, StateRef::at(1, 1));

        let mut partial = placement.clone();
        partial.remove(&StateRef::agent(4));
        assert_eq!(
            to_computation_tree(&eq, &partial),
            Err(EquationError::MissingPlacement(StateRef::agent(4)))
        );
    }
}
