//! Behavioral equations, compute-method contracts and computation trees.
//!
//! An agent's per-superstep behavior is the equation `p := f{i1..in}.q`:
//! state `p` folds the messages of its references with `f` and becomes `q`.
//! The function `f` is a [`ComputeMethod`], a bundle of four combinators:
//! `state_to_message` turns a value into the message its readers see,
//! `partial_compute` folds received messages, `update_state` applies the
//! folded message, and `deserialize` converts an outgoing message into the
//! receiver's incoming type.

mod contract;
mod tree;
mod value;

use std::fmt;

pub use contract::{
    check_algebraic_flags, default_run, AlgebraicFlags, ComputeMethod, ContractError,
    ContractRegistry, StepCtx, FLAG_CHECK_CASES,
};
pub use tree::{
    to_computation_tree, Accessor, ApplyNode, ComputationTree, Leaf, LeafSource, MergedForest,
};
pub use value::{Message, TypeTag, Value};

use crate::symbol::Symbol;

pub type AgentId = u32;
pub type PartitionId = u32;

/// A reference to an agent's state, optionally pinned to one generation
/// (superstep) when equations are unrolled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateRef {
    pub agent: AgentId,
    pub generation: Option<u32>,
}

impl StateRef {
    pub const fn agent(agent: AgentId) -> Self {
        Self {
            agent,
            generation: None,
        }
    }

    pub const fn at(agent: AgentId, generation: u32) -> Self {
        Self {
            agent,
            generation: Some(generation),
        }
    }
}

impl fmt::Display for StateRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.generation {
            None => write!(f, "x{}", self.agent),
            Some(g) => write!(f, "x{}@{g}", self.agent),
        }
    }
}

/// Name of a compute method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComputeMethodId(pub Symbol);

impl ComputeMethodId {
    pub fn new(name: &str) -> Self {
        Self(Symbol::intern(name))
    }
}

impl fmt::Display for ComputeMethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `lhs := compute{references}.rhs`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BehavioralEquation {
    pub lhs: StateRef,
    pub compute: ComputeMethodId,
    /// Ordered so that floating-point folds are reproducible; semantically a
    /// multiset.
    pub references: Vec<StateRef>,
    pub rhs: StateRef,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EquationError {
    #[error("{lhs} references {reference} more than once")]
    DuplicateReference { lhs: StateRef, reference: StateRef },
    #[error("no placement for {0}")]
    MissingPlacement(StateRef),
}

impl BehavioralEquation {
    pub fn new(
        lhs: StateRef,
        compute: ComputeMethodId,
        references: Vec<StateRef>,
        rhs: StateRef,
    ) -> Result<Self, EquationError> {
        for (i, r) in references.iter().enumerate() {
            if references[..i].contains(r) {
                return Err(EquationError::DuplicateReference {
                    lhs,
                    reference: *r,
                });
            }
        }
        Ok(Self {
            lhs,
            compute,
            references,
            rhs,
        })
    }

    /// `x := compute{refs}.x` for agent `x`.
    pub fn recursive(
        agent: AgentId,
        compute: ComputeMethodId,
        references: impl IntoIterator<Item = AgentId>,
    ) -> Result<Self, EquationError> {
        let me = StateRef::agent(agent);
        Self::new(
            me,
            compute,
            references.into_iter().map(StateRef::agent).collect(),
            me,
        )
    }

    pub fn is_recursive(&self) -> bool {
        self.lhs == self.rhs
    }
}

impl fmt::Display for BehavioralEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} := {}{{", self.lhs, self.compute)?;
        for (i, r) in self.references.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "}}.{}", self.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_rejected() {
        let op = ComputeMethodId::new("op");
        assert!(BehavioralEquation::recursive(1, op, [2, 3, 2]).is_err());
        let eq = BehavioralEquation::recursive(1, op, [2, 3, 4]).unwrap();
        assert!(eq.is_recursive());
        assert_eq!(eq.to_string(), "x1 := op{x2, x3, x4}.x1");
    }
}
