use std::sync::Arc;

use super::{Workload, WorkloadError};
use crate::equations::{
    AlgebraicFlags, ComputeMethod, ComputeMethodId, Message, StepCtx, TypeTag, Value,
};
use crate::graph::{torus2d, Graph};
use crate::rng::{self, Rng};

/// Conway's Game of Life on a Moore neighborhood. Alive cells send 1,
/// dead cells 0; the fold is the integer sum.
#[derive(Debug)]
pub struct GolContract {
    id: ComputeMethodId,
}

impl GolContract {
    pub fn new() -> Self {
        Self {
            id: ComputeMethodId::new("gol"),
        }
    }
}

impl Default for GolContract {
    fn default() -> Self {
        Self::new()
    }
}

impl ComputeMethod for GolContract {
    fn id(&self) -> ComputeMethodId {
        self.id
    }
    fn value_type(&self) -> TypeTag {
        TypeTag::Bool
    }
    fn in_type(&self) -> TypeTag {
        TypeTag::Int
    }
    fn out_type(&self) -> TypeTag {
        TypeTag::Int
    }

    fn state_to_message(&self, value: &Value) -> Option<Message> {
        let Value::Bool(alive) = value else {
            return None;
        };
        Some(Message::Int(*alive as i64))
    }

    fn partial_compute(&self, messages: &[Message]) -> Option<Message> {
        if messages.is_empty() {
            None
        } else {
            Some(Message::Int(messages.iter().map(Message::as_int).sum()))
        }
    }

    fn update_state(&self, value: &Value, folded: Option<Message>, _ctx: &StepCtx) -> Value {
        let Value::Bool(s) = *value else {
            return *value;
        };
        match folded {
            None => Value::Bool(s),
            Some(m) => {
                let n = m.as_int();
                if n == 3 {
                    Value::Bool(true)
                } else if !(2..=3).contains(&n) {
                    Value::Bool(false)
                } else {
                    Value::Bool(s)
                }
            }
        }
    }

    fn algebraic_flags(&self) -> AlgebraicFlags {
        AlgebraicFlags::BOTH
    }
}

/// Game of Life on a `width x height` torus with each cell alive with
/// probability 1/2, drawn from the cell's own stream.
pub fn gol(width: usize, height: usize, seed: u64) -> Result<Workload, WorkloadError> {
    gol_from_cells(width, height, random_cells(width * height, seed))
}

/// Game of Life with explicit initial cells (row-major).
pub fn gol_from_cells(
    width: usize,
    height: usize,
    cells: Vec<bool>,
) -> Result<Workload, WorkloadError> {
    gol_on_graph(torus2d(width, height)?, cells)
}

/// Game of Life rules on an arbitrary graph.
pub fn gol_on_graph(graph: Graph, cells: Vec<bool>) -> Result<Workload, WorkloadError> {
    let contract: Arc<dyn ComputeMethod> = Arc::new(GolContract::new());
    Workload::from_graph(
        "gol",
        graph,
        |_| contract.clone(),
        cells.into_iter().map(Value::Bool).collect(),
    )
}

/// Random initial cells, each alive with probability 1/2 from its own stream.
pub fn random_cells(n: usize, seed: u64) -> Vec<bool> {
    (0..n)
        .map(|a| rng::keyed(seed, a as u64).gen_bool(0.5))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::default_run;

    fn ctx() -> StepCtx {
        StepCtx {
            agent: 0,
            superstep: 0,
            seed: 0,
        }
    }

    #[test]
    fn rules() {
        let c = GolContract::new();
        let run = |s: bool, ms: &[i64]| {
            let ms: Vec<Message> = ms.iter().map(|&v| Message::Int(v)).collect();
            default_run(&c, &Value::Bool(s), &ms, &ctx()).unwrap()
        };
        assert_eq!(run(false, &[1, 1, 1]), Value::Bool(true));
        assert_eq!(run(true, &[1, 1]), Value::Bool(true));
        assert_eq!(run(true, &[1, 1, 1, 1]), Value::Bool(false));
        assert_eq!(run(true, &[1]), Value::Bool(false));
        assert_eq!(run(true, &[]), Value::Bool(true));
        assert_eq!(run(false, &[]), Value::Bool(false));
    }

    #[test]
    fn wrong_message_type_is_reported() {
        let c = GolContract::new();
        let err = default_run(&c, &Value::Bool(true), &[Message::Float(1.0)], &ctx());
        assert!(err.is_err());
    }
}
