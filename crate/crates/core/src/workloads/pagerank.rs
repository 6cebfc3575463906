use std::sync::Arc;

use super::{Workload, WorkloadError};
use crate::equations::{
    AlgebraicFlags, ComputeMethod, ComputeMethodId, Message, StepCtx, TypeTag, Value,
};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PageRankState {
    pub pr: f64,
    /// Mass added in the last update; sent on when positive.
    pub delta: f64,
    pub out_degree: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PageRankParams {
    /// Last superstep that updates values.
    pub max_iteration: u64,
    /// Declares the float sum associative and commutative so that messages
    /// may be aggregated at the senders. Results then match the exact mode
    /// only within rounding.
    pub tolerance_mode: bool,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self {
            max_iteration: 30,
            tolerance_mode: false,
        }
    }
}

/// Accumulative-delta PageRank. At superstep 0 every vertex starts from
/// 0.15; afterwards the received mass is added to the rank and 85% of it is
/// split evenly over the out-edges.
#[derive(Debug)]
pub struct PageRankContract {
    id: ComputeMethodId,
    params: PageRankParams,
}

impl PageRankContract {
    pub fn new(params: PageRankParams) -> Self {
        Self {
            id: ComputeMethodId::new("pagerank"),
            params,
        }
    }
}

impl ComputeMethod for PageRankContract {
    fn id(&self) -> ComputeMethodId {
        self.id
    }
    fn value_type(&self) -> TypeTag {
        TypeTag::PageRank
    }
    fn in_type(&self) -> TypeTag {
        TypeTag::Float
    }
    fn out_type(&self) -> TypeTag {
        TypeTag::Float
    }

    fn state_to_message(&self, value: &Value) -> Option<Message> {
        let Value::PageRank(s) = value else {
            return None;
        };
        (s.delta > 0.0).then(|| Message::Float(0.85 * s.delta / s.out_degree as f64))
    }

    /// Sum in the given order.
    fn partial_compute(&self, messages: &[Message]) -> Option<Message> {
        if messages.is_empty() {
            return None;
        }
        let mut acc = 0.0;
        for m in messages {
            acc += m.as_float();
        }
        Some(Message::Float(acc))
    }

    fn update_state(&self, value: &Value, folded: Option<Message>, ctx: &StepCtx) -> Value {
        let Value::PageRank(mut s) = *value else {
            return *value;
        };
        if ctx.superstep > self.params.max_iteration {
            s.delta = 0.0;
            return Value::PageRank(s);
        }
        let mut delta = 0.0;
        if ctx.superstep == 0 {
            s.pr = 0.0;
            delta += 0.15;
        }
        delta += folded.map_or(0.0, |m| m.as_float());
        if delta > 0.0 {
            s.pr += delta;
        }
        s.delta = delta;
        Value::PageRank(s)
    }

    fn algebraic_flags(&self) -> AlgebraicFlags {
        if self.params.tolerance_mode {
            AlgebraicFlags::BOTH
        } else {
            AlgebraicFlags::NONE
        }
    }
}

/// PageRank over `graph`; every vertex needs at least one edge.
pub fn pagerank(graph: Graph, params: PageRankParams) -> Result<Workload, WorkloadError> {
    let n = graph.vertex_count();
    if let Some(v) = (0..n as u32).find(|&v| graph.degree(v) == 0) {
        return Err(WorkloadError::Parameter(format!(
            "vertex {v} has no out-edges"
        )));
    }
    let initial = (0..n as u32)
        .map(|v| {
            Value::PageRank(PageRankState {
                pr: 0.0,
                delta: 0.0,
                out_degree: graph.degree(v) as u32,
            })
        })
        .collect();
    let contract: Arc<dyn ComputeMethod> = Arc::new(PageRankContract::new(params));
    let mut w = Workload::from_graph("pagerank", graph, |_| contract.clone(), initial)?;
    if params.tolerance_mode {
        w.pushdown_targets = (0..n as u32).collect();
    }
    Ok(w)
}

/// Reference ranks: `iterations` steps of `x <- 0.15 + 0.85 * M x` from
/// `x = 0`, where `M` spreads each rank evenly over its neighbors.
pub fn power_iteration(graph: &Graph, iterations: usize) -> Vec<f64> {
    let n = graph.vertex_count();
    let mut x = vec![0.0; n];
    for _ in 0..iterations {
        let mut next = vec![0.15; n];
        for u in 0..n as u32 {
            let share = 0.85 * x[u as usize] / graph.degree(u) as f64;
            for &v in graph.neighbors(u) {
                next[v as usize] += share;
            }
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_superstep_seeds_mass() {
        let c = PageRankContract::new(PageRankParams::default());
        let v = Value::PageRank(PageRankState {
            pr: 7.0,
            delta: 0.0,
            out_degree: 2,
        });
        let ctx = StepCtx {
            agent: 0,
            superstep: 0,
            seed: 0,
        };
        let after = c.update_state(&v, None, &ctx);
        let Value::PageRank(s) = after else {
            unreachable!()
        };
        assert_eq!(s.pr, 0.15);
        assert_eq!(c.state_to_message(&after), Some(Message::Float(0.85 * 0.15 / 2.0)));

        let later = StepCtx { superstep: 3, ..ctx };
        let idle = c.update_state(&after, Some(Message::Float(0.0)), &later);
        assert_eq!(c.state_to_message(&idle), None);
    }

    #[test]
    fn dangling_vertices_are_rejected() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(pagerank(g, PageRankParams::default()).is_err());
    }
}
