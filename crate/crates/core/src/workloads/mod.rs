//! Benchmark workloads: contracts, graphs, equations and initial states.

mod economics;
mod epidemics;
mod gol;
mod pagerank;
mod small;

use std::sync::Arc;

pub use economics::{
    economics, economics_on_graph, EconomicsParams, MarketContract, MarketState, PriceWindow, TraderContract,
    TraderState, INITIAL_PRICE_CENTS, MAX_WINDOW,
};
pub use epidemics::{epidemics, EpidemicsContract, EpidemicsParams, SirState, SirStatus};
pub use gol::{gol, gol_from_cells, gol_on_graph, random_cells, GolContract};
pub use pagerank::{pagerank, power_iteration, PageRankContract, PageRankParams, PageRankState};
pub use small::{AffineContract, MinHopContract};

use crate::equations::{
    AgentId, BehavioralEquation, ComputeMethod, ContractError, ContractRegistry, StateRef, Value,
};
use crate::graph::Graph;

#[derive(Debug, thiserror::Error)]
pub enum WorkloadError {
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Equation(#[from] crate::equations::EquationError),
    #[error("invalid workload parameter: {0}")]
    Parameter(String),
}

/// Everything the optimizer and runtime need to simulate one workload.
#[derive(Clone, Debug)]
pub struct Workload {
    pub name: String,
    pub graph: Graph,
    /// One recursive equation per agent, indexed by agent id.
    pub equations: Vec<BehavioralEquation>,
    /// References each agent reads through a fixed communication pattern;
    /// the rest are dynamic. Indexed by agent id.
    pub static_marks: Vec<Vec<StateRef>>,
    pub initial: Vec<Value>,
    pub registry: ContractRegistry,
    /// Agents whose inbound messages may be aggregated at the senders.
    pub pushdown_targets: Vec<AgentId>,
}

impl Workload {
    /// Builds a workload where every agent reads all its graph neighbors
    /// through a static pattern.
    pub fn from_graph(
        name: &str,
        graph: Graph,
        method_of: impl Fn(AgentId) -> Arc<dyn ComputeMethod>,
        initial: Vec<Value>,
    ) -> Result<Self, WorkloadError> {
        let n = graph.vertex_count();
        if initial.len() != n {
            return Err(WorkloadError::Parameter(format!(
                "{} initial values for {n} agents",
                initial.len()
            )));
        }
        let mut registry = ContractRegistry::new();
        let mut equations = Vec::with_capacity(n);
        let mut static_marks = Vec::with_capacity(n);
        for a in 0..n as AgentId {
            let m = method_of(a);
            if registry.get(m.id()).is_err() {
                registry.register(m.clone())?;
            }
            let eq = BehavioralEquation::recursive(a, m.id(), graph.neighbors(a).iter().copied())?;
            static_marks.push(eq.references.clone());
            equations.push(eq);
        }
        Ok(Self {
            name: name.to_owned(),
            graph,
            equations,
            static_marks,
            initial,
            registry,
            pushdown_targets: Vec::new(),
        })
    }

    pub fn agent_count(&self) -> usize {
        self.equations.len()
    }

    /// Marks every reference of every agent as dynamic.
    pub fn with_all_dynamic(mut self) -> Self {
        for marks in &mut self.static_marks {
            marks.clear();
        }
        self
    }
}
