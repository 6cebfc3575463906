use std::sync::Arc;

use super::{Workload, WorkloadError};
use crate::equations::{
    AlgebraicFlags, ComputeMethod, ComputeMethodId, Message, StepCtx, TypeTag, Value,
};
use crate::graph::Graph;
use crate::rng::{self, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SirStatus {
    Susceptible,
    Infected,
    Recovered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SirState {
    pub status: SirStatus,
    /// Superstep of infection; set exactly when infected.
    pub infected_since: Option<u32>,
}

impl SirState {
    pub const SUSCEPTIBLE: Self = Self {
        status: SirStatus::Susceptible,
        infected_since: None,
    };
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpidemicsParams {
    /// Per-contact infection probability.
    pub beta: f64,
    /// Supersteps an agent stays infected.
    pub recovery_rounds: u32,
}

impl Default for EpidemicsParams {
    fn default() -> Self {
        Self {
            beta: 0.05,
            recovery_rounds: 5,
        }
    }
}

/// SIR dynamics. Infected agents send 1, others 0; a susceptible agent with
/// `k` infected neighbors becomes infected with probability `1 - (1-beta)^k`,
/// drawn from its own stream for the superstep.
#[derive(Debug)]
pub struct EpidemicsContract {
    id: ComputeMethodId,
    params: EpidemicsParams,
}

impl EpidemicsContract {
    pub fn new(params: EpidemicsParams) -> Result<Self, WorkloadError> {
        if !(0.0..=1.0).contains(&params.beta) {
            return Err(WorkloadError::Parameter(format!(
                "beta {} not in [0, 1]",
                params.beta
            )));
        }
        Ok(Self {
            id: ComputeMethodId::new("sir"),
            params,
        })
    }
}

impl ComputeMethod for EpidemicsContract {
    fn id(&self) -> ComputeMethodId {
        self.id
    }
    fn value_type(&self) -> TypeTag {
        TypeTag::Sir
    }
    fn in_type(&self) -> TypeTag {
        TypeTag::Int
    }
    fn out_type(&self) -> TypeTag {
        TypeTag::Int
    }

    fn state_to_message(&self, value: &Value) -> Option<Message> {
        let Value::Sir(s) = value else {
            return None;
        };
        Some(Message::Int((s.status == SirStatus::Infected) as i64))
    }

    fn partial_compute(&self, messages: &[Message]) -> Option<Message> {
        if messages.is_empty() {
            None
        } else {
            Some(Message::Int(messages.iter().map(Message::as_int).sum()))
        }
    }

    fn update_state(&self, value: &Value, folded: Option<Message>, ctx: &StepCtx) -> Value {
        let Value::Sir(s) = *value else {
            return *value;
        };
        let step = ctx.superstep as u32;
        let next = match s.status {
            SirStatus::Susceptible => {
                let k = folded.map_or(0, |m| m.as_int()).max(0);
                let p = 1.0 - (1.0 - self.params.beta).powi(k as i32);
                if k > 0 && rng::for_agent_step(ctx.seed, ctx.agent, ctx.superstep).gen_bool(p)
                {
                    SirState {
                        status: SirStatus::Infected,
                        infected_since: Some(step),
                    }
                } else {
                    s
                }
            }
            SirStatus::Infected => {
                let since = s.infected_since.unwrap_or(0);
                if step >= since + self.params.recovery_rounds {
                    SirState {
                        status: SirStatus::Recovered,
                        infected_since: None,
                    }
                } else {
                    s
                }
            }
            SirStatus::Recovered => s,
        };
        Value::Sir(next)
    }

    fn algebraic_flags(&self) -> AlgebraicFlags {
        AlgebraicFlags::BOTH
    }
}

/// SIR epidemic on `graph` with one initially infected agent chosen by the
/// seed.
pub fn epidemics(graph: Graph, params: EpidemicsParams, seed: u64) -> Result<Workload, WorkloadError> {
    let n = graph.vertex_count();
    if n == 0 {
        return Err(WorkloadError::Parameter("epidemics needs at least one agent".into()));
    }
    let contract: Arc<dyn ComputeMethod> = Arc::new(EpidemicsContract::new(params)?);
    let patient_zero = rng::keyed(seed, 0x51E).gen_range(0..n);
    let initial = (0..n)
        .map(|a| {
            Value::Sir(if a == patient_zero {
                SirState {
                    status: SirStatus::Infected,
                    infected_since: Some(0),
                }
            } else {
                SirState::SUSCEPTIBLE
            })
        })
        .collect();
    Workload::from_graph("epidemics", graph, |_| contract.clone(), initial)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(step: u64) -> StepCtx {
        StepCtx {
            agent: 4,
            superstep: step,
            seed: 1,
        }
    }

    #[test]
    fn transitions() {
        let sure = EpidemicsContract::new(EpidemicsParams {
            beta: 1.0,
            recovery_rounds: 2,
        })
        .unwrap();
        let s = Value::Sir(SirState::SUSCEPTIBLE);
        assert_eq!(sure.update_state(&s, Some(Message::Int(0)), &ctx(0)), s);
        let Value::Sir(infected) = sure.update_state(&s, Some(Message::Int(3)), &ctx(3)) else {
            unreachable!()
        };
        assert_eq!(infected.status, SirStatus::Infected);
        assert_eq!(infected.infected_since, Some(3));
        let v = Value::Sir(infected);
        assert_eq!(sure.update_state(&v, None, &ctx(4)), v);
        let Value::Sir(r) = sure.update_state(&v, None, &ctx(5)) else {
            unreachable!()
        };
        assert_eq!(r.status, SirStatus::Recovered);
        assert!(EpidemicsContract::new(EpidemicsParams {
            beta: 2.0,
            recovery_rounds: 1
        })
        .is_err());
    }
}
