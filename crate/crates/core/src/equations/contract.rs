use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::{AgentId, ComputeMethodId, Message, TypeTag, Value};
use crate::rng::{self, Rng, SliceRandom, SplitMix64};

/// Number of random cases checked when a contract declaring algebraic flags
/// is registered.
pub const FLAG_CHECK_CASES: usize = 200;

/// Where and when an update runs. Stochastic contracts draw from
/// `rng::for_agent_step(seed, agent, superstep)` so results do not
/// depend on partitioning or scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepCtx {
    pub agent: AgentId,
    pub superstep: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AlgebraicFlags {
    pub associative: bool,
    pub commutative: bool,
}

impl AlgebraicFlags {
    pub const NONE: Self = Self {
        associative: false,
        commutative: false,
    };
    pub const BOTH: Self = Self {
        associative: true,
        commutative: true,
    };

    pub fn allows_regrouping(&self) -> bool {
        self.associative && self.commutative
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ContractError {
    #[error("{method}: message from agent {sender} to agent {receiver} has type {got}, expected {expected}")]
    MessageType {
        method: ComputeMethodId,
        sender: i64,
        receiver: AgentId,
        got: TypeTag,
        expected: TypeTag,
    },
    #[error("{method}: state of agent {agent} has type {got}, expected {expected}")]
    ValueType {
        method: ComputeMethodId,
        agent: AgentId,
        got: TypeTag,
        expected: TypeTag,
    },
    #[error("{method} declares associative+commutative partialCompute but regrouping {case} changed the result")]
    FlagsViolated { method: ComputeMethodId, case: String },
    #[error("compute method {0} is not registered")]
    Unregistered(ComputeMethodId),
}

/// The combinator bundle behind a compute method.
pub trait ComputeMethod: Send + Sync {
    fn id(&self) -> ComputeMethodId;
    fn value_type(&self) -> TypeTag;
    fn in_type(&self) -> TypeTag;
    fn out_type(&self) -> TypeTag;

    /// The message readers of this state receive, or `None` to stay silent.
    fn state_to_message(&self, value: &Value) -> Option<Message>;

    /// Folds received messages; `None` for no input.
    fn partial_compute(&self, messages: &[Message]) -> Option<Message>;

    fn update_state(&self, value: &Value, folded: Option<Message>, ctx: &StepCtx) -> Value;

    /// Converts a sender's outgoing message into this method's incoming type.
    fn deserialize(&self, message: Message) -> Message {
        message
    }

    fn algebraic_flags(&self) -> AlgebraicFlags {
        AlgebraicFlags::NONE
    }

    /// `update_state(value, partial_compute(messages))`.
    fn run(&self, value: &Value, messages: &[Message], ctx: &StepCtx) -> Value {
        self.update_state(value, self.partial_compute(messages), ctx)
    }
}

impl fmt::Debug for dyn ComputeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComputeMethod({})", self.id())
    }
}

/// `update_state(state, partial_compute(messages))` with each message
/// checked against the contract's incoming type.
pub fn default_run(
    contract: &dyn ComputeMethod,
    state: &Value,
    messages: &[Message],
    ctx: &StepCtx,
) -> Result<Value, ContractError> {
    if state.tag() != contract.value_type() {
        return Err(ContractError::ValueType {
            method: contract.id(),
            agent: ctx.agent,
            got: state.tag(),
            expected: contract.value_type(),
        });
    }
    for m in messages {
        if m.tag() != contract.in_type() {
            return Err(ContractError::MessageType {
                method: contract.id(),
                sender: -1,
                receiver: ctx.agent,
                got: m.tag(),
                expected: contract.in_type(),
            });
        }
    }
    Ok(contract.run(state, messages, ctx))
}

fn random_message(tag: TypeTag, rng: &mut SplitMix64) -> Message {
    match tag {
        TypeTag::Bool => Message::Bool(rng.gen_bool(0.5)),
        TypeTag::Float => Message::Float(rng.gen::<f64>() * 2.0 - 1.0),
        _ => Message::Int(rng.gen_range(-1000..=1000i64)),
    }
}

fn same(a: Option<Message>, b: Option<Message>) -> bool {
    match (a, b) {
        (Some(Message::Float(x)), Some(Message::Float(y))) => {
            x == y || (x - y).abs() <= 1e-9 * x.abs().max(y.abs())
        }
        _ => a == b,
    }
}

/// Checks a contract's declared flags on random multisets: the fold of the
/// whole must equal the fold of the folds of a random split, after shuffling.
/// Float results are compared with relative tolerance 1e-9.
pub fn check_algebraic_flags(
    contract: &dyn ComputeMethod,
    cases: usize,
    seed: u64,
) -> Result<(), ContractError> {
    if !contract.algebraic_flags().allows_regrouping() {
        return Ok(());
    }
    let mut rng = rng::keyed(seed, 0xF1A9);
    for case in 0..cases {
        let len = rng.gen_range(0..12usize);
        let mut ms: Vec<Message> = (0..len)
            .map(|_| random_message(contract.in_type(), &mut rng))
            .collect();
        let whole = contract.partial_compute(&ms);
        ms.shuffle(&mut rng);
        let cut = rng.gen_range(0..=len);
        let parts: Vec<Message> = [&ms[..cut], &ms[cut..]]
            .into_iter()
            .filter_map(|p| contract.partial_compute(p))
            .collect();
        let regrouped = contract.partial_compute(&parts);
        if !same(whole, regrouped) {
            return Err(ContractError::FlagsViolated {
                method: contract.id(),
                case: format!("#{case} ({len} messages, split at {cut})"),
            });
        }
    }
    Ok(())
}

/// Compute methods by id.
#[derive(Clone, Default)]
pub struct ContractRegistry {
    methods: HashMap<ComputeMethodId, Arc<dyn ComputeMethod>>,
}

impl fmt::Debug for ContractRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.methods.keys()).finish()
    }
}

impl ContractRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a contract after checking its algebraic flags.
    pub fn register(&mut self, contract: Arc<dyn ComputeMethod>) -> Result<(), ContractError> {
        check_algebraic_flags(contract.as_ref(), FLAG_CHECK_CASES, 0x5EED)?;
        self.methods.insert(contract.id(), contract);
        Ok(())
    }

    pub fn get(&self, id: ComputeMethodId) -> Result<&Arc<dyn ComputeMethod>, ContractError> {
        self.methods
            .get(&id)
            .ok_or(ContractError::Unregistered(id))
    }

    pub fn ids(&self) -> impl Iterator<Item = ComputeMethodId> + '_ {
        self.methods.keys().copied()
    }
}
