//! Small contracts used in examples and tests.

use crate::equations::{
    AlgebraicFlags, ComputeMethod, ComputeMethodId, Message, StepCtx, TypeTag, Value,
};

/// `v' = min(v, 1 + min(messages))`: hop distance relaxation.
#[derive(Debug)]
pub struct MinHopContract {
    id: ComputeMethodId,
}

impl MinHopContract {
    pub fn new() -> Self {
        Self {
            id: ComputeMethodId::new("op"),
        }
    }
}

impl Default for MinHopContract {
    fn default() -> Self {
        Self::new()
    }
}

impl ComputeMethod for MinHopContract {
    fn id(&self) -> ComputeMethodId {
        self.id
    }
    fn value_type(&self) -> TypeTag {
        TypeTag::Int
    }
    fn in_type(&self) -> TypeTag {
        TypeTag::Int
    }
    fn out_type(&self) -> TypeTag {
        TypeTag::Int
    }

    fn state_to_message(&self, value: &Value) -> Option<Message> {
        match value {
            Value::Int(v) => Some(Message::Int(*v)),
            _ => None,
        }
    }

    fn partial_compute(&self, messages: &[Message]) -> Option<Message> {
        messages.iter().map(Message::as_int).min().map(Message::Int)
    }

    fn update_state(&self, value: &Value, folded: Option<Message>, _ctx: &StepCtx) -> Value {
        match (*value, folded) {
            (Value::Int(v), Some(m)) => Value::Int(v.min(m.as_int().saturating_add(1))),
            _ => *value,
        }
    }

    fn algebraic_flags(&self) -> AlgebraicFlags {
        AlgebraicFlags::BOTH
    }
}

/// `v' = v + sign * sum(messages)` over integers.
#[derive(Debug)]
pub struct AffineContract {
    id: ComputeMethodId,
    sign: i64,
}

impl AffineContract {
    /// `f(m, x) = x + m`
    pub fn add(name: &str) -> Self {
        Self {
            id: ComputeMethodId::new(name),
            sign: 1,
        }
    }

    /// `g(m, x) = x - m`
    pub fn sub(name: &str) -> Self {
        Self {
            id: ComputeMethodId::new(name),
            sign: -1,
        }
    }

    /// The same function over a flat argument list: messages first, the
    /// state's own value last.
    pub fn apply(&self, args: &[i64]) -> i64 {
        match args.split_last() {
            Some((x, ms)) => x + self.sign * ms.iter().sum::<i64>(),
            None => 0,
        }
    }
}

impl ComputeMethod for AffineContract {
    fn id(&self) -> ComputeMethodId {
        self.id
    }
    fn value_type(&self) -> TypeTag {
        TypeTag::Int
    }
    fn in_type(&self) -> TypeTag {
        TypeTag::Int
    }
    fn out_type(&self) -> TypeTag {
        TypeTag::Int
    }

    fn state_to_message(&self, value: &Value) -> Option<Message> {
        match value {
            Value::Int(v) => Some(Message::Int(*v)),
            _ => None,
        }
    }

    fn partial_compute(&self, messages: &[Message]) -> Option<Message> {
        if messages.is_empty() {
            None
        } else {
            Some(Message::Int(messages.iter().map(Message::as_int).sum()))
        }
    }

    fn update_state(&self, value: &Value, folded: Option<Message>, _ctx: &StepCtx) -> Value {
        match (*value, folded) {
            (Value::Int(v), Some(m)) => Value::Int(v + self.sign * m.as_int()),
            _ => *value,
        }
    }

    fn algebraic_flags(&self) -> AlgebraicFlags {
        AlgebraicFlags::BOTH
    }
}
