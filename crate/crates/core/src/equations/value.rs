use std::fmt;
use std::hash::Hasher;

use crate::workloads::{MarketState, PageRankState, SirState, SirStatus, TraderState};

/// Runtime type tag of values and messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeTag {
    Bool,
    Int,
    Float,
    Sir,
    Trader,
    Market,
    PageRank,
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TypeTag::Bool => "bool",
            TypeTag::Int => "int",
            TypeTag::Float => "float",
            TypeTag::Sir => "sir",
            TypeTag::Trader => "trader",
            TypeTag::Market => "market",
            TypeTag::PageRank => "pagerank",
        };
        f.write_str(s)
    }
}

/// A message between agents. Messages are small scalars.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Message {
    Bool(bool),
    Int(i64),
    Float(f64),
}

impl Message {
    pub fn tag(&self) -> TypeTag {
        match self {
            Message::Bool(_) => TypeTag::Bool,
            Message::Int(_) => TypeTag::Int,
            Message::Float(_) => TypeTag::Float,
        }
    }

    /// Integer payload; bools count as 0/1.
    pub fn as_int(&self) -> i64 {
        match *self {
            Message::Bool(b) => b as i64,
            Message::Int(v) => v,
            Message::Float(v) => v as i64,
        }
    }

    pub fn as_float(&self) -> f64 {
        match *self {
            Message::Bool(b) => b as i64 as f64,
            Message::Int(v) => v as f64,
            Message::Float(v) => v,
        }
    }

    /// Size of the payload on the wire.
    pub fn wire_bytes(&self) -> u64 {
        8
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Bool(b) => write!(f, "{b}"),
            Message::Int(v) => write!(f, "{v}"),
            Message::Float(v) => write!(f, "{v}"),
        }
    }
}

/// An agent's state value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Sir(SirState),
    Trader(TraderState),
    Market(MarketState),
    PageRank(PageRankState),
}

impl Value {
    pub fn tag(&self) -> TypeTag {
        match self {
            Value::Bool(_) => TypeTag::Bool,
            Value::Int(_) => TypeTag::Int,
            Value::Float(_) => TypeTag::Float,
            Value::Sir(_) => TypeTag::Sir,
            Value::Trader(_) => TypeTag::Trader,
            Value::Market(_) => TypeTag::Market,
            Value::PageRank(_) => TypeTag::PageRank,
        }
    }

    /// Feeds a platform-independent encoding of the value into `h`.
    pub fn digest<H: Hasher>(&self, h: &mut H) {
        match *self {
            Value::Bool(b) => {
                h.write_u8(0);
                h.write_u8(b as u8);
            }
            Value::Int(v) => {
                h.write_u8(1);
                h.write_i64(v);
            }
            Value::Float(v) => {
                h.write_u8(2);
                h.write_u64(v.to_bits());
            }
            Value::Sir(s) => {
                h.write_u8(3);
                h.write_u8(match s.status {
                    SirStatus::Susceptible => 0,
                    SirStatus::Infected => 1,
                    SirStatus::Recovered => 2,
                });
                h.write_i64(s.infected_since.map_or(-1, i64::from));
            }
            Value::Trader(t) => {
                h.write_u8(4);
                h.write_i64(t.cash);
                h.write_i64(t.holdings);
                h.write_i8(t.last_action);
                for p in t.window.iter() {
                    h.write_i64(p);
                }
            }
            Value::Market(m) => {
                h.write_u8(5);
                h.write_i64(m.price);
                h.write_i64(m.action_sum);
            }
            Value::PageRank(p) => {
                h.write_u8(6);
                h.write_u64(p.pr.to_bits());
                h.write_u64(p.delta.to_bits());
                h.write_u32(p.out_degree);
            }
        }
    }
}
