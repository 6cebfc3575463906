use std::sync::Arc;

use super::{Workload, WorkloadError};
use crate::equations::{
    AlgebraicFlags, ComputeMethod, ComputeMethodId, Message, StepCtx, TypeTag, Value,
};
use crate::graph::{star, Graph};
use crate::rng::{self, Rng};

/// Largest supported moving-average window.
pub const MAX_WINDOW: usize = 16;

/// Starting market price, in cents.
pub const INITIAL_PRICE_CENTS: i64 = 10_000;

/// The last few prices a trader has seen, oldest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PriceWindow {
    buf: [i64; MAX_WINDOW],
    len: u8,
    head: u8,
}

impl PriceWindow {
    pub const EMPTY: Self = Self {
        buf: [0; MAX_WINDOW],
        len: 0,
        head: 0,
    };

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends a price, dropping the oldest once `capacity` prices are held.
    pub fn push(&mut self, price: i64, capacity: usize) {
        let cap = capacity.clamp(1, MAX_WINDOW);
        if self.len() < cap {
            self.len += 1;
        } else {
            self.head = ((self.head as usize + 1) % MAX_WINDOW) as u8;
        }
        let slot = (self.head as usize + self.len() - 1) % MAX_WINDOW;
        self.buf[slot] = price;
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len()).map(move |i| self.buf[(self.head as usize + i) % MAX_WINDOW])
    }

    pub fn sum(&self) -> i64 {
        self.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TraderState {
    pub cash: i64,
    pub holdings: i64,
    /// +1 buy, -1 sell, 0 hold.
    pub last_action: i8,
    pub window: PriceWindow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MarketState {
    /// Price in cents; always positive.
    pub price: i64,
    /// Sum of the actions applied in the last update.
    pub action_sum: i64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EconomicsParams {
    /// Moving-average window, at most [`MAX_WINDOW`].
    pub window: usize,
    /// Probability that a trader flips its action.
    pub jitter: f64,
}

impl Default for EconomicsParams {
    fn default() -> Self {
        Self {
            window: 10,
            jitter: 0.05,
        }
    }
}

/// A trader compares the market price with the mean of the prices it saw
/// before: buy below the mean, sell above it, hold otherwise. With
/// probability `jitter` the action flips; a hold becomes a random buy or sell.
#[derive(Debug)]
pub struct TraderContract {
    id: ComputeMethodId,
    params: EconomicsParams,
}

impl TraderContract {
    pub fn new(params: EconomicsParams) -> Result<Self, WorkloadError> {
        if params.window == 0 || params.window > MAX_WINDOW {
            return Err(WorkloadError::Parameter(format!(
                "window {} not in 1..={MAX_WINDOW}",
                params.window
            )));
        }
        if !(0.0..=1.0).contains(&params.jitter) {
            return Err(WorkloadError::Parameter(format!(
                "jitter {} not in [0, 1]",
                params.jitter
            )));
        }
        Ok(Self {
            id: ComputeMethodId::new("trader"),
            params,
        })
    }

    pub fn decide(&self, window: &PriceWindow, price: i64, ctx: &StepCtx) -> i8 {
        let n = window.len() as i64;
        let sum = window.sum();
        let base: i8 = if n == 0 {
            0
        } else if price * n < sum {
            1
        } else if price * n > sum {
            -1
        } else {
            0
        };
        let mut rng = rng::for_agent_step(ctx.seed, ctx.agent, ctx.superstep);
        if rng.gen_bool(self.params.jitter) {
            match base {
                0 => {
                    if rng.gen_bool(0.5) {
                        1
                    } else {
                        -1
                    }
                }
                b => -b,
            }
        } else {
            base
        }
    }
}

impl ComputeMethod for TraderContract {
    fn id(&self) -> ComputeMethodId {
        self.id
    }
    fn value_type(&self) -> TypeTag {
        TypeTag::Trader
    }
    fn in_type(&self) -> TypeTag {
        TypeTag::Int
    }
    fn out_type(&self) -> TypeTag {
        TypeTag::Int
    }

    fn state_to_message(&self, value: &Value) -> Option<Message> {
        let Value::Trader(t) = value else {
            return None;
        };
        Some(Message::Int(t.last_action as i64))
    }

    /// Traders only hear the market; the fold keeps the last price seen.
    fn partial_compute(&self, messages: &[Message]) -> Option<Message> {
        messages.last().copied()
    }

    fn update_state(&self, value: &Value, folded: Option<Message>, ctx: &StepCtx) -> Value {
        let (Value::Trader(mut t), Some(m)) = (*value, folded) else {
            return *value;
        };
        let price = m.as_int();
        let action = self.decide(&t.window, price, ctx);
        match action {
            1 => {
                t.cash -= price;
                t.holdings += 1;
            }
            -1 => {
                t.cash += price;
                t.holdings -= 1;
            }
            _ => {}
        }
        t.last_action = action;
        t.window.push(price, self.params.window);
        Value::Trader(t)
    }
}

/// The market sums trader actions and moves the price by that many cents,
/// never below one cent.
#[derive(Debug)]
pub struct MarketContract {
    id: ComputeMethodId,
}

impl MarketContract {
    pub fn new() -> Self {
        Self {
            id: ComputeMethodId::new("market"),
        }
    }
}

impl Default for MarketContract {
    fn default() -> Self {
        Self::new()
    }
}

impl ComputeMethod for MarketContract {
    fn id(&self) -> ComputeMethodId {
        self.id
    }
    fn value_type(&self) -> TypeTag {
        TypeTag::Market
    }
    fn in_type(&self) -> TypeTag {
        TypeTag::Int
    }
    fn out_type(&self) -> TypeTag {
        TypeTag::Int
    }

    fn state_to_message(&self, value: &Value) -> Option<Message> {
        let Value::Market(m) = value else {
            return None;
        };
        Some(Message::Int(m.price))
    }

    fn partial_compute(&self, messages: &[Message]) -> Option<Message> {
        if messages.is_empty() {
            None
        } else {
            Some(Message::Int(messages.iter().map(Message::as_int).sum()))
        }
    }

    fn update_state(&self, value: &Value, folded: Option<Message>, _ctx: &StepCtx) -> Value {
        let Value::Market(m) = *value else {
            return *value;
        };
        let delta = folded.map_or(0, |f| f.as_int());
        Value::Market(MarketState {
            price: (m.price + delta).max(1),
            action_sum: delta,
        })
    }

    fn algebraic_flags(&self) -> AlgebraicFlags {
        AlgebraicFlags::BOTH
    }
}

/// One market (agent 0) and `agents - 1` traders on a star.
pub fn economics(agents: usize, params: EconomicsParams) -> Result<Workload, WorkloadError> {
    economics_on_graph(star(agents)?, params)
}

/// The market is agent 0; every other agent is a trader and must be
/// connected to the market only.
pub fn economics_on_graph(graph: Graph, params: EconomicsParams) -> Result<Workload, WorkloadError> {
    let agents = graph.vertex_count();
    if agents < 2 {
        return Err(WorkloadError::Parameter("economics needs a market and a trader".into()));
    }
    if let Some(t) = (1..agents as u32).find(|&t| graph.neighbors(t) != [0]) {
        return Err(WorkloadError::Parameter(format!(
            "trader {t} must be connected to the market only"
        )));
    }
    let trader: Arc<dyn ComputeMethod> = Arc::new(TraderContract::new(params)?);
    let market: Arc<dyn ComputeMethod> = Arc::new(MarketContract::new());
    let initial = (0..agents)
        .map(|a| {
            if a == 0 {
                Value::Market(MarketState {
                    price: INITIAL_PRICE_CENTS,
                    action_sum: 0,
                })
            } else {
                Value::Trader(TraderState {
                    cash: 0,
                    holdings: 0,
                    last_action: 0,
                    window: PriceWindow::EMPTY,
                })
            }
        })
        .collect();
    let mut w = Workload::from_graph(
        "economics",
        graph,
        |a| if a == 0 { market.clone() } else { trader.clone() },
        initial,
    )?;
    w.pushdown_targets = vec![0];
    Ok(w)
}
