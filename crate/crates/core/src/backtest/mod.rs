//! Fixed-stake trading simulation and parameter training.

mod train;

pub use train::{evaluate, run_backtest, train_on_table, train_params, Backtest, Evaluation, GridPoint, ParamGrid, TrainingResult};

use std::fmt;

use crate::adaptive::{Direction, PredictionRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TradeAction {
    Long,
    Short,
    NoOp,
}

impl TradeAction {
    pub fn from_sign(sign: Option<Direction>) -> Self {
        match sign {
            Some(Direction::Up) => TradeAction::Long,
            Some(Direction::Down) => TradeAction::Short,
            None => TradeAction::NoOp,
        }
    }

    /// Position size: +1, -1 or 0.
    pub fn position(self) -> f64 {
        match self {
            TradeAction::Long => 1.0,
            TradeAction::Short => -1.0,
            TradeAction::NoOp => 0.0,
        }
    }
}

impl fmt::Display for TradeAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TradeAction::Long => "long",
            TradeAction::Short => "short",
            TradeAction::NoOp => "noop",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TradeDecision {
    pub index: usize,
    pub action: TradeAction,
}

/// Per-session outcome of trading a prediction series with a unit stake.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeLedger {
    pub decisions: Vec<TradeDecision>,
    pub step_pnl: Vec<f64>,
    pub cum_strategy: Vec<f64>,
    pub cum_benchmark: Vec<f64>,
    /// Buy-and-hold with reinvestment, for reference.
    pub cum_benchmark_compounded: Vec<f64>,
    pub cum_optimal: Vec<f64>,
    /// Share of correct calls among traded sessions with a non-zero return.
    pub hit_rate: Option<f64>,
    pub n_trades: usize,
}

impl TradeLedger {
    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn final_strategy(&self) -> f64 {
        self.cum_strategy.last().copied().unwrap_or(0.0)
    }

    pub fn final_benchmark(&self) -> f64 {
        self.cum_benchmark.last().copied().unwrap_or(0.0)
    }

    pub fn final_optimal(&self) -> f64 {
        self.cum_optimal.last().copied().unwrap_or(0.0)
    }
}

/// Trade one record per session against the matching returns.
pub fn simulate(records: &[PredictionRecord], returns: &[f64]) -> Result<TradeLedger> {
    simulate_with_cost(records, returns, 0.0)
}

/// As [`simulate`], charging `cost_per_trade` on every non-flat session.
pub fn simulate_with_cost(records: &[PredictionRecord], returns: &[f64], cost_per_trade: f64) -> Result<TradeLedger> {
    if records.len() != returns.len() {
        return Err(Error::DimensionMismatch { expected: records.len(), got: returns.len() });
    }
    let n = records.len();
    let mut ledger = TradeLedger {
        decisions: Vec::with_capacity(n),
        step_pnl: Vec::with_capacity(n),
        cum_strategy: Vec::with_capacity(n),
        cum_benchmark: Vec::with_capacity(n),
        cum_benchmark_compounded: Vec::with_capacity(n),
        cum_optimal: Vec::with_capacity(n),
        hit_rate: None,
        n_trades: 0,
    };
    let (mut strategy, mut benchmark, mut growth, mut optimal) = (0.0, 0.0, 1.0, 0.0);
    let (mut hits, mut called) = (0usize, 0usize);
    for (rec, &r) in records.iter().zip(returns) {
        let action = TradeAction::from_sign(rec.predicted_sign);
        let d = action.position();
        let pnl = d * r - cost_per_trade * d.abs();
        if action != TradeAction::NoOp {
            ledger.n_trades += 1;
            if let Some(truth) = Direction::of(r) {
                called += 1;
                hits += usize::from(rec.predicted_sign == Some(truth));
            }
        }
        strategy += pnl;
        benchmark += r;
        growth *= 1.0 + r;
        optimal += r.abs();
        ledger.decisions.push(TradeDecision { index: rec.index, action });
        ledger.step_pnl.push(pnl);
        ledger.cum_strategy.push(strategy);
        ledger.cum_benchmark.push(benchmark);
        ledger.cum_benchmark_compounded.push(growth - 1.0);
        ledger.cum_optimal.push(optimal);
    }
    if called > 0 {
        ledger.hit_rate = Some(hits as f64 / called as f64);
    }
    Ok(ledger)
}
