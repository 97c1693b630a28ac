use std::ops::Range;

use super::{simulate_with_cost, TradeLedger};
use crate::adaptive::{EngineParams, PredictionRecord};
use crate::error::{Error, Result};
use crate::pipeline::{compute_signals, par_map, run_adaptive_until, AdaptiveRun, PipelineConfig, SignalTable};
use crate::sessions::SessionSeries;

/// Settings shared by training and evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Backtest {
    pub pipeline: PipelineConfig,
    pub initial_spread: f64,
    pub train_fraction: f64,
    pub cost_per_trade: f64,
}

impl Default for Backtest {
    fn default() -> Self {
        Self { pipeline: PipelineConfig::default(), initial_spread: 1.0, train_fraction: 0.30, cost_per_trade: 0.0 }
    }
}

impl Backtest {
    /// First session outside the training span.
    pub fn split_index(&self, n_sessions: usize) -> usize {
        (n_sessions as f64 * self.train_fraction).floor() as usize
    }

    pub fn params(&self, beta: f64, gamma: f64) -> EngineParams {
        EngineParams { initial_spread: self.initial_spread, ..EngineParams::new(beta, gamma) }
    }

    /// Shortest training span that leaves every window at least one session.
    pub fn min_training_sessions(&self) -> usize {
        self.pipeline.warmup() + 1
    }
}

/// Candidate (beta, gamma) values, each in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    betas: Vec<f64>,
    gammas: Vec<f64>,
}

impl ParamGrid {
    pub fn new(mut betas: Vec<f64>, mut gammas: Vec<f64>) -> Result<Self> {
        for (name, values) in [("beta_grid", &mut betas), ("gamma_grid", &mut gammas)] {
            if values.is_empty() {
                return Err(Error::InvalidArgument(format!("{name} is empty")));
            }
            if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidArgument(format!("{name} value {bad} is outside [0, 1]")));
            }
            values.sort_by(f64::total_cmp);
            values.dedup();
        }
        Ok(Self { betas, gammas })
    }

    /// 0.0, 0.1, ..., 1.0 for both parameters.
    pub fn tenths() -> Self {
        let v: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        Self { betas: v.clone(), gammas: v }
    }

    pub fn single(beta: f64, gamma: f64) -> Result<Self> {
        Self::new(vec![beta], vec![gamma])
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// All pairs, beta-major, both ascending.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.betas.iter().flat_map(|&b| self.gammas.iter().map(move |&g| (b, g))).collect()
    }
}

impl Default for ParamGrid {
    fn default() -> Self {
        Self::tenths()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub beta: f64,
    pub gamma: f64,
    pub train_return: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingResult {
    pub beta: f64,
    pub gamma: f64,
    pub train_return: f64,
    pub grid: Vec<GridPoint>,
    pub split_index: usize,
}

fn check_training(bt: &Backtest, split: usize) -> Result<()> {
    let min = bt.min_training_sessions();
    if split < min {
        return Err(Error::InsufficientData(format!(
            "training span has {split} sessions but at least {min} are needed (tfw_max + 3)"
        )));
    }
    Ok(())
}

/// Grid search on the chronological training span `[warmup, split)`.
pub fn train_params(series: &SessionSeries, bt: &Backtest, grid: &ParamGrid) -> Result<TrainingResult> {
    let split = bt.split_index(series.len());
    check_training(bt, split)?;
    let table = compute_signals(series, &bt.pipeline, bt.pipeline.warmup()..split)?;
    train_on_table(&table, bt, grid, split)
}

/// Grid search reusing precomputed window fits; only sessions before `split`
/// are traded.
pub fn train_on_table(table: &SignalTable, bt: &Backtest, grid: &ParamGrid, split: usize) -> Result<TrainingResult> {
    check_training(bt, split)?;
    let span = table.span();
    if span.start != bt.pipeline.warmup() || span.end < split {
        return Err(Error::InvalidArgument(format!("signal table {}..{} does not cover the training span", span.start, span.end)));
    }
    let returns: Vec<f64> = (span.start..split).map(|t| table.realized(t)).collect();
    let points = grid.points();
    let grid: Vec<GridPoint> = par_map(&points, |&(beta, gamma)| -> Result<GridPoint> {
        let run = run_adaptive_until(table, bt.params(beta, gamma), bt.pipeline.spread_scope, split);
        let ledger = simulate_with_cost(&run.records, &returns, bt.cost_per_trade)?;
        Ok(GridPoint { beta, gamma, train_return: ledger.final_strategy() })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut best = grid[0];
    for p in &grid[1..] {
        if p.train_return > best.train_return {
            best = *p;
        }
    }
    Ok(TrainingResult { beta: best.beta, gamma: best.gamma, train_return: best.train_return, grid, split_index: split })
}

/// Out-of-sample run with fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub params: EngineParams,
    pub span: Range<usize>,
    /// Engines as run from warm-up through the end of the span.
    pub run: AdaptiveRun,
    /// Records restricted to `span`.
    pub records: Vec<PredictionRecord>,
    pub ledger: TradeLedger,
}

fn evaluate_on_table(table: &SignalTable, bt: &Backtest, params: EngineParams, span: Range<usize>) -> Result<Evaluation> {
    let warmup = bt.pipeline.warmup();
    if span.start < warmup {
        return Err(Error::InvalidArgument(format!("evaluation starts at session {} before warm-up ends at {warmup}", span.start)));
    }
    if span.is_empty() {
        return Err(Error::InsufficientData(format!("evaluation span {}..{} is empty", span.start, span.end)));
    }
    let run = run_adaptive_until(table, params, bt.pipeline.spread_scope, span.end);
    let records = run.records[span.start - warmup..].to_vec();
    let returns: Vec<f64> = span.clone().map(|t| table.realized(t)).collect();
    let ledger = simulate_with_cost(&records, &returns, bt.cost_per_trade)?;
    Ok(Evaluation { params, span, run, records, ledger })
}

fn default_span(series: &SessionSeries, bt: &Backtest) -> Range<usize> {
    bt.split_index(series.len()).max(bt.pipeline.warmup())..series.len()
}

/// Trade `span` (default: everything after the training split). Engines are
/// warmed up on every session from the longest window's warm-up onwards.
pub fn evaluate(series: &SessionSeries, bt: &Backtest, params: EngineParams, span: Option<Range<usize>>) -> Result<Evaluation> {
    let span = span.unwrap_or_else(|| default_span(series, bt));
    if span.is_empty() {
        return Err(Error::InsufficientData(format!("evaluation span {}..{} is empty", span.start, span.end)));
    }
    let warmup = bt.pipeline.warmup();
    if span.start < warmup {
        return Err(Error::InvalidArgument(format!("evaluation starts at session {} before warm-up ends at {warmup}", span.start)));
    }
    let table = compute_signals(series, &bt.pipeline, warmup..span.end)?;
    evaluate_on_table(&table, bt, params, span)
}

/// Train when `params` is absent, then evaluate the post-split span, fitting
/// every window only once.
pub fn run_backtest(series: &SessionSeries, bt: &Backtest, params: Option<EngineParams>, grid: &ParamGrid) -> Result<(Option<TrainingResult>, Evaluation)> {
    let split = bt.split_index(series.len());
    let span = default_span(series, bt);
    if span.is_empty() {
        return Err(Error::InsufficientData(format!("evaluation span {}..{} is empty", span.start, span.end)));
    }
    let table = compute_signals(series, &bt.pipeline, bt.pipeline.warmup()..series.len())?;
    let (training, params) = match params {
        Some(p) => (None, p),
        None => {
            let t = train_on_table(&table, bt, grid, split)?;
            let p = bt.params(t.beta, t.gamma);
            (Some(t), p)
        }
    };
    Ok((training, evaluate_on_table(&table, bt, params, span)?))
}
