//! Browser bindings for the sentrade engine.
//!
//! Each exported function takes plain numbers, runs a synthetic scenario and
//! returns JSON for the page to draw.

use sentrade_core::backtest::{evaluate, train_params, Backtest, ParamGrid};
use sentrade_core::pipeline::{compute_signals, run_adaptive};
use sentrade_core::sessions::SessionSeries;
use sentrade_core::synth::{ScenarioKind, SyntheticScenario};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn series(kind: &str, n: usize, seed: u32) -> Result<SessionSeries, String> {
    let kind: ScenarioKind = kind.parse()?;
    SyntheticScenario::new(kind, n, seed.into()).generate().map_err(|e| e.to_string())
}

/// Cumulative curves of one evaluation run.
#[derive(Debug, Serialize)]
pub struct Curves {
    pub index: Vec<usize>,
    pub strategy: Vec<f64>,
    pub benchmark: Vec<f64>,
    pub optimal: Vec<f64>,
    pub hit_rate: Option<f64>,
    pub trades: usize,
}

pub fn curves(kind: &str, n: usize, seed: u32, beta: f64, gamma: f64) -> Result<Curves, String> {
    let series = series(kind, n, seed)?;
    let bt = Backtest::default();
    let ev = evaluate(&series, &bt, bt.params(beta, gamma), None).map_err(|e| e.to_string())?;
    let l = ev.ledger;
    Ok(Curves {
        index: l.decisions.iter().map(|d| d.index).collect(),
        strategy: l.cum_strategy,
        benchmark: l.cum_benchmark,
        optimal: l.cum_optimal,
        hit_rate: l.hit_rate,
        trades: l.n_trades,
    })
}

/// Spread and quality of one window's engine, session by session.
#[derive(Debug, Serialize)]
pub struct Trace {
    pub window: usize,
    pub index: Vec<usize>,
    pub spread: Vec<f64>,
    pub quality: Vec<f64>,
    /// +1, -1 or 0 for no emission
    pub emitted: Vec<i8>,
}

pub fn trace(kind: &str, n: usize, seed: u32, beta: f64, gamma: f64, window: usize) -> Result<Trace, String> {
    let series = series(kind, n, seed)?;
    let bt = Backtest::default();
    let table = compute_signals(&series, &bt.pipeline, bt.pipeline.warmup()..series.len()).map_err(|e| e.to_string())?;
    let run = run_adaptive(&table, bt.params(beta, gamma), bt.pipeline.spread_scope);
    let engine = run.engines.iter().find(|e| e.window() == window).ok_or_else(|| format!("window {window} is outside 20..=40"))?;
    let h = engine.history();
    Ok(Trace {
        window,
        index: h.iter().map(|r| r.t).collect(),
        spread: h.iter().map(|r| r.spread_after).collect(),
        quality: h.iter().map(|r| r.quality_after).collect(),
        emitted: h.iter().map(|r| r.emitted.map_or(0, |d| d.value() as i8)).collect(),
    })
}

/// Training return for every point of the default beta/gamma grid.
#[derive(Debug, Serialize)]
pub struct Surface {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Row-major, one row per beta.
    pub returns: Vec<f64>,
    pub best: (f64, f64),
}

pub fn surface(kind: &str, n: usize, seed: u32) -> Result<Surface, String> {
    let series = series(kind, n, seed)?;
    let grid = ParamGrid::tenths();
    let result = train_params(&series, &Backtest::default(), &grid).map_err(|e| e.to_string())?;
    Ok(Surface {
        betas: grid.betas().to_vec(),
        gammas: grid.gammas().to_vec(),
        returns: result.grid.iter().map(|p| p.train_return).collect(),
        best: (result.beta, result.gamma),
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = backtestCurves)]
pub fn backtest_curves(kind: &str, n: u32, seed: u32, beta: f64, gamma: f64) -> Result<String, JsError> {
    to_js(curves(kind, n as usize, seed, beta, gamma))
}

#[wasm_bindgen(js_name = engineTrace)]
pub fn engine_trace(kind: &str, n: u32, seed: u32, beta: f64, gamma: f64, window: u32) -> Result<String, JsError> {
    to_js(trace(kind, n as usize, seed, beta, gamma, window as usize))
}

#[wasm_bindgen(js_name = trainingSurface)]
pub fn training_surface(kind: &str, n: u32, seed: u32) -> Result<String, JsError> {
    to_js(surface(kind, n as usize, seed))
}
