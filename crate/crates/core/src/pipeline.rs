//! Runs every time-frame window engine over a span of sessions.
//!
//! Window fits depend only on the series, the window length and the target
//! session, so they are computed once into a [`SignalTable`] and replayed for
//! any choice of discount factors.

use std::ops::Range;

use crate::adaptive::{class_outcomes_from_votes, next_spread, select_tfw, ClassOutcome, EngineParams, PredictionRecord, SpreadMode, TfwEngine};
use crate::error::{Error, Result};
use crate::model_space::{fit_window, passed_votes, FittedModel, ModelClass, ModelSpaceOptions, ModelVote};
use crate::sessions::SessionSeries;

/// Whether each engine keeps its own financial-sentiment spread or all
/// engines share one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpreadScope {
    #[default]
    PerTfw,
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub tfw_min: usize,
    pub tfw_max: usize,
    pub model: ModelSpaceOptions,
    pub spread_scope: SpreadScope,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { tfw_min: 20, tfw_max: 40, model: ModelSpaceOptions::default(), spread_scope: SpreadScope::PerTfw }
    }
}

impl PipelineConfig {
    pub fn windows(&self) -> Range<usize> {
        self.tfw_min..self.tfw_max + 1
    }

    /// First session at which every window has enough history.
    pub fn warmup(&self) -> usize {
        self.tfw_max + 2
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Surviving-model votes for every (window, session) pair in a span.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTable {
    windows: Vec<usize>,
    span: Range<usize>,
    returns: Vec<f64>,
    /// `[window][t - span.start]`; `None` where the window is infeasible.
    votes: Vec<Vec<Option<Vec<ModelVote>>>>,
}

impl SignalTable {
    pub fn windows(&self) -> &[usize] {
        &self.windows
    }

    pub fn span(&self) -> Range<usize> {
        self.span.clone()
    }

    pub fn votes(&self, window_idx: usize, t: usize) -> Option<&[ModelVote]> {
        self.votes[window_idx][t - self.span.start].as_deref()
    }

    pub fn realized(&self, t: usize) -> f64 {
        self.returns[t - self.span.start]
    }
}

fn check_span(series: &SessionSeries, span: &Range<usize>) -> Result<()> {
    if span.start >= span.end {
        return Err(Error::InsufficientData(format!("empty session span {}..{}", span.start, span.end)));
    }
    if span.end > series.len() {
        return Err(Error::InsufficientData(format!("span {}..{} exceeds the {} available sessions", span.start, span.end, series.len())));
    }
    Ok(())
}

/// Fit every window for every session in `span`.
pub fn compute_signals(series: &SessionSeries, cfg: &PipelineConfig, span: Range<usize>) -> Result<SignalTable> {
    check_span(series, &span)?;
    let windows: Vec<usize> = cfg.windows().collect();
    let jobs: Vec<(usize, usize)> = windows.iter().flat_map(|&w| span.clone().map(move |t| (w, t))).collect();
    let fitted = par_map(&jobs, |&(w, t)| -> Result<Option<Vec<ModelVote>>> {
        if t < w + 2 {
            return Ok(None);
        }
        Ok(Some(passed_votes(&fit_window(series, t, w, &cfg.model)?)))
    });
    let mut fitted = fitted.into_iter();
    let mut votes = Vec::with_capacity(windows.len());
    for _ in &windows {
        votes.push(fitted.by_ref().take(span.len()).collect::<Result<Vec<_>>>()?);
    }
    Ok(SignalTable { windows, returns: series.returns()[span.clone()].to_vec(), span, votes })
}

/// One full pass of the adaptive algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRun {
    pub engines: Vec<TfwEngine>,
    /// One record per session of the table's span.
    pub records: Vec<PredictionRecord>,
}

fn pooled(outcomes: impl Iterator<Item = (ClassOutcome, ClassOutcome)>) -> (ClassOutcome, ClassOutcome) {
    let mut fin = ClassOutcome::empty(ModelClass::Financial);
    let mut sent = ClassOutcome::empty(ModelClass::Sentiment);
    for (f, s) in outcomes {
        fin.n_models += f.n_models;
        fin.n_correct += f.n_correct;
        sent.n_models += s.n_models;
        sent.n_correct += s.n_correct;
    }
    (fin, sent)
}

/// Replay all engines over the table with the given parameters.
pub fn run_adaptive(table: &SignalTable, params: EngineParams, scope: SpreadScope) -> AdaptiveRun {
    run_adaptive_until(table, params, scope, table.span.end)
}

/// Like [`run_adaptive`], stopping before session `end`.
pub fn run_adaptive_until(table: &SignalTable, params: EngineParams, scope: SpreadScope, end: usize) -> AdaptiveRun {
    assert!(end <= table.span.end, "session {end} is past the signal table");
    let span = table.span.start..end;
    let engines = match scope {
        SpreadScope::PerTfw => {
            let idx: Vec<usize> = (0..table.windows.len()).collect();
            par_map(&idx, |&i| {
                let mut engine = TfwEngine::new(table.windows[i], params);
                for t in span.clone() {
                    engine.advance(t, table.votes(i, t), table.realized(t), SpreadMode::Own);
                }
                engine
            })
        }
        SpreadScope::Global => {
            let mut engines: Vec<TfwEngine> = table.windows.iter().map(|&w| TfwEngine::new(w, params)).collect();
            let mut spread = params.initial_spread;
            for t in span.clone() {
                let r = table.realized(t);
                let (fin, sent) = pooled((0..engines.len()).filter_map(|i| table.votes(i, t)).map(|v| class_outcomes_from_votes(v, r)));
                let any_feasible = (0..engines.len()).any(|i| table.votes(i, t).is_some());
                let next = if any_feasible { next_spread(params.gamma, spread, &fin, &sent, r) } else { spread };
                for (i, engine) in engines.iter_mut().enumerate() {
                    engine.advance(t, table.votes(i, t), r, SpreadMode::Shared { current: spread, next });
                }
                spread = next;
            }
            engines
        }
    };
    let records = span.map(|t| select_tfw(&engines, t)).collect();
    AdaptiveRun { engines, records }
}

/// Full per-model diagnostics for a span, one entry per (session, window).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFits {
    pub t: usize,
    pub window: usize,
    pub models: Vec<FittedModel>,
}

pub fn window_diagnostics(series: &SessionSeries, cfg: &PipelineConfig, span: Range<usize>) -> Result<Vec<WindowFits>> {
    check_span(series, &span)?;
    let jobs: Vec<(usize, usize)> = span.clone().flat_map(|t| cfg.windows().filter(move |&w| t >= w + 2).map(move |w| (t, w))).collect();
    par_map(&jobs, |&(t, window)| Ok(WindowFits { t, window, models: fit_window(series, t, window, &cfg.model)? })).into_iter().collect()
}
