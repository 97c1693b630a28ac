use super::{class_outcomes_from_votes, next_quality, next_spread, select_class, ClassOutcome, Direction};
use crate::error::Result;
use crate::model_space::{fit_window, passed_votes, ModelClass, ModelSpaceOptions, ModelVote};
use crate::sessions::SessionSeries;

/// Discount factors and starting values for one engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineParams {
    /// quality discount
    pub beta: f64,
    /// spread discount
    pub gamma: f64,
    pub initial_spread: f64,
    pub initial_quality: f64,
}

impl EngineParams {
    pub fn new(beta: f64, gamma: f64) -> Self {
        Self { beta, gamma, initial_spread: 1.0, initial_quality: 0.0 }
    }
}

/// Where an engine's spread comes from on a given step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpreadMode {
    /// The engine updates its own spread from its own outcomes.
    Own,
    /// A spread shared across engines; the caller supplies the value in force
    /// for this session and the value after it resolves.
    Shared { current: f64, next: f64 },
}

/// Everything an engine saw and did on one session.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineRecord {
    pub t: usize,
    /// False when the window could not be fitted for this session.
    pub feasible: bool,
    pub financial: ClassOutcome,
    pub sentiment: ClassOutcome,
    pub chosen_class: Option<ModelClass>,
    pub emitted: Option<Direction>,
    pub realized: f64,
    pub lambda: i8,
    pub spread_before: f64,
    pub spread_after: f64,
    pub quality_before: f64,
    pub quality_after: f64,
}

/// Adaptive state for a single time-frame window length.
#[derive(Debug, Clone, PartialEq)]
pub struct TfwEngine {
    w: usize,
    params: EngineParams,
    spread: f64,
    quality: f64,
    history: Vec<EngineRecord>,
}

impl TfwEngine {
    pub fn new(w: usize, params: EngineParams) -> Self {
        Self { w, params, spread: params.initial_spread, quality: params.initial_quality, history: Vec::new() }
    }

    pub fn window(&self) -> usize {
        self.w
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn quality(&self) -> f64 {
        self.quality
    }

    pub fn history(&self) -> &[EngineRecord] {
        &self.history
    }

    /// Record for session `t`, if the engine has been stepped through it.
    pub fn record_at(&self, t: usize) -> Option<&EngineRecord> {
        let first = self.history.first()?.t;
        self.history.get(t.checked_sub(first)?)
    }

    /// Class and sign this engine would emit given the surviving models'
    /// votes, under spread `spread`.
    pub fn emission(spread: f64, votes: &[ModelVote]) -> (ModelClass, Option<Direction>) {
        let class = select_class(spread);
        let (fin, sent) = class_outcomes_from_votes(votes, f64::NAN);
        let majority = match class {
            ModelClass::Financial => fin.majority,
            ModelClass::Sentiment => sent.majority,
        };
        (class, majority)
    }

    /// Apply the spread recursion with the given outcomes and return the new spread.
    pub fn update_spread(&mut self, financial: &ClassOutcome, sentiment: &ClassOutcome, realized: f64) -> f64 {
        self.spread = next_spread(self.params.gamma, self.spread, financial, sentiment, realized);
        self.spread
    }

    /// Apply the quality recursion and return the new quality.
    pub fn update_quality(&mut self, lambda: i8, realized: f64) -> f64 {
        self.quality = next_quality(self.params.beta, self.quality, lambda, realized);
        self.quality
    }

    /// Advance through session `t`: emit from the current state, then learn
    /// from `realized`. `votes` is `None` when the window is infeasible, in
    /// which case nothing is emitted and only the quality decays.
    pub fn advance(&mut self, t: usize, votes: Option<&[ModelVote]>, realized: f64, mode: SpreadMode) -> &EngineRecord {
        if let Some(prev) = self.history.last() {
            assert_eq!(prev.t + 1, t, "engine w={} stepped out of order", self.w);
        }
        if let SpreadMode::Shared { current, .. } = mode {
            self.spread = current;
        }
        let spread_before = self.spread;
        let quality_before = self.quality;

        let record = match votes {
            None => {
                self.update_quality(0, realized);
                EngineRecord {
                    t,
                    feasible: false,
                    financial: ClassOutcome::empty(ModelClass::Financial),
                    sentiment: ClassOutcome::empty(ModelClass::Sentiment),
                    chosen_class: None,
                    emitted: None,
                    realized,
                    lambda: 0,
                    spread_before,
                    spread_after: self.spread,
                    quality_before,
                    quality_after: self.quality,
                }
            }
            Some(votes) => {
                let (class, emitted) = Self::emission(spread_before, votes);
                let (fin, sent) = class_outcomes_from_votes(votes, realized);
                match mode {
                    SpreadMode::Own => {
                        self.update_spread(&fin, &sent, realized);
                    }
                    SpreadMode::Shared { next, .. } => self.spread = next,
                }
                let lambda = match emitted {
                    None => 0,
                    Some(d) if Direction::of(realized) == Some(d) => 1,
                    Some(_) => -1,
                };
                self.update_quality(lambda, realized);
                EngineRecord {
                    t,
                    feasible: true,
                    financial: fin,
                    sentiment: sent,
                    chosen_class: Some(class),
                    emitted,
                    realized,
                    lambda,
                    spread_before,
                    spread_after: self.spread,
                    quality_before,
                    quality_after: self.quality,
                }
            }
        };
        self.history.push(record);
        self.history.last().expect("just pushed")
    }
}

/// Fit the engine's window ending before `t`, emit, and resolve against the
/// realized return of `t`. Returns the emitted sign.
pub fn step_engine(engine: &mut TfwEngine, series: &SessionSeries, t: usize, opts: &ModelSpaceOptions) -> Result<Option<Direction>> {
    let realized = series.returns()[t];
    let votes = if t >= engine.w + 2 { Some(passed_votes(&fit_window(series, t, engine.w, opts)?)) } else { None };
    Ok(engine.advance(t, votes.as_deref(), realized, SpreadMode::Own).emitted)
}
