//! Two-level adaptivity: inside one time-frame window the financial-sentiment
//! spread picks a model class, and across windows the quality indicator picks
//! the engine whose forecast is used.

mod engine;
mod select;

use std::fmt;

pub use engine::{step_engine, EngineParams, EngineRecord, SpreadMode, TfwEngine};
pub use select::{select_tfw, PredictionRecord};

use crate::model_space::{passed_votes, FittedModel, ModelClass, ModelVote};

/// Direction of a forecast. Abstention is `Option::None`, never a zero sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    /// Sign of `x`; `None` for zero and NaN.
    pub fn of(x: f64) -> Option<Direction> {
        if x > 0.0 {
            Some(Direction::Up)
        } else if x < 0.0 {
            Some(Direction::Down)
        } else {
            None
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "+1",
            Direction::Down => "-1",
        })
    }
}

/// How one class of surviving models fared on a resolved session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassOutcome {
    pub class: ModelClass,
    pub n_models: usize,
    pub n_correct: usize,
    /// Strict majority of the class's forecast signs; `None` when empty or tied.
    pub majority: Option<Direction>,
}

impl ClassOutcome {
    pub fn empty(class: ModelClass) -> Self {
        Self { class, n_models: 0, n_correct: 0, majority: None }
    }

    /// Fraction of correctly signed forecasts; undefined for an empty class.
    pub fn correctness(&self) -> Option<f64> {
        (self.n_models > 0).then(|| self.n_correct as f64 / self.n_models as f64)
    }

    pub fn is_empty(&self) -> bool {
        self.n_models == 0
    }
}

/// Per-class counts and majority signs. `realized` may be NaN when the
/// session has not resolved yet, in which case nothing counts as correct.
pub fn class_outcomes_from_votes(votes: &[ModelVote], realized: f64) -> (ClassOutcome, ClassOutcome) {
    let truth = Direction::of(realized);
    let tally = |class: ModelClass| {
        let (mut n, mut up, mut down, mut correct) = (0usize, 0usize, 0usize, 0usize);
        for v in votes.iter().filter(|v| v.class == class) {
            n += 1;
            let sign = Direction::of(v.predicted);
            match sign {
                Some(Direction::Up) => up += 1,
                Some(Direction::Down) => down += 1,
                None => {}
            }
            if sign.is_some() && sign == truth {
                correct += 1;
            }
        }
        let majority = if 2 * up > n {
            Some(Direction::Up)
        } else if 2 * down > n {
            Some(Direction::Down)
        } else {
            None
        };
        ClassOutcome { class, n_models: n, n_correct: correct, majority }
    };
    (tally(ModelClass::Financial), tally(ModelClass::Sentiment))
}

/// Outcomes over the filter-passing models of one window.
pub fn class_outcomes(models: &[FittedModel], realized: f64) -> (ClassOutcome, ClassOutcome) {
    class_outcomes_from_votes(&passed_votes(models), realized)
}

/// `+1` when the financial class did at least as well as the sentiment class,
/// `-1` otherwise, `None` when neither class had a model.
pub fn spread_theta(financial: &ClassOutcome, sentiment: &ClassOutcome) -> Option<f64> {
    match (financial.correctness(), sentiment.correctness()) {
        (None, None) => None,
        (Some(_), None) => Some(1.0),
        (None, Some(_)) => Some(-1.0),
        (Some(f), Some(s)) => Some(if f >= s { 1.0 } else { -1.0 }),
    }
}

/// `s_t = γ s_{t-1} + θ |100 r|`; decay only when both classes were empty.
pub fn next_spread(gamma: f64, spread: f64, financial: &ClassOutcome, sentiment: &ClassOutcome, realized: f64) -> f64 {
    match spread_theta(financial, sentiment) {
        Some(theta) => gamma * spread + theta * (100.0 * realized).abs(),
        None => gamma * spread,
    }
}

/// `Q_t = β Q_{t-1} + λ |100 r|`, applied on every session.
pub fn next_quality(beta: f64, quality: f64, lambda: i8, realized: f64) -> f64 {
    beta * quality + lambda as f64 * (100.0 * realized).abs()
}

/// A negative spread hands the decision to the sentiment class.
pub fn select_class(spread: f64) -> ModelClass {
    if spread < 0.0 {
        ModelClass::Sentiment
    } else {
        ModelClass::Financial
    }
}
