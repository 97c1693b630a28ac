//! Candidate regressor subsets, lagged rolling-window designs, and p-value
//! filtered fits.

use std::fmt;

use crate::error::{Error, Result};
use crate::regression::{fit_ols, predict, DesignMatrix, FitResult};
use crate::sessions::SessionSeries;

/// The five lagged regressors available to every candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariableId {
    /// return, lag 1
    R1,
    /// return, lag 2
    R2,
    /// positive count, lag 1
    P1,
    /// negative count, lag 1
    N1,
    /// neutral count, lag 1
    Z1,
}

impl VariableId {
    pub const ALL: [VariableId; 5] = [VariableId::R1, VariableId::R2, VariableId::P1, VariableId::N1, VariableId::Z1];

    pub fn bit(self) -> u8 {
        1 << self as u8
    }

    pub fn is_sentiment(self) -> bool {
        matches!(self, VariableId::P1 | VariableId::N1 | VariableId::Z1)
    }

    pub fn label(self) -> &'static str {
        match self {
            VariableId::R1 => "R1",
            VariableId::R2 => "R2",
            VariableId::P1 => "P1",
            VariableId::N1 => "N1",
            VariableId::Z1 => "Z1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelClass {
    Financial,
    Sentiment,
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelClass::Financial => "financial",
            ModelClass::Sentiment => "sentiment",
        })
    }
}

const FINANCIAL_MASK: u8 = 0b00011;
const SENTIMENT_MASK: u8 = 0b11100;

/// A non-empty regressor subset, stored as a bitmask over [`VariableId::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateModel {
    mask: u8,
}

impl CandidateModel {
    /// `None` unless the subset is the financial pair or contains a sentiment variable.
    pub fn from_variables(vars: &[VariableId]) -> Option<Self> {
        let mask = vars.iter().fold(0u8, |m, v| m | v.bit());
        (mask == FINANCIAL_MASK || mask & SENTIMENT_MASK != 0).then_some(Self { mask })
    }

    pub fn mask(self) -> u8 {
        self.mask
    }

    pub fn variables(self) -> Vec<VariableId> {
        VariableId::ALL.into_iter().filter(|v| self.mask & v.bit() != 0).collect()
    }

    pub fn class(self) -> ModelClass {
        if self.mask & SENTIMENT_MASK == 0 {
            ModelClass::Financial
        } else {
            ModelClass::Sentiment
        }
    }

    /// `R1+R2`, `P1+N1`, ...
    pub fn label(self) -> String {
        self.variables().iter().map(|v| v.label()).collect::<Vec<_>>().join("+")
    }
}

/// The financial pair `{R1, R2}` plus every subset containing a sentiment
/// variable, ordered by bitmask.
pub fn enumerate_candidates() -> Vec<CandidateModel> {
    (1u8..32)
        .filter(|&m| m == FINANCIAL_MASK || m & SENTIMENT_MASK != 0)
        .map(|mask| CandidateModel { mask })
        .collect()
}

/// How sentiment counts enter the design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SentimentScale {
    #[default]
    Counts,
    /// Each count divided by the session's total post count (0 when empty).
    Fractions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpaceOptions {
    pub p_threshold: f64,
    pub sentiment_scale: SentimentScale,
    /// Fits with fewer residual degrees of freedom never pass the filter.
    pub min_residual_df: usize,
}

impl Default for ModelSpaceOptions {
    fn default() -> Self {
        Self { p_threshold: 0.10, sentiment_scale: SentimentScale::Counts, min_residual_df: 3 }
    }
}

fn lagged(series: &SessionSeries, var: VariableId, i: usize, scale: SentimentScale) -> f64 {
    let r = series.returns();
    if !var.is_sentiment() {
        return match var {
            VariableId::R1 => r[i - 1],
            _ => r[i - 2],
        };
    }
    let s = &series.sessions()[i - 1];
    let count = match var {
        VariableId::P1 => s.pos,
        VariableId::N1 => s.neg,
        _ => s.neu,
    } as f64;
    match scale {
        SentimentScale::Counts => count,
        SentimentScale::Fractions => {
            let total = (s.pos + s.neg + s.neu) as f64;
            if total > 0.0 {
                count / total
            } else {
                0.0
            }
        }
    }
}

fn check_window(series: &SessionSeries, t: usize, w: usize) -> Result<()> {
    if w == 0 || t < w + 2 {
        return Err(Error::InsufficientData(format!("window of {w} ending before session {t} needs two earlier sessions of lags")));
    }
    if t > series.len() {
        return Err(Error::InsufficientData(format!("target session {t} is beyond the series end ({})", series.len())));
    }
    Ok(())
}

/// Regression rows for one window plus the row used to predict session `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDesign {
    pub design: DesignMatrix,
    pub prediction_row: Vec<f64>,
}

/// Rows `t-w .. t-1` regress `R_i` on the chosen variables lagged relative to `i`.
pub fn build_design(series: &SessionSeries, variables: &[VariableId], t: usize, w: usize, scale: SentimentScale) -> Result<WindowDesign> {
    check_window(series, t, w)?;
    let k = variables.len();
    let mut values = Vec::with_capacity(w * k);
    for i in t - w..t {
        values.extend(variables.iter().map(|&v| lagged(series, v, i, scale)));
    }
    let target = series.returns()[t - w..t].to_vec();
    let prediction_row = variables.iter().map(|&v| lagged(series, v, t, scale)).collect();
    Ok(WindowDesign { design: DesignMatrix::new(w, k, values, target)?, prediction_row })
}

/// One candidate fitted on one window.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub candidate: CandidateModel,
    pub fit: FitResult,
    /// Forecast for the target session; present whenever the fit is usable.
    pub predicted_next: Option<f64>,
    pub passed_filter: bool,
}

/// A surviving model's class and forecast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelVote {
    pub class: ModelClass,
    pub predicted: f64,
}

/// Fit every candidate on the `w` sessions before `t` and apply the p-value
/// filter. Individual fits never fail the call; only an infeasible window does.
pub fn fit_window(series: &SessionSeries, t: usize, w: usize, opts: &ModelSpaceOptions) -> Result<Vec<FittedModel>> {
    check_window(series, t, w)?;
    // All five lagged columns once; candidates pick theirs by bit.
    let scale = opts.sentiment_scale;
    let full: Vec<[f64; 5]> = (t - w..=t).map(|i| VariableId::ALL.map(|v| lagged(series, v, i, scale))).collect();
    let target = &series.returns()[t - w..t];

    let mut out = Vec::with_capacity(29);
    for candidate in enumerate_candidates() {
        let cols: Vec<usize> = VariableId::ALL.iter().enumerate().filter(|(_, v)| candidate.mask & v.bit() != 0).map(|(j, _)| j).collect();
        let k = cols.len();
        let values: Vec<f64> = full[..w].iter().flat_map(|row| cols.iter().map(move |&j| row[j])).collect();
        let fit = match DesignMatrix::new(w, k, values, target.to_vec()) {
            Ok(d) => fit_ols(&d)?,
            Err(Error::TooFewRows { .. }) => FitResult::rejected(w.saturating_sub(k + 1)),
            Err(e) => return Err(e),
        };
        let predicted_next = if fit.rank_ok {
            let x: Vec<f64> = cols.iter().map(|&j| full[w][j]).collect();
            Some(predict(&fit, &x)?)
        } else {
            None
        };
        let passed_filter = fit.rank_ok
            && fit.residual_df >= opts.min_residual_df
            && fit.max_p_value().is_some_and(|p| p < opts.p_threshold)
            && predicted_next.is_some_and(f64::is_finite);
        out.push(FittedModel { candidate, fit, predicted_next, passed_filter });
    }
    Ok(out)
}

/// Votes of the models that passed the filter, in candidate order.
pub fn passed_votes(models: &[FittedModel]) -> Vec<ModelVote> {
    models
        .iter()
        .filter(|m| m.passed_filter)
        .map(|m| ModelVote { class: m.candidate.class(), predicted: m.predicted_next.expect("passed models carry a forecast") })
        .collect()
}
