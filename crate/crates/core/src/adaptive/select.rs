use super::{Direction, TfwEngine};
use crate::model_space::ModelClass;

/// The forecast actually acted on for one session.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub index: usize,
    pub chosen_tfw: Option<usize>,
    pub chosen_class: Option<ModelClass>,
    pub predicted_sign: Option<Direction>,
    pub realized_return: f64,
    /// Defined only when a sign was emitted and the realized return is non-zero.
    pub correct: Option<bool>,
}

impl PredictionRecord {
    pub fn no_operation(index: usize, realized_return: f64) -> Self {
        Self { index, chosen_tfw: None, chosen_class: None, predicted_sign: None, realized_return, correct: None }
    }

    pub fn new(index: usize, tfw: usize, class: ModelClass, sign: Direction, realized_return: f64) -> Self {
        let correct = Direction::of(realized_return).map(|truth| truth == sign);
        Self { index, chosen_tfw: Some(tfw), chosen_class: Some(class), predicted_sign: Some(sign), realized_return, correct }
    }
}

/// Among engines that emitted a sign for `t`, take the one whose quality going
/// into `t` is highest; ties go to the shorter window.
pub fn select_tfw(engines: &[TfwEngine], t: usize) -> PredictionRecord {
    let mut best: Option<(f64, usize, ModelClass, Direction)> = None;
    let mut realized = f64::NAN;
    for engine in engines {
        let Some(rec) = engine.record_at(t) else { continue };
        realized = rec.realized;
        let (Some(sign), Some(class)) = (rec.emitted, rec.chosen_class) else { continue };
        let better = match best {
            None => true,
            Some((q, w, ..)) => rec.quality_before > q || (rec.quality_before == q && engine.window() < w),
        };
        if better {
            best = Some((rec.quality_before, engine.window(), class, sign));
        }
    }
    match best {
        Some((_, w, class, sign)) => PredictionRecord::new(t, w, class, sign, realized),
        None => PredictionRecord::no_operation(t, realized),
    }
}
