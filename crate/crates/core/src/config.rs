//! Run configuration read from `key = value` files.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::adaptive::EngineParams;
use crate::backtest::{Backtest, ParamGrid};
use crate::error::{Error, Result};
use crate::kv;
use crate::model_space::{ModelSpaceOptions, SentimentScale};
use crate::pipeline::{PipelineConfig, SpreadScope};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub p_threshold: f64,
    pub tfw_min: usize,
    pub tfw_max: usize,
    /// Fixed quality discount; trained when absent.
    pub beta: Option<f64>,
    /// Fixed spread discount; trained when absent.
    pub gamma: Option<f64>,
    pub initial_spread: f64,
    pub train_fraction: f64,
    pub offset_minutes: u32,
    pub spread_scope: SpreadScope,
    pub normalize_sentiment: bool,
    pub cost_per_trade: f64,
    pub seed: u64,
    pub beta_grid: Option<Vec<f64>>,
    pub gamma_grid: Option<Vec<f64>>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            p_threshold: 0.10,
            tfw_min: 20,
            tfw_max: 40,
            beta: None,
            gamma: None,
            initial_spread: 1.0,
            train_fraction: 0.30,
            offset_minutes: 30,
            spread_scope: SpreadScope::PerTfw,
            normalize_sentiment: false,
            cost_per_trade: 0.0,
            seed: 0,
            beta_grid: None,
            gamma_grid: None,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::config(key, format!("cannot parse `{raw}`")))
}

fn list(key: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',').map(|v| value(key, v.trim())).collect()
}

fn flag(key: &str, raw: &str) -> Result<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(key, format!("expected true or false, got `{raw}`"))),
    }
}

impl Config {
    /// Parse and validate. Keys not set keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.apply(text, false)?;
        Ok(cfg)
    }

    /// Overlay a params file (only `beta` and `gamma` allowed).
    pub fn apply_params(&mut self, text: &str) -> Result<()> {
        self.apply(text, true)
    }

    fn apply(&mut self, text: &str, params_only: bool) -> Result<()> {
        for kv::Entry { key, value: raw, .. } in kv::parse(text)? {
            let k = key.as_str();
            if params_only && k != "beta" && k != "gamma" {
                return Err(Error::config(k, "only beta and gamma may appear in a params file"));
            }
            match k {
                "p_threshold" => self.p_threshold = value(k, &raw)?,
                "tfw_min" => self.tfw_min = value(k, &raw)?,
                "tfw_max" => self.tfw_max = value(k, &raw)?,
                "beta" => self.beta = Some(value(k, &raw)?),
                "gamma" => self.gamma = Some(value(k, &raw)?),
                "initial_spread" => self.initial_spread = value(k, &raw)?,
                "train_fraction" => self.train_fraction = value(k, &raw)?,
                "offset_minutes" => self.offset_minutes = value(k, &raw)?,
                "spread_scope" => {
                    self.spread_scope = match raw.to_ascii_lowercase().as_str() {
                        "per_tfw" => SpreadScope::PerTfw,
                        "global" => SpreadScope::Global,
                        _ => return Err(Error::config(k, format!("expected per_tfw or global, got `{raw}`"))),
                    }
                }
                "normalize_sentiment" => self.normalize_sentiment = flag(k, &raw)?,
                "cost_per_trade" => self.cost_per_trade = value(k, &raw)?,
                "seed" => self.seed = value(k, &raw)?,
                "beta_grid" => self.beta_grid = Some(list(k, &raw)?),
                "gamma_grid" => self.gamma_grid = Some(list(k, &raw)?),
                _ => return Err(Error::config(k, "unknown key")),
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(self.p_threshold > 0.0 && self.p_threshold < 1.0) {
            return Err(Error::config("p_threshold", format!("must lie strictly between 0 and 1, got {}", self.p_threshold)));
        }
        if self.tfw_min < 3 {
            return Err(Error::config("tfw_min", format!("must be at least 3, got {}", self.tfw_min)));
        }
        if self.tfw_max < self.tfw_min {
            return Err(Error::config("tfw_max", format!("must be at least tfw_min ({}), got {}", self.tfw_min, self.tfw_max)));
        }
        for (field, v) in [("beta", self.beta), ("gamma", self.gamma)] {
            if let Some(v) = v.filter(|v| !unit(*v)) {
                return Err(Error::config(field, format!("must lie in [0, 1], got {v}")));
            }
        }
        if !self.initial_spread.is_finite() {
            return Err(Error::config("initial_spread", "must be finite"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config("train_fraction", format!("must lie strictly between 0 and 1, got {}", self.train_fraction)));
        }
        if !(self.cost_per_trade >= 0.0 && self.cost_per_trade.is_finite()) {
            return Err(Error::config("cost_per_trade", format!("must be non-negative, got {}", self.cost_per_trade)));
        }
        for (field, grid) in [("beta_grid", &self.beta_grid), ("gamma_grid", &self.gamma_grid)] {
            if let Some(g) = grid {
                if g.is_empty() {
                    return Err(Error::config(field, "is empty"));
                }
                if let Some(v) = g.iter().find(|v| !unit(**v)) {
                    return Err(Error::config(field, format!("values must lie in [0, 1], got {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            tfw_min: self.tfw_min,
            tfw_max: self.tfw_max,
            model: ModelSpaceOptions {
                p_threshold: self.p_threshold,
                sentiment_scale: if self.normalize_sentiment { SentimentScale::Fractions } else { SentimentScale::Counts },
                ..ModelSpaceOptions::default()
            },
            spread_scope: self.spread_scope,
        }
    }

    pub fn backtest(&self) -> Backtest {
        Backtest {
            pipeline: self.pipeline(),
            initial_spread: self.initial_spread,
            train_fraction: self.train_fraction,
            cost_per_trade: self.cost_per_trade,
        }
    }

    /// Fixed parameters, when both discounts are set.
    pub fn params(&self) -> Option<EngineParams> {
        Some(self.backtest().params(self.beta?, self.gamma?))
    }

    /// Training grid. A fixed `beta` or `gamma` pins that axis.
    pub fn grid(&self) -> Result<ParamGrid> {
        let tenths = ParamGrid::tenths();
        let axis = |fixed: Option<f64>, grid: &Option<Vec<f64>>, default: &[f64]| match (fixed, grid) {
            (Some(v), _) => vec![v],
            (None, Some(g)) => g.clone(),
            (None, None) => default.to_vec(),
        };
        ParamGrid::new(axis(self.beta, &self.beta_grid, tenths.betas()), axis(self.gamma, &self.gamma_grid, tenths.gammas()))
    }
}

/// Contents of a params file for the chosen discounts.
pub fn params_file(beta: f64, gamma: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "beta = {beta}");
    let _ = writeln!(s, "gamma = {gamma}");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(text: &str) -> String {
        match Config::parse(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults() {
        let cfg = Config::parse("").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.params(), None);
        assert_eq!(cfg.grid().unwrap(), ParamGrid::tenths());
    }

    #[test]
    fn full_file() {
        let cfg = Config::parse(
            "p_threshold = 0.05\ntfw_min = 10\ntfw_max = 12\nbeta = 0.4\ngamma = 0\nspread_scope = global\nnormalize_sentiment = true\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.tfw_max, 12);
        assert_eq!(cfg.spread_scope, SpreadScope::Global);
        assert_eq!(cfg.params().map(|p| (p.beta, p.gamma)), Some((0.4, 0.0)));
        assert_eq!(cfg.pipeline().model.sentiment_scale, SentimentScale::Fractions);
    }

    #[test]
    fn each_bad_field_is_named() {
        let cases = [
            ("p_threshold = 0", "p_threshold"),
            ("p_threshold = 1", "p_threshold"),
            ("tfw_min = 2", "tfw_min"),
            ("tfw_min = 30\ntfw_max = 25", "tfw_max"),
            ("beta = 1.5", "beta"),
            ("gamma = -0.1", "gamma"),
            ("train_fraction = 1", "train_fraction"),
            ("train_fraction = 0", "train_fraction"),
            ("initial_spread = inf", "initial_spread"),
            ("cost_per_trade = -1", "cost_per_trade"),
            ("spread_scope = both", "spread_scope"),
            ("normalize_sentiment = maybe", "normalize_sentiment"),
            ("offset_minutes = -5", "offset_minutes"),
            ("seed = x", "seed"),
            ("beta_grid = 0.1, 2", "beta_grid"),
            ("gamma_grid = ", "gamma_grid"),
            ("bta = 0.4", "bta"),
        ];
        for (text, field) in cases {
            assert_eq!(field_of(text), field, "{text}");
        }
    }

    #[test]
    fn params_overlay() {
        let mut cfg = Config::default();
        cfg.apply_params(&params_file(0.4, 0.0)).unwrap();
        assert_eq!((cfg.beta, cfg.gamma), (Some(0.4), Some(0.0)));
        assert!(cfg.apply_params("tfw_min = 5").is_err());
    }

    #[test]
    fn pinned_axis() {
        let cfg = Config::parse("gamma = 0\nbeta_grid = 0.4, 0.2").unwrap();
        let grid = cfg.grid().unwrap();
        assert_eq!(grid.betas(), &[0.2, 0.4]);
        assert_eq!(grid.gammas(), &[0.0]);
    }
}
