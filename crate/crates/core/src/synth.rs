//! Seeded synthetic session series with planted structure.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Duration, TimeZone, Utc, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::sessions::{compute_returns, Session, SessionKind, SessionSeries};

/// What drives the generated returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// `R_t = a1 R_{t-1} + a2 R_{t-2} + e`
    Autoregressive,
    /// `R_t = c (P_{t-1} - N_{t-1}) / sqrt(2 lambda) + e`
    SentimentDriven,
    /// `R_t = e`
    Noise,
}

impl ScenarioKind {
    pub fn letter(self) -> char {
        match self {
            ScenarioKind::Autoregressive => 'A',
            ScenarioKind::SentimentDriven => 'B',
            ScenarioKind::Noise => 'C',
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "ar" | "autoregressive" => Ok(ScenarioKind::Autoregressive),
            "b" | "sentiment" => Ok(ScenarioKind::SentimentDriven),
            "c" | "noise" => Ok(ScenarioKind::Noise),
            other => Err(format!("unknown scenario `{other}` (expected A, B or C)")),
        }
    }
}

/// Positive, negative and neutral counts of one session.
pub type Counts = (u64, u64, u64);

/// How the sentiment counts are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountModel {
    /// Independent Poisson draws per class and session.
    #[default]
    Poisson,
    /// Every session gets exactly the mean count in each class.
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenario {
    pub kind: ScenarioKind,
    pub n_sessions: usize,
    /// Sentiment loading `c` for kind B.
    pub signal_strength: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub a1: f64,
    pub a2: f64,
    /// Poisson mean of each sentiment class.
    pub mean_count: f64,
    pub counts: CountModel,
}

const BURN_IN: usize = 200;
const START_PRICE: f64 = 100.0;

impl SyntheticScenario {
    /// Defaults per kind. Kind A uses constant counts so that no sentiment
    /// regressor can fit the returns.
    pub fn new(kind: ScenarioKind, n_sessions: usize, seed: u64) -> Self {
        let (noise_sigma, counts) = match kind {
            ScenarioKind::Autoregressive => (0.005, CountModel::Constant),
            ScenarioKind::SentimentDriven => (0.003, CountModel::Poisson),
            ScenarioKind::Noise => (0.005, CountModel::Poisson),
        };
        Self { kind, n_sessions, signal_strength: 0.01, noise_sigma, seed, a1: 1.5, a2: -0.75, mean_count: 50.0, counts }
    }

    /// Divisor that puts `P - N` on unit scale.
    pub fn sentiment_scale(&self) -> f64 {
        (2.0 * self.mean_count).sqrt()
    }

    fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::InvalidArgument(format!("{field}: {msg}")));
        if self.n_sessions < 2 {
            return bad("n_sessions", "at least 2 sessions are required");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma", "must be finite and non-negative");
        }
        if !(self.mean_count > 0.0 && self.mean_count.is_finite()) {
            return bad("mean_count", "must be positive");
        }
        for (name, v) in [("signal_strength", self.signal_strength), ("a1", self.a1), ("a2", self.a2)] {
            if !v.is_finite() {
                return bad(name, "must be finite");
            }
        }
        Ok(())
    }

    /// Parameter lines suitable for CSV comments.
    pub fn describe(&self) -> Vec<String> {
        let mut lines = vec![
            format!("scenario = {}", self.kind),
            format!("n_sessions = {}", self.n_sessions),
            format!("seed = {}", self.seed),
            format!("noise_sigma = {}", self.noise_sigma),
            format!("mean_count = {}", self.mean_count),
            format!("counts = {}", match self.counts {
                CountModel::Poisson => "poisson",
                CountModel::Constant => "constant",
            }),
        ];
        match self.kind {
            ScenarioKind::Autoregressive => {
                lines.push(format!("a1 = {}", self.a1));
                lines.push(format!("a2 = {}", self.a2));
            }
            ScenarioKind::SentimentDriven => {
                lines.push(format!("signal_strength = {}", self.signal_strength));
                lines.push(format!("sentiment_scale = {}", self.sentiment_scale()));
            }
            ScenarioKind::Noise => {}
        }
        lines
    }

    /// Planted returns and counts, before conversion to prices.
    pub fn draw(&self) -> Result<(Vec<f64>, Vec<Counts>)> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = Normal::new(0.0, self.noise_sigma).map_err(|e| Error::InvalidArgument(format!("noise_sigma: {e}")))?;
        let poisson = Poisson::new(self.mean_count).map_err(|e| Error::InvalidArgument(format!("mean_count: {e}")))?;
        let constant = self.mean_count.round() as u64;
        let draw_counts = |rng: &mut ChaCha8Rng| match self.counts {
            CountModel::Poisson => {
                let mut c = [0u64; 3];
                for v in &mut c {
                    *v = poisson.sample(rng) as u64;
                }
                (c[0], c[1], c[2])
            }
            CountModel::Constant => (constant, constant, constant),
        };

        let n = self.n_sessions;
        let mut returns = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        match self.kind {
            ScenarioKind::Autoregressive => {
                let (mut r1, mut r2) = (0.0, 0.0);
                for i in 0..BURN_IN + n {
                    let r = self.a1 * r1 + self.a2 * r2 + noise.sample(&mut rng);
                    let c = draw_counts(&mut rng);
                    (r2, r1) = (r1, r);
                    if i >= BURN_IN {
                        returns.push(r);
                        counts.push(c);
                    }
                }
            }
            ScenarioKind::SentimentDriven => {
                let scale = self.sentiment_scale();
                let mut prev = draw_counts(&mut rng);
                for _ in 0..n {
                    let signal = self.signal_strength * (prev.0 as f64 - prev.1 as f64) / scale;
                    returns.push(signal + noise.sample(&mut rng));
                    prev = draw_counts(&mut rng);
                    counts.push(prev);
                }
            }
            ScenarioKind::Noise => {
                for _ in 0..n {
                    returns.push(noise.sample(&mut rng));
                    counts.push(draw_counts(&mut rng));
                }
            }
        }
        if let Some((i, r)) = returns.iter().enumerate().find(|(_, r)| !(**r > -1.0 && r.is_finite())) {
            return Err(Error::InvalidArgument(format!("generated return {r} at session {i} is not a valid price move; lower the noise or coefficients")));
        }
        Ok((returns, counts))
    }

    /// Generate the series: weekday day sessions from 15:00 to 20:30 UTC with
    /// nights in between, prices chained from 100.
    pub fn generate(&self) -> Result<SessionSeries> {
        let (returns, counts) = self.draw()?;
        let mut day = Utc.with_ymd_and_hms(2012, 1, 2, 0, 0, 0).single().expect("valid date");
        let open_of = |d: DateTime<Utc>| d + Duration::hours(15);
        let close_of = |d: DateTime<Utc>| d + Duration::hours(20) + Duration::minutes(30);
        let next_weekday = |d: DateTime<Utc>| {
            let mut n = d + Duration::days(1);
            while matches!(n.weekday(), Weekday::Sat | Weekday::Sun) {
                n += Duration::days(1);
            }
            n
        };

        let mut price = START_PRICE;
        let mut sessions = Vec::with_capacity(returns.len());
        for (i, (&r, &(pos, neg, neu))) in returns.iter().zip(&counts).enumerate() {
            let (kind, open_time, close_time) = if i % 2 == 0 {
                (SessionKind::Day, open_of(day), close_of(day))
            } else {
                let prev = day;
                day = next_weekday(day);
                (SessionKind::Night, close_of(prev), open_of(day))
            };
            let open_price = price;
            price = open_price * (1.0 + r);
            sessions.push(Session { index: i, kind, open_time, close_time, open_price, close_price: price, pos, neg, neu });
        }
        compute_returns(format!("SYNTH-{}", self.kind), sessions)
    }
}
