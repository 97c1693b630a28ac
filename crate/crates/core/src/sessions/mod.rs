//! Day/night session series: ingestion, assembly and simple returns.

mod brand;
mod build;
mod calendar;
mod ticks;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};

pub use brand::{match_brand, BrandKeywords};
pub use build::{build_sessions, BuiltSessions};
pub use calendar::{session_prices, DailyPrice, DailyPrices, MarketCalendar, TradingHours};
pub use ticks::{parse_buckets, parse_ticks, PriceTick, SentimentBucket};
pub(crate) use ticks::{field, line_of, parse_timestamp, reader};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SessionKind {
    Day,
    Night,
}

impl fmt::Display for SessionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SessionKind::Day => "day",
            SessionKind::Night => "night",
        })
    }
}

impl FromStr for SessionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "day" => Ok(SessionKind::Day),
            "night" => Ok(SessionKind::Night),
            other => Err(format!("unknown session kind `{other}`")),
        }
    }
}

/// One trading (day) or non-trading (night) interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub index: usize,
    pub kind: SessionKind,
    pub open_time: DateTime<Utc>,
    pub close_time: DateTime<Utc>,
    pub open_price: f64,
    pub close_price: f64,
    pub pos: u64,
    pub neg: u64,
    pub neu: u64,
}

/// Validated session sequence for one brand together with its simple returns.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionSeries {
    brand: String,
    sessions: Vec<Session>,
    returns: Vec<f64>,
}

fn validate(sessions: &[Session]) -> Result<()> {
    for (i, s) in sessions.iter().enumerate() {
        if s.index != i {
            return Err(Error::InvalidSeries(format!("session at position {i} has index {}", s.index)));
        }
        if s.open_time >= s.close_time {
            return Err(Error::InvalidSeries(format!("session {i}: open_time must precede close_time")));
        }
        if !(s.open_price > 0.0 && s.open_price.is_finite()) || !(s.close_price > 0.0 && s.close_price.is_finite()) {
            return Err(Error::InvalidSeries(format!("session {i}: prices must be positive")));
        }
    }
    for w in sessions.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.kind == b.kind {
            return Err(Error::InvalidSeries(format!("sessions {} and {} do not alternate day/night", a.index, b.index)));
        }
        if a.close_time != b.open_time {
            return Err(Error::InvalidSeries(format!("gap or overlap between sessions {} and {}", a.index, b.index)));
        }
        if a.close_price != b.open_price {
            return Err(Error::InvalidSeries(format!(
                "session {} opens at {} but session {} closed at {}",
                b.index, b.open_price, a.index, a.close_price
            )));
        }
    }
    Ok(())
}

/// Attach `R_t = (C_t - O_t) / O_t` to every session.
pub fn compute_returns(brand: impl Into<String>, sessions: Vec<Session>) -> Result<SessionSeries> {
    validate(&sessions)?;
    let returns = sessions.iter().map(|s| (s.close_price - s.open_price) / s.open_price).collect();
    Ok(SessionSeries { brand: brand.into(), sessions, returns })
}

impl SessionSeries {
    pub fn brand(&self) -> &str {
        &self.brand
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    /// The first `len` sessions.
    pub fn truncated(&self, len: usize) -> SessionSeries {
        let len = len.min(self.len());
        SessionSeries {
            brand: self.brand.clone(),
            sessions: self.sessions[..len].to_vec(),
            returns: self.returns[..len].to_vec(),
        }
    }

    pub fn into_sessions(self) -> Vec<Session> {
        self.sessions
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone};

    pub(crate) fn session(index: usize, kind: SessionKind, open: f64, close: f64) -> Session {
        let base = Utc.with_ymd_and_hms(2012, 6, 18, 0, 0, 0).unwrap();
        Session {
            index,
            kind,
            open_time: base + Duration::hours(12 * index as i64),
            close_time: base + Duration::hours(12 * (index as i64 + 1)),
            open_price: open,
            close_price: close,
            pos: 0,
            neg: 0,
            neu: 0,
        }
    }

    #[test]
    fn simple_returns() {
        let s = vec![
            session(0, SessionKind::Day, 100.0, 110.0),
            session(1, SessionKind::Night, 110.0, 110.0),
            session(2, SessionKind::Day, 110.0, 99.0),
        ];
        let series = compute_returns("x", s).unwrap();
        let r = series.returns();
        assert!((r[0] - 0.10).abs() < 1e-15);
        assert_eq!(r[1], 0.0);
        assert!((r[2] + 0.10).abs() < 1e-15);
    }

    #[test]
    fn fifty_to_forty_five() {
        let series = compute_returns("x", vec![session(0, SessionKind::Day, 50.0, 45.0)]).unwrap();
        assert!((series.returns()[0] + 0.10).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_price() {
        assert!(compute_returns("x", vec![session(0, SessionKind::Day, 0.0, 45.0)]).is_err());
    }

    #[test]
    fn rejects_broken_alternation() {
        let s = vec![session(0, SessionKind::Day, 1.0, 1.0), session(1, SessionKind::Day, 1.0, 1.0)];
        assert!(compute_returns("x", s).is_err());
    }

    #[test]
    fn rejects_price_mismatch() {
        let s = vec![session(0, SessionKind::Day, 1.0, 2.0), session(1, SessionKind::Night, 2.5, 1.0)];
        assert!(compute_returns("x", s).is_err());
    }

    #[test]
    fn kind_round_trip() {
        assert_eq!("Night".parse::<SessionKind>().unwrap(), SessionKind::Night);
        assert_eq!(SessionKind::Day.to_string(), "day");
        assert!("dusk".parse::<SessionKind>().is_err());
    }
}
