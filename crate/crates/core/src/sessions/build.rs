use super::calendar::DailyPrice;
use super::ticks::SentimentBucket;
use super::{Session, SessionKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltSessions {
    pub sessions: Vec<Session>,
    pub warnings: Vec<String>,
}

/// Interleave trading days with the non-trading gaps between them and assign
/// each sentiment bucket to the session whose `[open, close)` holds its start.
/// Weekends and holidays need no special casing: the gap between two
/// consecutive trading days is always one Night.
pub fn build_sessions(days: &[DailyPrice], buckets: &[SentimentBucket]) -> Result<BuiltSessions> {
    if days.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 trading days, got {}", days.len())));
    }
    for w in days.windows(2) {
        if w[0].close_time >= w[1].open_time {
            return Err(Error::InvalidSeries(format!("trading days {} and {} overlap or are out of order", w[0].date, w[1].date)));
        }
    }
    let mut sessions = Vec::with_capacity(2 * days.len() - 1);
    for (i, day) in days.iter().enumerate() {
        sessions.push(Session {
            index: sessions.len(),
            kind: SessionKind::Day,
            open_time: day.open_time,
            close_time: day.close_time,
            open_price: day.open_price,
            close_price: day.close_price,
            pos: 0,
            neg: 0,
            neu: 0,
        });
        if let Some(next) = days.get(i + 1) {
            sessions.push(Session {
                index: sessions.len(),
                kind: SessionKind::Night,
                open_time: day.close_time,
                close_time: next.open_time,
                open_price: day.close_price,
                close_price: next.open_price,
                pos: 0,
                neg: 0,
                neu: 0,
            });
        }
    }

    let first_open = sessions[0].open_time;
    let last_close = sessions[sessions.len() - 1].close_time;
    let (mut before, mut after) = (0usize, 0usize);
    for b in buckets {
        if b.start < first_open {
            before += 1;
            continue;
        }
        if b.start >= last_close {
            after += 1;
            continue;
        }
        // Sessions tile [first_open, last_close) without gaps.
        let idx = sessions.partition_point(|s| s.open_time <= b.start) - 1;
        let s = &mut sessions[idx];
        s.pos += b.positive;
        s.neg += b.negative;
        s.neu += b.neutral;
    }
    let mut warnings = Vec::new();
    if before > 0 {
        warnings.push(format!("{before} sentiment bucket(s) before the first session discarded"));
    }
    if after > 0 {
        warnings.push(format!("{after} sentiment bucket(s) after the last session discarded"));
    }
    Ok(BuiltSessions { sessions, warnings })
}
