use std::io::Read;

use chrono::{DateTime, Timelike, Utc};

use crate::error::{Error, Result};

/// One observed price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceTick {
    pub timestamp: DateTime<Utc>,
    pub price: f64,
}

/// Pre-classified post counts for one half-hour bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentimentBucket {
    pub start: DateTime<Utc>,
    pub positive: u64,
    pub negative: u64,
    pub neutral: u64,
}

impl SentimentBucket {
    pub fn total(&self) -> u64 {
        self.positive + self.negative + self.neutral
    }
}

pub(crate) fn parse_timestamp(s: &str, line: u64) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::parse(line, format!("bad timestamp `{s}`: {e}")))
}

pub(crate) fn reader<R: Read>(input: R, expected: &[&str]) -> Result<csv::Reader<R>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(1, format!("expected header `{}`, got `{}`", expected.join(","), headers.iter().collect::<Vec<_>>().join(","))));
    }
    Ok(rdr)
}

pub(crate) fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

pub(crate) fn field(record: &csv::StringRecord, idx: usize, line: u64) -> Result<&str> {
    record.get(idx).ok_or_else(|| Error::parse(line, format!("missing column {}", idx + 1)))
}

/// Parse a `timestamp,price` CSV. Output is sorted by time; when a timestamp
/// repeats the later row wins.
pub fn parse_ticks<R: Read>(input: R) -> Result<Vec<PriceTick>> {
    let mut rdr = reader(input, &["timestamp", "price"])?;
    let mut ticks = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        if record.len() != 2 {
            return Err(Error::parse(line, format!("expected 2 fields, got {}", record.len())));
        }
        let timestamp = parse_timestamp(field(&record, 0, line)?, line)?;
        let raw = field(&record, 1, line)?;
        let price: f64 = raw.parse().map_err(|_| Error::parse(line, format!("bad price `{raw}`")))?;
        if !price.is_finite() || price <= 0.0 {
            return Err(Error::NonPositivePrice { line, price });
        }
        ticks.push(PriceTick { timestamp, price });
    }
    ticks.sort_by_key(|t| t.timestamp);
    ticks.reverse();
    ticks.dedup_by_key(|t| t.timestamp);
    ticks.reverse();
    Ok(ticks)
}

/// Parse a `bucket_start,positive,negative,neutral` CSV. Buckets must start on
/// a half-hour boundary and may not repeat.
pub fn parse_buckets<R: Read>(input: R) -> Result<Vec<SentimentBucket>> {
    let mut rdr = reader(input, &["bucket_start", "positive", "negative", "neutral"])?;
    let mut buckets = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        if record.len() != 4 {
            return Err(Error::parse(line, format!("expected 4 fields, got {}", record.len())));
        }
        let start = parse_timestamp(field(&record, 0, line)?, line)?;
        if start.minute() % 30 != 0 || start.second() != 0 || start.nanosecond() != 0 {
            return Err(Error::parse(line, format!("bucket {start} is not aligned to a half hour")));
        }
        let mut counts = [0u64; 3];
        for (i, c) in counts.iter_mut().enumerate() {
            let raw = field(&record, i + 1, line)?;
            *c = raw.parse().map_err(|_| Error::parse(line, format!("bad count `{raw}`")))?;
        }
        buckets.push((line, SentimentBucket { start, positive: counts[0], negative: counts[1], neutral: counts[2] }));
    }
    buckets.sort_by_key(|(_, b)| b.start);
    if let Some(w) = buckets.windows(2).find(|w| w[0].1.start == w[1].1.start) {
        return Err(Error::parse(w[1].0.max(w[0].0), format!("duplicate bucket {}", w[1].1.start)));
    }
    Ok(buckets.into_iter().map(|(_, b)| b).collect())
}
