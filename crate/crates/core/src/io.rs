//! CSV readers and writers for the command-line outputs.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! read back yields bit-identical values.

use std::io::{Read, Write};

use chrono::{DateTime, SecondsFormat, Utc};

use crate::adaptive::PredictionRecord;
use crate::backtest::{GridPoint, TradeLedger};
use crate::error::{Error, Result};
use crate::pipeline::WindowFits;
use crate::sessions::{compute_returns, field, line_of, parse_timestamp, reader, Session, SessionSeries};

pub const SESSIONS_HEADER: &str = "index,kind,open_time,close_time,open_price,close_price,pos,neg,neu";
pub const PREDICTIONS_HEADER: &str = "index,chosen_tfw,chosen_class,predicted_sign,realized_return,correct";
pub const REPORT_HEADER: &str = "index,decision,step_pnl,cum_strategy,cum_benchmark,cum_benchmark_compounded,cum_optimal";
pub const TRAINING_HEADER: &str = "beta,gamma,train_return";
pub const MODELS_HEADER: &str = "window_end,tfw,variables,class,p_max,predicted_next,passed";

fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

fn comments<W: Write>(out: &mut W, lines: &[String]) -> Result<()> {
    for line in lines {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// Write a session series; `extra` lines become `#` comments after the brand.
pub fn write_sessions<W: Write>(out: &mut W, series: &SessionSeries, extra: &[String]) -> Result<()> {
    writeln!(out, "# brand = {}", series.brand())?;
    comments(out, extra)?;
    writeln!(out, "{SESSIONS_HEADER}")?;
    for s in series.sessions() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.index,
            s.kind,
            timestamp(s.open_time),
            timestamp(s.close_time),
            s.open_price,
            s.close_price,
            s.pos,
            s.neg,
            s.neu
        )?;
    }
    Ok(())
}

/// Read a sessions file. The brand comes from a leading `# brand = ...`
/// comment, falling back to `default_brand`.
pub fn read_sessions<R: Read>(mut input: R, default_brand: &str) -> Result<SessionSeries> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut brand = default_brand.to_string();
    for line in text.lines().take_while(|l| l.trim_start().starts_with('#')) {
        if let Some((k, v)) = line.trim_start().trim_start_matches('#').split_once('=') {
            if k.trim() == "brand" {
                brand = v.trim().to_string();
            }
        }
    }
    let columns: Vec<&str> = SESSIONS_HEADER.split(',').collect();
    let mut rdr = reader(text.as_bytes(), &columns)?;
    let mut sessions = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        if record.len() != columns.len() {
            return Err(Error::parse(line, format!("expected {} columns, got {}", columns.len(), record.len())));
        }
        let num = |idx: usize| -> Result<f64> {
            let raw = field(&record, idx, line)?;
            raw.parse().map_err(|_| Error::parse(line, format!("bad {} `{raw}`", columns[idx])))
        };
        let count = |idx: usize| -> Result<u64> {
            let raw = field(&record, idx, line)?;
            raw.parse().map_err(|_| Error::parse(line, format!("bad {} `{raw}`", columns[idx])))
        };
        let index_raw = field(&record, 0, line)?;
        sessions.push(Session {
            index: index_raw.parse().map_err(|_| Error::parse(line, format!("bad index `{index_raw}`")))?,
            kind: field(&record, 1, line)?.parse().map_err(|e: String| Error::parse(line, e))?,
            open_time: parse_timestamp(field(&record, 2, line)?, line)?,
            close_time: parse_timestamp(field(&record, 3, line)?, line)?,
            open_price: num(4)?,
            close_price: num(5)?,
            pos: count(6)?,
            neg: count(7)?,
            neu: count(8)?,
        });
    }
    compute_returns(brand, sessions)
}

fn or_none<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

pub fn write_predictions<W: Write>(out: &mut W, records: &[PredictionRecord]) -> Result<()> {
    writeln!(out, "{PREDICTIONS_HEADER}")?;
    for r in records {
        let correct = r.correct.map_or("na", |c| if c { "true" } else { "false" });
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.index,
            or_none(r.chosen_tfw),
            or_none(r.chosen_class),
            or_none(r.predicted_sign),
            r.realized_return,
            correct
        )?;
    }
    Ok(())
}

pub fn write_report<W: Write>(out: &mut W, ledger: &TradeLedger) -> Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for i in 0..ledger.len() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            ledger.decisions[i].index,
            ledger.decisions[i].action,
            ledger.step_pnl[i],
            ledger.cum_strategy[i],
            ledger.cum_benchmark[i],
            ledger.cum_benchmark_compounded[i],
            ledger.cum_optimal[i]
        )?;
    }
    Ok(())
}

pub fn write_training<W: Write>(out: &mut W, grid: &[GridPoint]) -> Result<()> {
    writeln!(out, "{TRAINING_HEADER}")?;
    for p in grid {
        writeln!(out, "{},{},{}", p.beta, p.gamma, p.train_return)?;
    }
    Ok(())
}

/// Every candidate of every window, keyed by the last session in the window.
pub fn write_models<W: Write>(out: &mut W, fits: &[WindowFits]) -> Result<()> {
    writeln!(out, "{MODELS_HEADER}")?;
    for wf in fits {
        for m in &wf.models {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                wf.t - 1,
                wf.window,
                m.candidate.label(),
                m.candidate.class(),
                m.fit.max_p_value().map_or_else(|| "na".to_string(), |p| p.to_string()),
                m.predicted_next.map_or_else(|| "na".to_string(), |p| p.to_string()),
                m.passed_filter
            )?;
        }
    }
    Ok(())
}
