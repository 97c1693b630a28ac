//! Adaptive sentiment/return regression engine with a fixed-stake long/short
//! backtester.
//!
//! A price series and half-hourly sentiment counts are grouped into
//! alternating day and night sessions. For every session, a family of small
//! regressions is fitted on several trailing windows; each window's engine
//! picks between financial and sentiment models by a decayed track record,
//! and the best-scoring engine supplies the trading signal.

pub mod adaptive;
pub mod backtest;
#[cfg(feature = "cli")]
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
mod kv;
pub mod model_space;
pub mod pipeline;
pub mod regression;
pub mod sessions;
pub mod synth;

pub use error::{Error, Result};
