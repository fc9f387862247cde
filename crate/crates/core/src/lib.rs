//! Monthly default-rate forecasting for peer-to-peer lending data.
//!
//! The crate aggregates loan-level records into a monthly market series,
//! forecasts the series with a from-scratch LSTM, and benchmarks it against
//! autoregressive baselines under a chronological train/test protocol.

pub mod error;
pub mod numerics;
pub mod ingest;
pub mod recurrent;
pub mod timeseries;
pub mod eval;
pub mod synth;
pub mod config;
pub mod cli;

pub use error::{Error, Result};
