use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::network::{accumulate_sample, forward_unchecked, Sample, SupervisedWindows};
use super::params::LstmParams;
use crate::error::{Error, Result};
use crate::ingest::{ColumnRange, Month, MonthlySeries};
use crate::numerics::{adam_step, AdamConfig, AdamState, Matrix, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden_size: usize,
    pub batch_size: usize,
    pub epochs: usize,
    /// Months per input window.
    pub lookback: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { hidden_size: 70, batch_size: 50, epochs: 1000, lookback: 12, learning_rate: 0.001, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_size == 0 || self.batch_size == 0 || self.lookback == 0 {
            return Err(Error::InvalidArgument("hidden_size, batch_size and lookback must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning_rate {} must be > 0", self.learning_rate)));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig { learning_rate: self.learning_rate, ..AdamConfig::default() }
    }
}

/// Input columns for one month: every feature, plus the unemployment rate
/// when requested.
fn input_row(series: &MonthlySeries, t: usize, use_macro: bool) -> Vec<f64> {
    let mut row = series.features.row(t).to_vec();
    if use_macro {
        row.push(series.unemp_rate.as_ref().expect("checked by caller")[t]);
    }
    row
}

pub fn input_size(series: &MonthlySeries, use_macro: bool) -> usize {
    series.n_features() + usize::from(use_macro)
}

/// Window ending at series index `t` (inclusive), or an error naming the
/// month when there is not enough consecutive history.
pub fn window_at(series: &MonthlySeries, t: usize, lookback: usize, use_macro: bool) -> Result<Matrix> {
    if use_macro && series.unemp_rate.is_none() {
        return Err(Error::InvalidArgument("series has no unemp_rate column".into()));
    }
    let month = series.months[t];
    if t + 1 < lookback {
        return Err(Error::InsufficientHistory(format!("{month} has {} of {lookback} months of history", t + 1)));
    }
    let start = t + 1 - lookback;
    if series.months[t].ordinal() - series.months[start].ordinal() != (lookback - 1) as i64 {
        return Err(Error::InsufficientHistory(format!("window ending {month} spans a calendar gap")));
    }
    let data: Vec<f64> = (start..=t).flat_map(|i| input_row(series, i, use_macro)).collect();
    Matrix::from_vec(lookback, input_size(series, use_macro), data)
}

/// Sliding windows whose final month lies in `targets`. Windows that would
/// reach before the series start or across a calendar gap are skipped.
pub fn build_windows(series: &MonthlySeries, lookback: usize, use_macro: bool, targets: Range<usize>) -> Result<SupervisedWindows> {
    if use_macro && series.unemp_rate.is_none() {
        return Err(Error::InvalidArgument("series has no unemp_rate column".into()));
    }
    let mut samples = Vec::new();
    for t in targets {
        match window_at(series, t, lookback, use_macro) {
            Ok(input) => samples.push(Sample { input, target: series.default_rate[t], month: series.months[t] }),
            Err(Error::InsufficientHistory(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(SupervisedWindows { samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Original default-rate units.
    pub train_rmse: f64,
    pub test_rmse: Option<f64>,
    /// Units the network was trained in.
    pub train_rmse_scaled: f64,
    pub test_rmse_scaled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: LstmParams,
    pub history: Vec<EpochLoss>,
}

/// Minibatch training with adaptive-moment updates.
///
/// Each epoch shuffles the training windows with the seeded generator and
/// takes one update per batch. `train_rmse` is the RMSE of the predictions
/// made during the epoch (before each batch's update); `monitor` windows are
/// only ever evaluated, after each epoch. `target_range` converts losses to
/// original units.
pub fn train(
    windows: &SupervisedWindows,
    monitor: Option<&SupervisedWindows>,
    config: &TrainConfig,
    target_range: Option<&ColumnRange>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let first = windows
        .samples
        .first()
        .ok_or_else(|| Error::InsufficientData("no training windows".into()))?;
    let input = first.input.cols();
    if windows.samples.iter().any(|s| s.input.cols() != input || s.input.rows() == 0) {
        return Err(Error::Shape("training windows disagree on shape".into()));
    }
    let mut rng = Rng::new(config.seed);
    let mut params = LstmParams::init(&mut rng, config.hidden_size, input);
    let mut flat = params.to_flat();
    let mut adam = AdamState::new(flat.len(), config.adam())?;
    let unit = target_range.map_or(1.0, |r| if r.is_constant() { 0.0 } else { r.max - r.min });

    let mut order: Vec<usize> = (0..windows.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut grads = LstmParams::zeros(config.hidden_size, input);
    for epoch in 0..config.epochs {
        rng.shuffle(&mut order);
        let mut epoch_sse = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let runs: Vec<_> = chunk.iter().map(|&i| forward_unchecked(&params, &windows.samples[i].input)).collect();
            let residuals: Vec<f64> = runs.iter().zip(chunk).map(|((y, _), &i)| y - windows.samples[i].target).collect();
            let sse: f64 = residuals.iter().map(|r| r * r).sum();
            epoch_sse += sse;
            let n = chunk.len() as f64;
            let loss = (sse / n).sqrt();
            if loss == 0.0 {
                continue;
            }
            grads.set_flat(&vec![0.0; flat.len()])?;
            for ((_, traces), r) in runs.iter().zip(&residuals) {
                accumulate_sample(&params, traces, r / (n * loss), &mut grads);
            }
            adam_step(&mut adam, &mut flat, &grads.to_flat())?;
            params.set_flat(&flat)?;
        }
        let train_scaled = (epoch_sse / windows.len() as f64).sqrt();
        if !train_scaled.is_finite() {
            return Err(Error::NonFinite(format!("training loss diverged at epoch {epoch}")));
        }
        let test_scaled = match monitor {
            Some(m) if !m.is_empty() => Some(evaluate_rmse(&params, m)?),
            _ => None,
        };
        history.push(EpochLoss {
            epoch: epoch + 1,
            train_rmse: train_scaled * unit,
            test_rmse: test_scaled.map(|v| v * unit),
            train_rmse_scaled: train_scaled,
            test_rmse_scaled: test_scaled,
        });
    }
    Ok(TrainOutcome { params, history })
}

/// Full-pass RMSE over a window set.
pub fn evaluate_rmse(params: &LstmParams, windows: &SupervisedWindows) -> Result<f64> {
    if windows.is_empty() {
        return Err(Error::InvalidArgument("no windows to evaluate".into()));
    }
    if windows.samples.iter().any(|s| s.input.cols() != params.input_size()) {
        return Err(Error::Shape("window width differs from model input size".into()));
    }
    let sse: f64 = windows
        .samples
        .iter()
        .map(|s| (forward_unchecked(params, &s.input).0 - s.target).powi(2))
        .sum();
    Ok((sse / windows.len() as f64).sqrt())
}

/// Model-unit predictions for the months at `indices` of a scaled series.
pub fn predict_scaled(
    params: &LstmParams,
    scaled: &MonthlySeries,
    indices: Range<usize>,
    lookback: usize,
    use_macro: bool,
) -> Result<Vec<(Month, f64)>> {
    if input_size(scaled, use_macro) != params.input_size() {
        return Err(Error::Shape(format!(
            "series provides {} inputs, model expects {}",
            input_size(scaled, use_macro),
            params.input_size()
        )));
    }
    indices
        .map(|t| {
            let w = window_at(scaled, t, lookback, use_macro)?;
            Ok((scaled.months[t], forward_unchecked(params, &w).0))
        })
        .collect()
}
