//! Comparison protocol: chronological split, RMSE in original units and the
//! three-model forecast report.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Month, MonthlySeries};
use crate::recurrent::{fit_series, EpochLoss, TrainConfig};
use crate::timeseries::{forecast_ar_rolling, select_ar_order_differenced, ArModel};

pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_month_count: usize,
    pub test_month_count: usize,
    pub ratio: f64,
}

/// First `floor(n·ratio)` months train, the rest test.
pub fn chrono_split(n_months: usize, ratio: f64) -> Result<SplitSpec> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("split ratio {ratio} outside (0, 1)")));
    }
    let train = (n_months as f64 * ratio).floor() as usize;
    let test = n_months - train;
    if train == 0 || test == 0 {
        return Err(Error::InsufficientData(format!(
            "split of {n_months} months at {ratio} leaves {train} train / {test} test"
        )));
    }
    Ok(SplitSpec { train_month_count: train, test_month_count: test, ratio })
}

pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::Shape(format!("rmse: {} predictions for {} actuals", predicted.len(), actual.len())));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidArgument("rmse of an empty vector".into()));
    }
    let sse: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub train: TrainConfig,
    pub ar_orders: Vec<usize>,
    pub ar_differencing: usize,
    pub split_ratio: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            train: TrainConfig::default(),
            ar_orders: vec![1, 2, 3],
            ar_differencing: 1,
            split_ratio: DEFAULT_SPLIT_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelForecast {
    pub name: String,
    pub train_rmse: f64,
    pub test_rmse: f64,
    /// Aligned with [`ForecastReport::months`].
    pub predicted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub seed: u64,
    pub config: CompareConfig,
    pub split: SplitSpec,
    /// Evaluated months: the tail of the training window every model can
    /// predict, then all test months.
    pub months: Vec<Month>,
    /// How many leading entries of `months` are training months.
    pub train_evaluated: usize,
    pub actual: Vec<f64>,
    pub models: Vec<ModelForecast>,
    pub ar_model: ArModel,
    #[serde(skip)]
    pub lstm_history: Vec<(String, Vec<EpochLoss>)>,
}

/// Trains LSTM(1) without and LSTM(2) with the macro input, selects an AR
/// order by BIC on the differenced training default rate, and scores all
/// three on the same months. Nothing is fitted on test months.
pub fn compare_models(series: &MonthlySeries, config: &CompareConfig, seed: u64) -> Result<ForecastReport> {
    series.validate()?;
    if series.unemp_rate.is_none() {
        return Err(Error::InvalidArgument("compare needs a series with an unemp_rate column".into()));
    }
    let gaps: Vec<String> = series
        .months
        .windows(2)
        .filter(|w| w[1].ordinal() - w[0].ordinal() != 1)
        .map(|w| w[1].to_string())
        .collect();
    if !gaps.is_empty() {
        return Err(Error::InsufficientHistory(format!("series has calendar gaps before {}", gaps.join(" "))));
    }
    let n = series.len();
    let split = chrono_split(n, config.split_ratio)?;
    let train_n = split.train_month_count;
    let p_max = config
        .ar_orders
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::InvalidArgument("empty AR order set".into()))?;
    let start = (config.train.lookback - 1).max(p_max + config.ar_differencing);
    if start >= train_n {
        return Err(Error::InsufficientData(format!(
            "{train_n} training months leave nothing to evaluate after the first {start}"
        )));
    }

    let mut train_config = config.train.clone();
    train_config.seed = seed;
    let actual = series.default_rate[start..].to_vec();
    let mut models = Vec::new();
    let mut lstm_history = Vec::new();
    for (name, use_macro) in [("LSTM(1)", false), ("LSTM(2)", true)] {
        let fit = fit_series(series, train_n, &train_config, use_macro)?;
        let predicted: Vec<f64> = fit.model.predict(series, start..n)?.into_iter().map(|(_, y)| y).collect();
        models.push(score(name, predicted, &actual, train_n - start)?);
        lstm_history.push((name.to_string(), fit.history));
    }

    let ar = select_ar_order_differenced(&series.default_rate[..train_n], &config.ar_orders, config.ar_differencing)?;
    let predicted = forecast_ar_rolling(&ar, &series.default_rate, start..n)?;
    models.push(score(&format!("AR({})", ar.order), predicted, &actual, train_n - start)?);

    Ok(ForecastReport {
        seed,
        config: CompareConfig { train: train_config, ..config.clone() },
        split,
        months: series.months[start..].to_vec(),
        train_evaluated: train_n - start,
        actual,
        models,
        ar_model: ar,
        lstm_history,
    })
}

fn score(name: &str, predicted: Vec<f64>, actual: &[f64], train_evaluated: usize) -> Result<ModelForecast> {
    if predicted.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{name} predictions")));
    }
    Ok(ModelForecast {
        name: name.to_string(),
        train_rmse: rmse(&predicted[..train_evaluated], &actual[..train_evaluated])?,
        test_rmse: rmse(&predicted[train_evaluated..], &actual[train_evaluated..])?,
        predicted,
    })
}

impl ForecastReport {
    pub fn model(&self, name: &str) -> Option<&ModelForecast> {
        self.models.iter().find(|m| m.name == name)
    }

    /// Re-reduces the stored per-month pairs and checks every reported RMSE
    /// within `tol`; also checks all models cover the same months.
    pub fn check_consistency(&self, tol: f64) -> Result<()> {
        let k = self.train_evaluated;
        if self.actual.len() != self.months.len() {
            return Err(Error::Shape("report actuals and months differ in length".into()));
        }
        for m in &self.models {
            if m.predicted.len() != self.months.len() {
                return Err(Error::Shape(format!("{} covers a different month range", m.name)));
            }
            let train = rmse(&m.predicted[..k], &self.actual[..k])?;
            let test = rmse(&m.predicted[k..], &self.actual[k..])?;
            if (train - m.train_rmse).abs() > tol || (test - m.test_rmse).abs() > tol {
                return Err(Error::InvalidArgument(format!("{} RMSE does not match its stored pairs", m.name)));
            }
        }
        Ok(())
    }

    /// `model,train_rmse,test_rmse`.
    pub fn write_rmse_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["model", "train_rmse", "test_rmse"])?;
        for m in &self.models {
            w.write_record([m.name.clone(), m.train_rmse.to_string(), m.test_rmse.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<rmse report>", e))
    }

    /// `month,actual,lstm1,lstm2,ar`, one row per evaluated month.
    pub fn write_trend_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["month", "actual", "lstm1", "lstm2", "ar"])?;
        for (i, month) in self.months.iter().enumerate() {
            let mut row = vec![month.to_string(), self.actual[i].to_string()];
            row.extend(self.models.iter().map(|m| m.predicted[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<trend report>", e))
    }

    /// Seed, configuration, split and the selected AR model as JSON.
    pub fn write_metadata<W: Write>(&self, writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct Meta<'a> {
            seed: u64,
            config: &'a CompareConfig,
            split: &'a SplitSpec,
            first_month: Option<&'a Month>,
            train_evaluated: usize,
            ar_order: usize,
            ar_intercept: f64,
            ar_coefficients: &'a [f64],
            ar_bic: f64,
        }
        let meta = Meta {
            seed: self.seed,
            config: &self.config,
            split: &self.split,
            first_month: self.months.first(),
            train_evaluated: self.train_evaluated,
            ar_order: self.ar_model.order,
            ar_intercept: self.ar_model.intercept,
            ar_coefficients: &self.ar_model.coefficients,
            ar_bic: self.ar_model.bic,
        };
        let mut writer = writer;
        serde_json::to_writer_pretty(&mut writer, &meta).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        writer.write_all(b"\n").map_err(|e| Error::io("<report metadata>", e))
    }
}
