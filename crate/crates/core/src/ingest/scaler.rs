use serde::{Deserialize, Serialize};

use super::{Month, MonthlySeries};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const DEFAULT_RATE: &str = "default_rate";
pub const UNEMP_RATE: &str = "unemp_rate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    pub fn is_constant(&self) -> bool {
        self.max == self.min
    }

    pub fn scale(&self, x: f64) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            (x - self.min) / (self.max - self.min)
        }
    }

    pub fn unscale(&self, x: f64) -> f64 {
        if self.is_constant() {
            self.min
        } else {
            self.min + x * (self.max - self.min)
        }
    }
}

/// Min-max ranges fitted on the training window only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub features: Vec<ColumnRange>,
    pub default_rate: ColumnRange,
    pub unemp_rate: Option<ColumnRange>,
    pub fitted_on: (Month, Month),
}

impl ScalerParams {
    pub fn constant_features(&self) -> Vec<&str> {
        self.features.iter().filter(|c| c.is_constant()).map(|c| c.name.as_str()).collect()
    }
}

fn range_of(name: &str, values: impl Iterator<Item = f64>) -> ColumnRange {
    let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    ColumnRange { name: name.to_string(), min, max }
}

/// Fits ranges on the first `train_month_count` months.
pub fn fit_scaler(series: &MonthlySeries, train_month_count: usize) -> Result<ScalerParams> {
    if train_month_count == 0 || train_month_count > series.len() {
        return Err(Error::InvalidArgument(format!(
            "scaler window of {train_month_count} months for a {}-month series",
            series.len()
        )));
    }
    let n = train_month_count;
    let features = series
        .feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| range_of(name, (0..n).map(|i| series.features.get(i, j))))
        .collect();
    Ok(ScalerParams {
        features,
        default_rate: range_of(DEFAULT_RATE, series.default_rate[..n].iter().copied()),
        unemp_rate: series.unemp_rate.as_ref().map(|u| range_of(UNEMP_RATE, u[..n].iter().copied())),
        fitted_on: (series.months[0], series.months[n - 1]),
    })
}

fn transform(series: &MonthlySeries, scaler: &ScalerParams, inverse: bool) -> Result<MonthlySeries> {
    if scaler.features.len() != series.n_features()
        || scaler.features.iter().zip(&series.feature_names).any(|(c, n)| &c.name != n)
    {
        return Err(Error::Shape("scaler columns do not match series features".into()));
    }
    if scaler.unemp_rate.is_none() && series.unemp_rate.is_some() {
        return Err(Error::Shape("scaler was fitted without unemp_rate".into()));
    }
    let f = |c: &ColumnRange, x: f64| if inverse { c.unscale(x) } else { c.scale(x) };
    let cols = series.n_features();
    let mut data = series.features.as_slice().to_vec();
    for (k, v) in data.iter_mut().enumerate() {
        *v = f(&scaler.features[k % cols.max(1)], *v);
    }
    Ok(MonthlySeries {
        months: series.months.clone(),
        feature_names: series.feature_names.clone(),
        features: Matrix::from_vec(series.len(), cols, data)?,
        default_rate: series.default_rate.iter().map(|&x| f(&scaler.default_rate, x)).collect(),
        unemp_rate: series
            .unemp_rate
            .as_ref()
            .map(|u| u.iter().map(|&x| f(scaler.unemp_rate.as_ref().expect("checked"), x)).collect()),
    })
}

/// `x' = (x - min) / (max - min)` per column; constant columns map to 0.
/// Values outside the fitted range extrapolate linearly.
pub fn apply_scaler(series: &MonthlySeries, scaler: &ScalerParams) -> Result<MonthlySeries> {
    transform(series, scaler, false)
}

pub fn invert_scaler(series: &MonthlySeries, scaler: &ScalerParams) -> Result<MonthlySeries> {
    transform(series, scaler, true)
}
