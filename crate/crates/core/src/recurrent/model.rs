use std::io::{Read, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::params::LstmParams;
use super::train::{build_windows, predict_scaled, train, EpochLoss, TrainConfig};
use crate::error::{Error, Result};
use crate::ingest::{apply_scaler, fit_scaler, Month, MonthlySeries, ScalerParams};

pub const CHECKPOINT_FORMAT: &str = "riskseq-lstm-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained network together with everything needed to apply it to a raw
/// (unscaled) series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmForecaster {
    pub config: TrainConfig,
    pub use_macro: bool,
    pub feature_names: Vec<String>,
    pub scaler: ScalerParams,
    pub params: LstmParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmFit {
    pub model: LstmForecaster,
    pub history: Vec<EpochLoss>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    model: LstmForecaster,
}

/// Scales the series on its first `train_month_count` months, trains on
/// windows ending inside that range and monitors the remaining months.
pub fn fit_series(series: &MonthlySeries, train_month_count: usize, config: &TrainConfig, use_macro: bool) -> Result<LstmFit> {
    config.validate()?;
    series.validate()?;
    if train_month_count < config.lookback + 1 {
        return Err(Error::InsufficientData(format!(
            "{train_month_count} training months cannot feed a {}-month lookback (need at least {})",
            config.lookback,
            config.lookback + 1
        )));
    }
    if train_month_count > series.len() {
        return Err(Error::InvalidArgument(format!("{train_month_count} training months of {}", series.len())));
    }
    if use_macro && series.unemp_rate.is_none() {
        return Err(Error::InvalidArgument("use_macro requested but the series has no unemp_rate".into()));
    }
    let scaler = fit_scaler(series, train_month_count)?;
    let scaled = apply_scaler(series, &scaler)?;
    let train_windows = build_windows(&scaled, config.lookback, use_macro, 0..train_month_count)?;
    let monitor = build_windows(&scaled, config.lookback, use_macro, train_month_count..series.len())?;
    let outcome = train(&train_windows, Some(&monitor), config, Some(&scaler.default_rate))?;
    Ok(LstmFit {
        model: LstmForecaster {
            config: config.clone(),
            use_macro,
            feature_names: series.feature_names.clone(),
            scaler,
            params: outcome.params,
        },
        history: outcome.history,
    })
}

impl LstmForecaster {
    /// Default-rate predictions (original units) for the months at `indices`.
    pub fn predict(&self, series: &MonthlySeries, indices: Range<usize>) -> Result<Vec<(Month, f64)>> {
        if series.feature_names != self.feature_names {
            return Err(Error::Shape("series features differ from the ones the model was trained on".into()));
        }
        if indices.end > series.len() {
            return Err(Error::InvalidArgument(format!("month index {} beyond series of {}", indices.end, series.len())));
        }
        let mut input = series.clone();
        if !self.use_macro {
            input.unemp_rate = None;
        }
        let mut scaler = self.scaler.clone();
        if !self.use_macro {
            scaler.unemp_rate = None;
        }
        let scaled = apply_scaler(&input, &scaler)?;
        let preds = predict_scaled(&self.params, &scaled, indices, self.config.lookback, self.use_macro)?;
        Ok(preds.into_iter().map(|(m, y)| (m, self.scaler.default_rate.unscale(y))).collect())
    }

    pub fn write_checkpoint<W: Write>(&self, writer: W) -> Result<()> {
        let ck = Checkpoint { format: CHECKPOINT_FORMAT.into(), version: CHECKPOINT_VERSION, model: self.clone() };
        serde_json::to_writer_pretty(writer, &ck).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn read_checkpoint<R: Read>(reader: R) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_reader(reader).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unexpected format tag {:?}", ck.format)));
        }
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", ck.version)));
        }
        ck.model.params.validate()?;
        Ok(ck.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{make_rng, Matrix};
    use proptest::prelude::*;

    fn series(n: usize) -> MonthlySeries {
        let start = Month::new(2008, 1).unwrap();
        let mut rng = make_rng(3);
        MonthlySeries {
            months: (0..n).map(|i| start.plus(i as i64)).collect(),
            feature_names: vec!["a".into(), "b".into()],
            features: Matrix::from_vec(n, 2, (0..2 * n).map(|_| rng.uniform()).collect()).unwrap(),
            default_rate: (0..n).map(|i| 0.1 + 0.05 * ((i as f64) / 3.0).sin()).collect(),
            unemp_rate: Some((0..n).map(|i| 5.0 + 0.1 * i as f64).collect()),
        }
    }

    fn small_config() -> TrainConfig {
        TrainConfig { hidden_size: 3, epochs: 5, batch_size: 8, lookback: 4, learning_rate: 0.01, seed: 1 }
    }

    #[test]
    fn too_short_training_range() {
        let s = series(20);
        assert!(matches!(fit_series(&s, 4, &small_config(), false), Err(Error::InsufficientData(_))));
        assert!(fit_series(&s, 5, &small_config(), false).is_ok());
    }

    #[test]
    fn predictions_reproduce_fitted_values() {
        let s = series(30);
        let fit = fit_series(&s, 24, &small_config(), true).unwrap();
        let a = fit.model.predict(&s, 3..30).unwrap();
        let b = fit.model.predict(&s, 3..30).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 27);
        assert_eq!(a[0].0, s.months[3]);
        assert!(fit.model.predict(&s, 2..5).is_err());
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let s = series(30);
        let fit = fit_series(&s, 24, &small_config(), true).unwrap();
        let mut buf = Vec::new();
        fit.model.write_checkpoint(&mut buf).unwrap();
        let back = LstmForecaster::read_checkpoint(buf.as_slice()).unwrap();
        let bits = |p: &LstmParams| p.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.params), bits(&fit.model.params));
        assert_eq!(back, fit.model);
    }

    #[test]
    fn checkpoint_rejects_foreign_files() {
        assert!(LstmForecaster::read_checkpoint("{}".as_bytes()).is_err());
        let s = series(30);
        let fit = fit_series(&s, 24, &small_config(), false).unwrap();
        let mut buf = Vec::new();
        fit.model.write_checkpoint(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(CHECKPOINT_FORMAT, "other");
        assert!(LstmForecaster::read_checkpoint(text.as_bytes()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn params_json_round_trip(values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 46)) {
            // H=2, D=2 has 4*(4+4+2) + 4 + 2 + 1 = 47 parameters
            let mut flat = values;
            flat.push(-0.0);
            let p = LstmParams::from_flat(2, 2, &flat).unwrap();
            let text = serde_json::to_string(&p).unwrap();
            let back: LstmParams = serde_json::from_str(&text).unwrap();
            let bits = |p: &LstmParams| p.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back), bits(&p));
        }
    }
}
