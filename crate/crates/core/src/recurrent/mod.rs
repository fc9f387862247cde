//! Recurrent forecasters: the plain RNN cell, the LSTM cell with a
//! cell-state-aware output gate, backpropagation through time, training and
//! prediction.

mod cell;
mod model;
mod network;
mod params;
mod train;

pub use cell::{lstm_step, rnn_project, rnn_step, GateTrace, LstmStep};
pub use model::{fit_series, LstmFit, LstmForecaster, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use network::{backward, forward, loss_rmse, predict_window, Sample, SupervisedWindows};
pub use params::{GateParams, LstmParams, RnnParams};
pub use train::{build_windows, evaluate_rmse, input_size, predict_scaled, train, window_at, EpochLoss, TrainConfig, TrainOutcome};

use std::io::Write;

use crate::error::{Error, Result};

/// Writes `epoch,train_rmse,test_rmse,train_rmse_scaled,test_rmse_scaled`.
/// The first three columns are in original default-rate units.
pub fn write_loss_history<W: Write>(history: &[EpochLoss], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["epoch", "train_rmse", "test_rmse", "train_rmse_scaled", "test_rmse_scaled"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for h in history {
        w.write_record([
            h.epoch.to_string(),
            h.train_rmse.to_string(),
            opt(h.test_rmse),
            h.train_rmse_scaled.to_string(),
            opt(h.test_rmse_scaled),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<loss history>", e))
}
