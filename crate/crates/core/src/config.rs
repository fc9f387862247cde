//! Pipeline configuration: one TOML file, every key overridable from the
//! command line.
//!
//! ```toml
//! loans = "data/loans.csv"
//! macro = "data/unemployment.csv"
//! # series = "out/series.csv"   # an already aggregated series instead of loans + macro
//! out_dir = "out"
//! seed = 0
//! use_macro = true
//! sparse_threshold = 0.8
//! split_ratio = 0.8
//! ar_orders = [1, 2, 3]
//! ar_differencing = 1
//! max_lag = 24
//! var_all_features = false
//!
//! [train]
//! hidden_size = 70
//! batch_size = 50
//! epochs = 1000
//! lookback = 12
//! learning_rate = 0.001
//!
//! [status]            # added to (or overriding) the built-in status table
//! "Issued" = "ongoing"
//! "Written Off" = "default"
//!
//! [synth]
//! n_loans = 24000
//! n_months = 120
//! macro_effect = 3.0
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{CompareConfig, DEFAULT_SPLIT_RATIO};
use crate::ingest::{IngestOptions, StatusClass, StatusTable, DEFAULT_SPARSE_THRESHOLD};
use crate::recurrent::TrainConfig;
use crate::synth::SynthConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatusLabel {
    Paid,
    Default,
    Ongoing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub loans: Option<PathBuf>,
    #[serde(rename = "macro")]
    pub macro_csv: Option<PathBuf>,
    pub series: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub use_macro: bool,
    pub sparse_threshold: f64,
    pub split_ratio: f64,
    pub ar_orders: Vec<usize>,
    pub ar_differencing: usize,
    pub max_lag: usize,
    pub var_all_features: bool,
    pub train: TrainConfig,
    pub status: BTreeMap<String, StatusLabel>,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            loans: None,
            macro_csv: None,
            series: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
            use_macro: true,
            sparse_threshold: DEFAULT_SPARSE_THRESHOLD,
            split_ratio: DEFAULT_SPLIT_RATIO,
            ar_orders: vec![1, 2, 3],
            ar_differencing: 1,
            max_lag: 24,
            var_all_features: false,
            train: TrainConfig::default(),
            status: BTreeMap::new(),
            synth: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().replace('\n', " ")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Range checks; paths are checked by the commands that read them.
    pub fn validate(&self) -> Result<()> {
        if !(self.sparse_threshold > 0.0 && self.sparse_threshold <= 1.0) {
            return Err(Error::Config(format!("sparse_threshold {} outside (0, 1]", self.sparse_threshold)));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!("split_ratio {} outside (0, 1)", self.split_ratio)));
        }
        if self.ar_orders.is_empty() || self.ar_orders.len() > 24 || self.ar_orders.iter().any(|&p| p > 24) {
            return Err(Error::Config("ar_orders must be a non-empty list of orders up to 24".into()));
        }
        if self.ar_differencing > 2 {
            return Err(Error::Config("ar_differencing must be 0, 1 or 2".into()));
        }
        if self.max_lag == 0 {
            return Err(Error::Config("max_lag must be positive".into()));
        }
        self.train_config().validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Training settings with the pipeline seed applied.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }

    pub fn compare_config(&self) -> CompareConfig {
        CompareConfig {
            train: self.train_config(),
            ar_orders: self.ar_orders.clone(),
            ar_differencing: self.ar_differencing,
            split_ratio: self.split_ratio,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig { seed: self.seed, ..self.synth.clone() }
    }

    pub fn ingest_options(&self) -> IngestOptions {
        let mut table = StatusTable::default();
        for (status, label) in &self.status {
            let class = match label {
                StatusLabel::Paid => StatusClass::Resolved(0),
                StatusLabel::Default => StatusClass::Resolved(1),
                StatusLabel::Ongoing => StatusClass::Ongoing,
            };
            table.insert(status, class);
        }
        IngestOptions { status_table: table, sparse_threshold: self.sparse_threshold, ..IngestOptions::default() }
    }
}
