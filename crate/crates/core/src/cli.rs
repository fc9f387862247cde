//! Command-line front end. `main` only parses arguments and maps errors to
//! exit codes; each subcommand is a plain function over a [`PipelineConfig`].

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::eval::{chrono_split, compare_models, ForecastReport};
use crate::ingest::{ingest, IngestReport, MonthlySeries};
use crate::numerics::Matrix;
use crate::recurrent::{fit_series, write_loss_history};
use crate::synth;
use crate::timeseries::{
    correlogram, difference, fit_ar, fit_var_differenced, select_ar_order, write_model_summary, ModelSummary,
};

pub const SERIES_FILE: &str = "series.csv";
pub const LEVEL_TESTS_FILE: &str = "level_tests.csv";
pub const CHECKPOINT_FILE: &str = "lstm_checkpoint.json";
pub const LOSS_HISTORY_FILE: &str = "loss_history.csv";
pub const CORRELOGRAM_FILE: &str = "correlogram.csv";
pub const MODEL_SUMMARY_FILE: &str = "model_summary.csv";
pub const RMSE_REPORT_FILE: &str = "rmse_report.csv";
pub const TREND_REPORT_FILE: &str = "trend_report.csv";
pub const COMPARE_METADATA_FILE: &str = "compare_metadata.json";
pub const SYNTH_LOANS_FILE: &str = "loans.csv";
pub const SYNTH_MACRO_FILE: &str = "macro.csv";

#[derive(Debug, Parser)]
#[command(name = "riskseq", version, about = "Monthly default-rate forecasting: ingest, LSTM, AR/VAR baselines, comparison reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Loan CSV (+ macro CSV) to the aggregated monthly series.
    Ingest,
    /// Train one LSTM and write its checkpoint and loss history.
    Train,
    /// Correlogram and AR/VAR model summary on the training window.
    Baseline,
    /// LSTM(1), LSTM(2) and AR on a shared split; writes the report CSVs.
    Compare,
    /// Seeded synthetic loan and macro CSVs.
    Synth,
}

/// Flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Feed the unemployment rate to the LSTM (`train`).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub use_macro: Option<bool>,
    #[arg(long, global = true)]
    pub lookback: Option<usize>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
    /// LSTM hidden units.
    #[arg(long, global = true)]
    pub hidden: Option<usize>,
    /// Candidate AR orders, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub ar_orders: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub loans: Option<PathBuf>,
    #[arg(long = "macro", global = true)]
    pub macro_csv: Option<PathBuf>,
    /// Aggregated series CSV, used instead of --loans/--macro.
    #[arg(long, global = true)]
    pub series: Option<PathBuf>,
    #[arg(long, global = true)]
    pub split_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub n_loans: Option<usize>,
    #[arg(long, global = true)]
    pub n_months: Option<usize>,
    #[arg(long, global = true)]
    pub macro_effect: Option<f64>,
}

impl Overrides {
    /// Loads the config file (if any) and applies the flags on top.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        macro_rules! set {
            ($flag:expr => $($field:tt)+) => {
                if let Some(v) = $flag.clone() {
                    c.$($field)+ = v;
                }
            };
        }
        set!(self.seed => seed);
        set!(self.out_dir => out_dir);
        set!(self.use_macro => use_macro);
        set!(self.lookback => train.lookback);
        set!(self.epochs => train.epochs);
        set!(self.batch_size => train.batch_size);
        set!(self.hidden => train.hidden_size);
        set!(self.ar_orders => ar_orders);
        set!(self.split_ratio => split_ratio);
        set!(self.n_loans => synth.n_loans);
        set!(self.n_months => synth.n_months);
        set!(self.macro_effect => synth.macro_effect);
        if self.loans.is_some() {
            c.loans = self.loans.clone();
        }
        if self.macro_csv.is_some() {
            c.macro_csv = self.macro_csv.clone();
        }
        if self.series.is_some() {
            c.series = self.series.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

pub fn run(command: Command, config: &PipelineConfig) -> Result<()> {
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    match command {
        Command::Ingest => cmd_ingest(config),
        Command::Train => cmd_train(config),
        Command::Baseline => cmd_baseline(config),
        Command::Compare => cmd_compare(config).map(|_| ()),
        Command::Synth => cmd_synth(config),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn write_artifact(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<PathBuf> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

fn required<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    path.as_deref().ok_or_else(|| Error::Config(format!("no {key} path given (config key `{key}` or --{key})")))
}

fn ingest_from_config(config: &PipelineConfig, need_macro: bool) -> Result<(MonthlySeries, IngestReport)> {
    let loans = required(&config.loans, "loans")?;
    let loans_reader = open(loans)?;
    let macro_reader = match &config.macro_csv {
        Some(p) => Some(open(p)?),
        None if need_macro => return Err(required(&None, "macro").unwrap_err()),
        None => None,
    };
    let (series, report) = ingest(loans_reader, macro_reader, &config.ingest_options())?;
    eprintln!(
        "ingest: {} loans read, {} resolved, {} months, {} features",
        report.rows_read,
        report.rows_resolved,
        series.len(),
        series.n_features()
    );
    for (col, frac) in &report.dropped.dropped {
        eprintln!("ingest: dropped {col} ({:.1}% missing)", 100.0 * frac);
    }
    if !report.aggregate.gaps.is_empty() {
        let gaps: Vec<String> = report.aggregate.gaps.iter().map(ToString::to_string).collect();
        eprintln!("ingest: months without resolved loans: {}", gaps.join(" "));
    }
    Ok((series, report))
}

/// The series a modelling command works on: the aggregated CSV when given,
/// otherwise the ingested loans (+ macro).
pub fn load_series(config: &PipelineConfig, need_macro: bool) -> Result<MonthlySeries> {
    let series = match &config.series {
        Some(path) => {
            let s = MonthlySeries::read_csv(open(path)?)?;
            if need_macro && s.unemp_rate.is_none() {
                return Err(Error::MissingColumns(vec![format!("unemp_rate in {}", path.display())]));
            }
            s
        }
        None => ingest_from_config(config, need_macro)?.0,
    };
    series.validate()?;
    Ok(series)
}

fn cmd_ingest(config: &PipelineConfig) -> Result<()> {
    let (series, report) = ingest_from_config(config, false)?;
    write_artifact(&config.out_dir, SERIES_FILE, |w| series.write_csv(w))?;
    write_artifact(&config.out_dir, LEVEL_TESTS_FILE, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["column", "level_a", "level_b", "n_a", "n_b", "default_rate_a", "default_rate_b", "statistic", "p_value"])?;
        for t in &report.level_tests {
            csv.write_record([
                t.column.clone(),
                t.level_a.clone(),
                t.level_b.clone(),
                t.n_a.to_string(),
                t.n_b.to_string(),
                t.default_rate_a.to_string(),
                t.default_rate_b.to_string(),
                t.statistic.to_string(),
                t.p_value.to_string(),
            ])?;
        }
        csv.flush().map_err(|e| Error::io(LEVEL_TESTS_FILE, e))
    })?;
    Ok(())
}

fn cmd_train(config: &PipelineConfig) -> Result<()> {
    let series = load_series(config, config.use_macro)?;
    let split = chrono_split(series.len(), config.split_ratio)?;
    let fit = fit_series(&series, split.train_month_count, &config.train_config(), config.use_macro)?;
    if let Some(last) = fit.history.last() {
        eprintln!(
            "train: {} epochs, train RMSE {:.6}, held-out RMSE {}",
            last.epoch,
            last.train_rmse,
            last.test_rmse.map_or("n/a".to_string(), |v| format!("{v:.6}"))
        );
    }
    write_artifact(&config.out_dir, CHECKPOINT_FILE, |w| fit.model.write_checkpoint(w))?;
    write_artifact(&config.out_dir, LOSS_HISTORY_FILE, |w| write_loss_history(&fit.history, w))?;
    Ok(())
}

/// Drops constant columns and one indicator per one-hot group (the groups
/// sum to one and would be collinear with the intercept).
fn var_feature_columns(train: &MonthlySeries) -> Vec<usize> {
    let mut keep = Vec::new();
    let mut last_of_group: std::collections::BTreeMap<&str, usize> = Default::default();
    for (j, name) in train.feature_names.iter().enumerate() {
        let first = train.features.get(0, j);
        if (0..train.len()).all(|r| train.features.get(r, j) == first) {
            continue;
        }
        if let Some((prefix, _)) = name.split_once('=') {
            last_of_group.insert(prefix, j);
        }
        keep.push(j);
    }
    keep.retain(|j| !last_of_group.values().any(|l| l == j));
    keep
}

fn cmd_baseline(config: &PipelineConfig) -> Result<()> {
    let series = load_series(config, false)?;
    let split = chrono_split(series.len(), config.split_ratio)?;
    let train = series.slice(0..split.train_month_count);
    let d = config.ar_differencing;
    let w = difference(&train.default_rate, d)?;

    let max_lag = config.max_lag.min(w.len().saturating_sub(1));
    let report = correlogram(&w, max_lag)?;
    write_artifact(&config.out_dir, CORRELOGRAM_FILE, |out| report.write_csv(out))?;

    let mut orders = config.ar_orders.clone();
    orders.sort_unstable();
    orders.dedup();
    let p_max = *orders.last().expect("validated non-empty");
    let chosen = select_ar_order(&w, &orders)?;
    let mut rows = Vec::new();
    for &p in &orders {
        let mut m = fit_ar(&w[p_max - p..], p)?;
        m.differencing = d;
        let mut row = ModelSummary::from_ar(&format!("AR({p})"), "default_rate", &m);
        row.selected = p == chosen.order;
        rows.push(row);
    }
    eprintln!("baseline: BIC selects AR({}) on {d}-differenced default_rate", chosen.order);

    let mut systems: Vec<(String, Vec<String>, Vec<Vec<f64>>)> = Vec::new();
    if let Some(u) = &train.unemp_rate {
        systems.push((
            "VAR+unemp".into(),
            vec!["default_rate".into(), "unemp_rate".into()],
            vec![train.default_rate.clone(), u.clone()],
        ));
    }
    if config.var_all_features {
        let cols = var_feature_columns(&train);
        let mut names = vec!["default_rate".to_string()];
        let mut data = vec![train.default_rate.clone()];
        for j in cols {
            names.push(train.feature_names[j].clone());
            data.push((0..train.len()).map(|r| train.features.get(r, j)).collect());
        }
        systems.push(("VAR+features".into(), names, data));
    }
    for (label, names, columns) in systems {
        let n = columns[0].len();
        let k = columns.len();
        let levels = Matrix::from_vec(n, k, (0..n).flat_map(|r| columns.iter().map(move |c| c[r])).collect())?;
        for &p in orders.iter().filter(|&&p| p > 0) {
            match fit_var_differenced(&levels, &names, p, d) {
                Ok(m) => rows.push(ModelSummary::from_var(&format!("{label}({p})"), &m, 0)),
                Err(e @ (Error::InsufficientData(_) | Error::Singular(_))) => {
                    eprintln!("baseline: skipped {label}({p}): {e}");
                }
                Err(e) => return Err(e),
            }
        }
    }
    write_artifact(&config.out_dir, MODEL_SUMMARY_FILE, |out| write_model_summary(&rows, out))?;
    Ok(())
}

/// Runs the comparison and writes its three report files.
pub fn cmd_compare(config: &PipelineConfig) -> Result<ForecastReport> {
    let series = load_series(config, true)?;
    let report = compare_models(&series, &config.compare_config(), config.seed)?;
    report.check_consistency(1e-12)?;
    for m in &report.models {
        eprintln!("compare: {:<8} train RMSE {:.6}  test RMSE {:.6}", m.name, m.train_rmse, m.test_rmse);
    }
    write_artifact(&config.out_dir, RMSE_REPORT_FILE, |w| report.write_rmse_csv(w))?;
    write_artifact(&config.out_dir, TREND_REPORT_FILE, |w| report.write_trend_csv(w))?;
    write_artifact(&config.out_dir, COMPARE_METADATA_FILE, |w| report.write_metadata(w))?;
    Ok(report)
}

fn cmd_synth(config: &PipelineConfig) -> Result<()> {
    let synth_config = config.synth_config();
    let loans_path = config.out_dir.join(SYNTH_LOANS_FILE);
    let macro_path = config.out_dir.join(SYNTH_MACRO_FILE);
    let loans = File::create(&loans_path).map_err(|e| Error::io(&loans_path, e))?;
    let macro_file = File::create(&macro_path).map_err(|e| Error::io(&macro_path, e))?;
    synth::generate(&synth_config, BufWriter::new(loans), BufWriter::new(macro_file))?;
    eprintln!("wrote {}", loans_path.display());
    eprintln!("wrote {}", macro_path.display());
    Ok(())
}

/// `error kind=<kind> code=<exit code> message=<single line>`.
pub fn error_line(e: &Error) -> String {
    let message = e.to_string().replace(['\n', '\r'], " ");
    format!("error kind={} code={} message={message}", e.kind(), e.exit_code())
}
