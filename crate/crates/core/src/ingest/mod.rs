//! Loan-level CSV to monthly market series: status filtering, sparse-column
//! removal, one-hot encoding, imputation, monthly aggregation and the
//! unemployment-rate merge.

mod frame;
mod loans;
mod month;
mod scaler;
mod series;
mod wilcoxon;

pub use frame::{
    drop_sparse_features, impute, one_hot_encode, CategoricalColumn, DropReport, EncodeReport, FeatureFrame,
    OneHotGroup,
};
pub use loans::{
    filter_and_encode_target, parse_loans, parse_numeric_cell, LoanRecord, LoanTable, ResolvedLoan, Schema,
    StatusClass, StatusTable, CATEGORICAL_FEATURES, NUMERIC_FEATURES,
};
pub use month::Month;
pub use scaler::{apply_scaler, fit_scaler, invert_scaler, ColumnRange, ScalerParams, DEFAULT_RATE, UNEMP_RATE};
pub use series::{aggregate_monthly, merge_macro, read_macro_csv, AggregateReport, MonthlySeries};
pub use wilcoxon::{pairwise_level_tests, wilcoxon_rank_sum, LevelPairTest, RankSumMethod, RankSumResult, EXACT_MAX_POOLED};

use std::io::Read;

use crate::error::Result;

pub const DEFAULT_SPARSE_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub schema: Schema,
    pub status_table: StatusTable,
    pub sparse_threshold: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { schema: Schema::default(), status_table: StatusTable::default(), sparse_threshold: DEFAULT_SPARSE_THRESHOLD }
    }
}

/// Everything the pipeline noticed along the way.
#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_resolved: usize,
    pub ignored_columns: Vec<String>,
    pub absent_columns: Vec<String>,
    pub dropped: DropReport,
    pub encode: EncodeReport,
    pub aggregate: AggregateReport,
    pub level_tests: Vec<LevelPairTest>,
}

/// Runs parse, filter, drop, encode, impute and aggregate, then merges the
/// macro CSV when one is given.
pub fn ingest<L: Read, M: Read>(
    loans_csv: L,
    macro_csv: Option<M>,
    opts: &IngestOptions,
) -> Result<(MonthlySeries, IngestReport)> {
    let table = parse_loans(loans_csv, &opts.schema)?;
    let mut report = IngestReport {
        rows_read: table.records.len(),
        ignored_columns: table.ignored_columns,
        absent_columns: table.absent_columns,
        ..IngestReport::default()
    };
    let resolved = filter_and_encode_target(table.records, &opts.status_table)?;
    report.rows_resolved = resolved.len();
    for col in &opts.schema.categorical {
        report.level_tests.extend(pairwise_level_tests(&resolved, col)?);
    }

    let frame = FeatureFrame::from_loans(&resolved, &opts.schema);
    let (frame, dropped) = drop_sparse_features(frame, opts.sparse_threshold)?;
    report.dropped = dropped;
    let cats: Vec<String> = frame.categorical.iter().map(|c| c.name.clone()).collect();
    let cat_refs: Vec<&str> = cats.iter().map(String::as_str).collect();
    let (frame, encode) = one_hot_encode(frame, &cat_refs)?;
    report.encode = encode;
    let frame = impute(frame)?;
    let (series, agg) = aggregate_monthly(&frame)?;
    report.aggregate = agg;

    let series = match macro_csv {
        Some(m) => merge_macro(&series, m)?,
        None => series,
    };
    Ok((series, report))
}
