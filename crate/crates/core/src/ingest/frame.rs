use std::collections::{BTreeMap, BTreeSet};

use super::loans::{ResolvedLoan, Schema};
use super::Month;
use crate::error::{Error, Result};

/// Categorical column awaiting one-hot encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalColumn {
    pub name: String,
    pub values: Vec<Option<String>>,
}

/// Indicator columns produced from one categorical column.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotGroup {
    pub source: String,
    pub levels: Vec<String>,
    pub columns: Vec<String>,
}

/// Loan-level design table, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    pub columns: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    pub target: Vec<u8>,
    pub months: Vec<Month>,
    pub categorical: Vec<CategoricalColumn>,
    pub groups: Vec<OneHotGroup>,
}

impl FeatureFrame {
    pub fn from_loans(loans: &[ResolvedLoan], schema: &Schema) -> Self {
        let values = schema
            .numeric
            .iter()
            .map(|name| loans.iter().map(|l| l.record.numeric.get(name).copied().flatten()).collect())
            .collect();
        let categorical = schema
            .categorical
            .iter()
            .map(|name| CategoricalColumn {
                name: name.clone(),
                values: loans.iter().map(|l| l.record.categorical.get(name).cloned().flatten()).collect(),
            })
            .collect();
        Self {
            columns: schema.numeric.clone(),
            values,
            target: loans.iter().map(|l| l.target).collect(),
            months: loans.iter().map(|l| l.record.issue_month).collect(),
            categorical,
            groups: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.columns.iter().position(|c| c == name).map(|i| self.values[i].as_slice())
    }

    pub fn missing_count(&self) -> usize {
        let numeric: usize = self.values.iter().map(|c| c.iter().filter(|v| v.is_none()).count()).sum();
        let cat: usize = self.categorical.iter().map(|c| c.values.iter().filter(|v| v.is_none()).count()).sum();
        numeric + cat
    }

    fn missing_fraction<T>(&self, col: &[Option<T>]) -> f64 {
        if col.is_empty() {
            0.0
        } else {
            col.iter().filter(|v| v.is_none()).count() as f64 / col.len() as f64
        }
    }

    fn group_of(&self, column: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.columns.iter().any(|c| c == column))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DropReport {
    /// (column, missing fraction) for every dropped column.
    pub dropped: Vec<(String, f64)>,
}

/// Removes every column whose missing fraction exceeds `threshold`.
/// Numeric and not-yet-encoded categorical columns are both considered.
pub fn drop_sparse_features(mut frame: FeatureFrame, threshold: f64) -> Result<(FeatureFrame, DropReport)> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("sparse threshold {threshold} outside (0, 1]")));
    }
    let mut report = DropReport::default();

    let mut keep_cols = Vec::new();
    let mut keep_vals = Vec::new();
    for (name, col) in std::mem::take(&mut frame.columns).into_iter().zip(std::mem::take(&mut frame.values)) {
        let frac = frame.missing_fraction(&col);
        if frac > threshold && frame.group_of(&name).is_none() {
            report.dropped.push((name, frac));
        } else {
            keep_cols.push(name);
            keep_vals.push(col);
        }
    }
    frame.columns = keep_cols;
    frame.values = keep_vals;

    let cats = std::mem::take(&mut frame.categorical);
    for c in cats {
        let frac = frame.missing_fraction(&c.values);
        if frac > threshold {
            report.dropped.push((c.name, frac));
        } else {
            frame.categorical.push(c);
        }
    }
    Ok((frame, report))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EncodeReport {
    /// Columns whose observed vocabulary had a single level (constant indicator).
    pub single_level: Vec<String>,
}

/// Replaces each named categorical column with one indicator column per
/// observed level, named `column=level`, levels in lexicographic order.
/// Rows with a missing category get a fully missing indicator group.
pub fn one_hot_encode(mut frame: FeatureFrame, categorical_columns: &[&str]) -> Result<(FeatureFrame, EncodeReport)> {
    let mut report = EncodeReport::default();
    for &name in categorical_columns {
        let pos = frame
            .categorical
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::MissingColumns(vec![name.to_string()]))?;
        let cat = frame.categorical.remove(pos);
        let levels: Vec<String> = cat.values.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        if levels.len() == 1 {
            report.single_level.push(name.to_string());
        }
        let mut group = OneHotGroup { source: name.to_string(), levels: levels.clone(), columns: Vec::new() };
        for level in &levels {
            let col_name = format!("{name}={level}");
            let col = cat
                .values
                .iter()
                .map(|v| v.as_ref().map(|v| if v == level { 1.0 } else { 0.0 }))
                .collect();
            frame.columns.push(col_name.clone());
            frame.values.push(col);
            group.columns.push(col_name);
        }
        frame.groups.push(group);
    }
    Ok((frame, report))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Fills every missing value: numeric columns with their median, one-hot
/// groups with the modal level's indicator pattern, pending categorical
/// columns with their modal level.
pub fn impute(mut frame: FeatureFrame) -> Result<FeatureFrame> {
    let n = frame.n_rows();
    let grouped: BTreeSet<String> = frame.groups.iter().flat_map(|g| g.columns.iter().cloned()).collect();

    for (name, col) in frame.columns.iter().zip(frame.values.iter_mut()) {
        if grouped.contains(name) || col.iter().all(Option::is_some) {
            continue;
        }
        let mut observed: Vec<f64> = col.iter().flatten().copied().collect();
        if observed.is_empty() {
            return Err(Error::AllMissing(name.clone()));
        }
        let fill = median(&mut observed);
        col.iter_mut().filter(|v| v.is_none()).for_each(|v| *v = Some(fill));
    }

    for group in &frame.groups {
        let idx: Vec<usize> = group
            .columns
            .iter()
            .map(|c| frame.columns.iter().position(|x| x == c).expect("group column present"))
            .collect();
        let complete: Vec<bool> = (0..n).map(|row| idx.iter().all(|&i| frame.values[i][row].is_some())).collect();
        if complete.iter().all(|&c| c) {
            continue;
        }
        let mut counts = vec![0usize; idx.len()];
        for row in (0..n).filter(|&r| complete[r]) {
            for (k, &i) in idx.iter().enumerate() {
                if frame.values[i][row] == Some(1.0) {
                    counts[k] += 1;
                }
            }
        }
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(Error::AllMissing(group.source.clone()));
        }
        // Ties go to the lexicographically first level.
        let mode = counts.iter().enumerate().fold(0, |best, (k, &c)| if c > counts[best] { k } else { best });
        for row in 0..n {
            if !complete[row] {
                for (k, &i) in idx.iter().enumerate() {
                    frame.values[i][row] = Some(if k == mode { 1.0 } else { 0.0 });
                }
            }
        }
    }

    for cat in &mut frame.categorical {
        if cat.values.iter().all(Option::is_some) {
            continue;
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for v in cat.values.iter().flatten() {
            *counts.entry(v.as_str()).or_default() += 1;
        }
        let mode = counts
            .iter()
            .fold(None::<(&str, usize)>, |best, (&k, &c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((k, c)),
            })
            .map(|(k, _)| k.to_string())
            .ok_or_else(|| Error::AllMissing(cat.name.clone()))?;
        cat.values.iter_mut().filter(|v| v.is_none()).for_each(|v| *v = Some(mode.clone()));
    }
    Ok(frame)
}
