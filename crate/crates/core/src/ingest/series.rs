use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use super::frame::FeatureFrame;
use super::Month;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Monthly market-level series: feature means, default rate and optional
/// unemployment rate, one row per observed month.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySeries {
    pub months: Vec<Month>,
    pub feature_names: Vec<String>,
    /// `months.len() x feature_names.len()`.
    pub features: Matrix,
    pub default_rate: Vec<f64>,
    pub unemp_rate: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggregateReport {
    /// Calendar months inside the observed span with no records.
    pub gaps: Vec<Month>,
    pub records_per_month: Vec<(Month, usize)>,
}

impl MonthlySeries {
    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.months.len();
        if self.features.rows() != n || self.features.cols() != self.feature_names.len() || self.default_rate.len() != n {
            return Err(Error::Shape(format!(
                "series with {n} months has a {}x{} feature matrix for {} names and {} default rates",
                self.features.rows(),
                self.features.cols(),
                self.feature_names.len(),
                self.default_rate.len()
            )));
        }
        if let Some(u) = &self.unemp_rate {
            if u.len() != n {
                return Err(Error::Shape(format!("{} unemp_rate values for {n} months", u.len())));
            }
        }
        if let Some(w) = self.months.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::BadRecord(format!("months not strictly increasing at {} -> {}", w[0], w[1])));
        }
        Ok(())
    }

    /// Rows `range` as a new series.
    pub fn slice(&self, range: std::ops::Range<usize>) -> MonthlySeries {
        let cols = self.n_features();
        let data = self.features.as_slice()[range.start * cols..range.end * cols].to_vec();
        MonthlySeries {
            months: self.months[range.clone()].to_vec(),
            feature_names: self.feature_names.clone(),
            features: Matrix::from_vec(range.len(), cols, data).expect("slice of a valid matrix"),
            default_rate: self.default_rate[range.clone()].to_vec(),
            unemp_rate: self.unemp_rate.as_ref().map(|u| u[range].to_vec()),
        }
    }

    /// Writes `month,default_rate,unemp_rate,<features...>`. The unemployment
    /// column is left blank when absent.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["month".to_string(), "default_rate".into(), "unemp_rate".into()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header)?;
        for (i, month) in self.months.iter().enumerate() {
            let mut row = vec![month.to_string(), self.default_rate[i].to_string()];
            row.push(self.unemp_rate.as_ref().map(|u| u[i].to_string()).unwrap_or_default());
            row.extend(self.features.row(i).iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<series csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = r.headers()?.clone();
        let expected = ["month", "default_rate", "unemp_rate"];
        let missing: Vec<String> = expected
            .iter()
            .enumerate()
            .filter(|(i, name)| headers.get(*i) != Some(**name))
            .map(|(_, n)| n.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingColumns(missing));
        }
        let feature_names: Vec<String> = headers.iter().skip(3).map(str::to_string).collect();
        let mut months = Vec::new();
        let mut default_rate = Vec::new();
        let mut unemp: Vec<Option<f64>> = Vec::new();
        let mut data = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                let cell = rec.get(i).unwrap_or("");
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    Error::BadRecord(format!("line {}: column {} value {cell:?} is not a number", line + 2, &headers[i]))
                })
            };
            months.push(rec.get(0).unwrap_or("").parse::<Month>()?);
            default_rate.push(num(1)?);
            unemp.push(if rec.get(2).unwrap_or("").is_empty() { None } else { Some(num(2)?) });
            for i in 3..headers.len() {
                data.push(num(i)?);
            }
        }
        let unemp_rate = if unemp.iter().all(Option::is_none) {
            None
        } else if unemp.iter().all(Option::is_some) {
            Some(unemp.into_iter().flatten().collect())
        } else {
            return Err(Error::BadRecord("unemp_rate column is partially blank".into()));
        };
        let series = MonthlySeries {
            features: Matrix::from_vec(months.len(), feature_names.len(), data)?,
            months,
            feature_names,
            default_rate,
            unemp_rate,
        };
        series.validate()?;
        Ok(series)
    }
}

/// Per-month arithmetic means of every feature column and of the binary
/// target (the default rate). Months are sorted; empty months are gaps.
pub fn aggregate_monthly(frame: &FeatureFrame) -> Result<(MonthlySeries, AggregateReport)> {
    if frame.values.iter().any(|c| c.iter().any(Option::is_none)) {
        return Err(Error::InvalidArgument("frame still has missing values; impute before aggregating".into()));
    }
    let n_cols = frame.columns.len();
    let mut buckets: BTreeMap<Month, (usize, Vec<f64>, f64)> = BTreeMap::new();
    for row in 0..frame.n_rows() {
        let entry = buckets.entry(frame.months[row]).or_insert_with(|| (0, vec![0.0; n_cols], 0.0));
        entry.0 += 1;
        for (acc, col) in entry.1.iter_mut().zip(&frame.values) {
            *acc += col[row].expect("checked above");
        }
        entry.2 += f64::from(frame.target[row]);
    }

    let mut months = Vec::with_capacity(buckets.len());
    let mut data = Vec::with_capacity(buckets.len() * n_cols);
    let mut default_rate = Vec::with_capacity(buckets.len());
    let mut report = AggregateReport::default();
    for (month, (count, sums, defaults)) in buckets {
        let c = count as f64;
        months.push(month);
        data.extend(sums.iter().map(|s| s / c));
        default_rate.push(defaults / c);
        report.records_per_month.push((month, count));
    }
    if let (Some(&first), Some(&last)) = (months.first(), months.last()) {
        let present: std::collections::HashSet<Month> = months.iter().copied().collect();
        let mut m = first;
        while m < last {
            if !present.contains(&m) {
                report.gaps.push(m);
            }
            m = m.succ();
        }
    }
    let series = MonthlySeries {
        features: Matrix::from_vec(months.len(), n_cols, data)?,
        months,
        feature_names: frame.columns.clone(),
        default_rate,
        unemp_rate: None,
    };
    Ok((series, report))
}

/// Reads a `month,unemp_rate` CSV; duplicate months are an error.
pub fn read_macro_csv<R: Read>(reader: R) -> Result<Vec<(Month, f64)>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::MissingColumns(vec!["month".into(), "unemp_rate".into()]));
    }
    let mut seen = HashMap::new();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let month: Month = rec.get(0).unwrap_or("").parse()?;
        let raw = rec.get(1).unwrap_or("");
        let rate = raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::BadRecord(format!("macro line {}: rate {raw:?} is not a number", line + 2)))?;
        if seen.insert(month, rate).is_some() {
            return Err(Error::DuplicateMacroMonth(month));
        }
        rows.push((month, rate));
    }
    Ok(rows)
}

/// Attaches the unemployment rate to every series month by matching dates.
pub fn merge_macro<R: Read>(series: &MonthlySeries, macro_csv: R) -> Result<MonthlySeries> {
    let rows: HashMap<Month, f64> = read_macro_csv(macro_csv)?.into_iter().collect();
    let missing: Vec<Month> = series.months.iter().filter(|m| !rows.contains_key(m)).copied().collect();
    if !missing.is_empty() {
        return Err(Error::MissingMacroMonths(missing));
    }
    let mut out = series.clone();
    out.unemp_rate = Some(series.months.iter().map(|m| rows[m]).collect());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(y: i32, mo: u8) -> Month {
        Month::new(y, mo).unwrap()
    }

    fn simple_frame(months: Vec<Month>, targets: Vec<u8>, x: Vec<f64>) -> FeatureFrame {
        FeatureFrame {
            columns: vec!["x".into()],
            values: vec![x.into_iter().map(Some).collect()],
            target: targets,
            months,
            categorical: Vec::new(),
            groups: Vec::new(),
        }
    }

    #[test]
    fn default_rate_is_mean_of_indicators() {
        let f = simple_frame(vec![m(2012, 1); 4], vec![1, 0, 0, 1], vec![1.0, 2.0, 3.0, 4.0]);
        let (s, _) = aggregate_monthly(&f).unwrap();
        assert_eq!(s.default_rate, vec![0.5]);
        assert_eq!(s.features.row(0), &[2.5]);
    }

    #[test]
    fn single_record_month_and_gap() {
        let f = simple_frame(vec![m(2012, 3), m(2012, 1), m(2012, 1)], vec![1, 0, 0], vec![7.0, 1.0, 3.0]);
        let (s, report) = aggregate_monthly(&f).unwrap();
        assert_eq!(s.months, vec![m(2012, 1), m(2012, 3)]);
        assert_eq!(s.features.row(1), &[7.0]);
        assert_eq!(s.default_rate, vec![0.0, 1.0]);
        assert_eq!(report.gaps, vec![m(2012, 2)]);
        s.validate().unwrap();
    }

    #[test]
    fn rejects_unimputed_frame() {
        let mut f = simple_frame(vec![m(2012, 1)], vec![0], vec![1.0]);
        f.values[0][0] = None;
        assert!(aggregate_monthly(&f).is_err());
    }

    fn series(months: Vec<Month>) -> MonthlySeries {
        let n = months.len();
        MonthlySeries {
            months,
            feature_names: vec!["a".into()],
            features: Matrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect()).unwrap(),
            default_rate: vec![0.1; n],
            unemp_rate: None,
        }
    }

    #[test]
    fn merge_full_subset() {
        let s = series(vec![m(2015, 6), m(2015, 7)]);
        let csv = "month,unemp_rate\n2015-05,5.6\n2015-06,5.3\n2015-07,5.2\n";
        let merged = merge_macro(&s, csv.as_bytes()).unwrap();
        assert_eq!(merged.unemp_rate, Some(vec![5.3, 5.2]));
    }

    #[test]
    fn merge_missing_month_named() {
        let s = series(vec![m(2015, 6), m(2015, 7)]);
        let err = merge_macro(&s, "month,unemp_rate\n2015-06,5.3\n".as_bytes()).unwrap_err();
        assert!(matches!(&err, Error::MissingMacroMonths(v) if v == &vec![m(2015, 7)]));
        assert!(err.to_string().contains("2015-07"));
    }

    #[test]
    fn merge_duplicate_month() {
        let s = series(vec![m(2015, 6)]);
        let csv = "month,unemp_rate\n2015-06,5.3\nJun-2015,5.4\n";
        assert!(matches!(merge_macro(&s, csv.as_bytes()), Err(Error::DuplicateMacroMonth(_))));
    }

    #[test]
    fn csv_round_trip() {
        let mut s = series(vec![m(2015, 6), m(2015, 7), m(2015, 9)]);
        s.default_rate = vec![0.1, 1.0 / 3.0, 0.0];
        s.unemp_rate = Some(vec![5.3, 5.2, 5.1]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("month,default_rate,unemp_rate,a\n2015-06,"));
        assert_eq!(MonthlySeries::read_csv(buf.as_slice()).unwrap(), s);

        s.unemp_rate = None;
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(MonthlySeries::read_csv(buf.as_slice()).unwrap(), s);
    }
}
