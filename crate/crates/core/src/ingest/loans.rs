use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::Month;
use crate::error::{Error, Result};

/// Numerical loan attributes kept for modeling (Lending Club export names).
pub const NUMERIC_FEATURES: [&str; 15] = [
    "annual_inc",
    "collection_recovery_fee",
    "delinq_amnt",
    "delinq_2yrs",
    "int_rate",
    "installment",
    "last_pymnt_amnt",
    "loan_amnt",
    "open_acc",
    "pub_rec",
    "recoveries",
    "revol_bal",
    "total_acc",
    "total_pymnt",
    "total_rec_late_fee",
];

pub const CATEGORICAL_FEATURES: [&str; 3] = ["home_ownership", "verification_status", "application_type"];

/// Maps CSV header names onto record fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub id: String,
    pub issue_month: String,
    pub status: String,
    pub numeric: Vec<String>,
    pub categorical: Vec<String>,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            id: "id".into(),
            issue_month: "issue_d".into(),
            status: "loan_status".into(),
            numeric: NUMERIC_FEATURES.iter().map(|s| s.to_string()).collect(),
            categorical: CATEGORICAL_FEATURES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoanRecord {
    pub id: String,
    pub issue_month: Month,
    pub loan_status: String,
    pub numeric: BTreeMap<String, Option<f64>>,
    pub categorical: BTreeMap<String, Option<String>>,
}

#[derive(Debug, Clone, Default)]
pub struct LoanTable {
    pub records: Vec<LoanRecord>,
    /// Header columns not named by the schema.
    pub ignored_columns: Vec<String>,
    /// Schema feature columns missing from the header; their values are all missing.
    pub absent_columns: Vec<String>,
}

/// Parses a numeric cell; blanks, junk and non-finite values become `None`.
/// A trailing `%` is stripped (`"13.56%"` parses as 13.56).
pub fn parse_numeric_cell(cell: &str) -> Option<f64> {
    let t = cell.trim();
    let t = t.strip_suffix('%').unwrap_or(t).trim();
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_loans<R: Read>(source: R, schema: &Schema) -> Result<LoanTable> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).trim(csv::Trim::Headers).from_reader(source);
    let headers = reader.headers()?.clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::MissingColumns(vec!["<header row>".into()]));
    }

    let required = [&schema.id, &schema.issue_month, &schema.status];
    let missing: Vec<String> = required.iter().filter(|c| !index.contains_key(c.as_str())).map(|c| c.to_string()).collect();
    if !missing.is_empty() {
        return Err(Error::MissingColumns(missing));
    }

    let known: HashSet<&str> = required
        .iter()
        .map(|s| s.as_str())
        .chain(schema.numeric.iter().map(String::as_str))
        .chain(schema.categorical.iter().map(String::as_str))
        .collect();
    let ignored_columns = headers.iter().filter(|h| !known.contains(h)).map(str::to_string).collect();
    let absent_columns = schema
        .numeric
        .iter()
        .chain(&schema.categorical)
        .filter(|c| !index.contains_key(c.as_str()))
        .cloned()
        .collect();

    let id_col = index[schema.id.as_str()];
    let month_col = index[schema.issue_month.as_str()];
    let status_col = index[schema.status.as_str()];

    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (row_no, row) in reader.records().enumerate() {
        let row = row?;
        let line = row_no + 2;
        let id = row.get(id_col).unwrap_or("").trim().to_string();
        if id.is_empty() {
            return Err(Error::BadRecord(format!("line {line}: empty id")));
        }
        let month_raw = row.get(month_col).unwrap_or("");
        let issue_month: Month =
            month_raw.parse().map_err(|_| Error::BadRecord(format!("line {line}: unparseable issue month {month_raw:?}")))?;
        let loan_status = row.get(status_col).unwrap_or("").trim().to_string();

        let numeric = schema
            .numeric
            .iter()
            .map(|name| {
                let v = index.get(name.as_str()).and_then(|&i| row.get(i)).and_then(parse_numeric_cell);
                (name.clone(), v)
            })
            .collect();
        let categorical = schema
            .categorical
            .iter()
            .map(|name| {
                let v = index
                    .get(name.as_str())
                    .and_then(|&i| row.get(i))
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string);
                (name.clone(), v)
            })
            .collect();

        *seen.entry(id.clone()).or_default() += 1;
        records.push(LoanRecord { id, issue_month, loan_status, numeric, categorical });
    }

    let mut dups: Vec<String> = seen.into_iter().filter(|(_, n)| *n > 1).map(|(id, _)| id).collect();
    if !dups.is_empty() {
        dups.sort();
        return Err(Error::DuplicateIds(dups));
    }
    Ok(LoanTable { records, ignored_columns, absent_columns })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatusClass {
    /// Loan still running; dropped before modeling.
    Ongoing,
    /// Resolved loan with its binary target (0 paid off, 1 default).
    Resolved(u8),
}

/// Raw status string to class, matched case-insensitively after trimming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusTable {
    entries: BTreeMap<String, StatusClass>,
}

impl StatusTable {
    pub fn new() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, status: &str, class: StatusClass) {
        self.entries.insert(normalize_status(status), class);
    }

    pub fn classify(&self, status: &str) -> Result<StatusClass> {
        self.entries.get(&normalize_status(status)).copied().ok_or_else(|| Error::UnknownStatus(status.to_string()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, StatusClass)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl Default for StatusTable {
    /// Fully Paid is 0; Default and Charged Off are 1; the vendor's running
    /// states are ongoing. Anything else must be added explicitly.
    fn default() -> Self {
        let mut t = Self::new();
        t.insert("Fully Paid", StatusClass::Resolved(0));
        t.insert("Default", StatusClass::Resolved(1));
        t.insert("Charged Off", StatusClass::Resolved(1));
        t.insert("Does not meet the credit policy. Status:Fully Paid", StatusClass::Resolved(0));
        t.insert("Does not meet the credit policy. Status:Charged Off", StatusClass::Resolved(1));
        for s in ["Current", "In Grace Period", "Late (16-30 days)", "Late (31-120 days)"] {
            t.insert(s, StatusClass::Ongoing);
        }
        t
    }
}

fn normalize_status(s: &str) -> String {
    s.trim().to_ascii_lowercase()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedLoan {
    pub record: LoanRecord,
    pub target: u8,
}

/// Drops ongoing loans and attaches the binary target.
pub fn filter_and_encode_target(records: Vec<LoanRecord>, table: &StatusTable) -> Result<Vec<ResolvedLoan>> {
    let mut out = Vec::with_capacity(records.len());
    for record in records {
        match table.classify(&record.loan_status)? {
            StatusClass::Ongoing => {}
            StatusClass::Resolved(target) => out.push(ResolvedLoan { record, target }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
id,issue_d,loan_status,annual_inc,int_rate,home_ownership,extra_col
1,Dec-2011,Fully Paid,50000, 10.65%,RENT,x
2,2011-12,Charged Off,,15.27%,OWN,y
3,Jan-2012,Current,40000,abc,,z
";

    fn small_schema() -> Schema {
        Schema {
            numeric: vec!["annual_inc".into(), "int_rate".into(), "loan_amnt".into()],
            categorical: vec!["home_ownership".into()],
            ..Schema::default()
        }
    }

    #[test]
    fn parses_fixture() {
        let t = parse_loans(FIXTURE.as_bytes(), &small_schema()).unwrap();
        assert_eq!(t.records.len(), 3);
        let missing_inc = t.records.iter().filter(|r| r.numeric["annual_inc"].is_none()).count();
        assert_eq!(missing_inc, 1);
        assert_eq!(t.records[0].numeric["int_rate"], Some(10.65));
        assert_eq!(t.records[2].numeric["int_rate"], None);
        assert_eq!(t.records[2].categorical["home_ownership"], None);
        assert_eq!(t.records[0].issue_month, t.records[1].issue_month);
        assert_eq!(t.ignored_columns, vec!["extra_col".to_string()]);
        assert_eq!(t.absent_columns, vec!["loan_amnt".to_string()]);
    }

    #[test]
    fn header_only_is_empty() {
        let t = parse_loans("id,issue_d,loan_status\n".as_bytes(), &Schema::default()).unwrap();
        assert!(t.records.is_empty());
    }

    #[test]
    fn missing_header() {
        assert!(matches!(parse_loans("".as_bytes(), &Schema::default()), Err(Error::MissingColumns(_))));
        let err = parse_loans("id,loan_status\n1,Current\n".as_bytes(), &Schema::default()).unwrap_err();
        assert!(err.to_string().contains("issue_d"), "{err}");
    }

    #[test]
    fn duplicate_ids_listed() {
        let csv = "id,issue_d,loan_status\n7,2012-01,Current\n8,2012-01,Current\n7,2012-02,Default\n";
        match parse_loans(csv.as_bytes(), &Schema::default()) {
            Err(Error::DuplicateIds(ids)) => assert_eq!(ids, vec!["7".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_month_is_error() {
        let csv = "id,issue_d,loan_status\n1,someday,Current\n";
        assert!(matches!(parse_loans(csv.as_bytes(), &Schema::default()), Err(Error::BadRecord(_))));
    }

    fn with_status(statuses: &[&str]) -> Vec<LoanRecord> {
        statuses
            .iter()
            .enumerate()
            .map(|(i, s)| LoanRecord {
                id: i.to_string(),
                issue_month: Month::new(2012, 1).unwrap(),
                loan_status: s.to_string(),
                numeric: BTreeMap::new(),
                categorical: BTreeMap::new(),
            })
            .collect()
    }

    #[test]
    fn status_mapping() {
        let table = StatusTable::default();
        let out = filter_and_encode_target(with_status(&["Fully Paid", "Current", "Charged Off"]), &table).unwrap();
        assert_eq!(out.iter().map(|r| r.target).collect::<Vec<_>>(), vec![0, 1]);
        assert!(filter_and_encode_target(with_status(&["Current", "current "]), &table).unwrap().is_empty());
        match filter_and_encode_target(with_status(&["Issued"]), &table) {
            Err(Error::UnknownStatus(s)) => assert_eq!(s, "Issued"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn status_table_is_configurable() {
        let mut table = StatusTable::default();
        table.insert("Issued", StatusClass::Ongoing);
        assert!(filter_and_encode_target(with_status(&["Issued"]), &table).unwrap().is_empty());
    }
}
