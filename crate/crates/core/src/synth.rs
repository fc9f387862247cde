//! Seeded synthetic loan book with a macro-driven default probability.
//!
//! Each loan defaults with probability
//! `logistic(base + macro_effect·z_t + 0.08·(int_rate − 13) + 0.2·[RENT] + 0.15·sin(2πm/12))`
//! where `z_t` is the unemployment rate standardized over the generated
//! months. The rate itself is a smooth mean-reverting walk whose monthly
//! change follows an AR(1). No other loan column depends on the outcome.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Month;
use crate::numerics::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_loans: usize,
    pub n_months: usize,
    pub macro_effect: f64,
    pub start: Month,
    /// Share of loans still running (status `Current`).
    pub ongoing_share: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_loans: 24_000,
            n_months: 120,
            macro_effect: 3.0,
            start: Month::new(2007, 6).expect("valid month"),
            ongoing_share: 0.05,
        }
    }
}

const BASE_RATE: f64 = 0.15;
const MACRO_MEAN: f64 = 6.0;
const MACRO_REVERSION: f64 = 0.98;
const MACRO_MOMENTUM: f64 = 0.85;
const MACRO_SIGMA: f64 = 0.04;

const HOME_OWNERSHIP: [(&str, f64); 6] =
    [("MORTGAGE", 0.45), ("RENT", 0.40), ("OWN", 0.12), ("OTHER", 0.015), ("NONE", 0.01), ("ANY", 0.005)];
const VERIFICATION: [(&str, f64); 3] = [("Verified", 0.35), ("Source Verified", 0.35), ("Not Verified", 0.30)];
const APPLICATION: [(&str, f64); 2] = [("Individual", 0.98), ("Joint App", 0.02)];
const GRADES: [&str; 7] = ["A", "B", "C", "D", "E", "F", "G"];

const HEADER: [&str; 23] = [
    "id",
    "issue_d",
    "loan_status",
    "grade",
    "loan_amnt",
    "int_rate",
    "installment",
    "annual_inc",
    "delinq_2yrs",
    "delinq_amnt",
    "open_acc",
    "pub_rec",
    "revol_bal",
    "total_acc",
    "total_pymnt",
    "total_rec_late_fee",
    "recoveries",
    "collection_recovery_fee",
    "last_pymnt_amnt",
    "home_ownership",
    "verification_status",
    "application_type",
    "url",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSummary {
    pub months: Vec<Month>,
    pub unemp_rate: Vec<f64>,
    /// Realized default fraction among resolved loans per month.
    pub default_rate: Vec<f64>,
}

fn pick<'a>(rng: &mut Rng, table: &[(&'a str, f64)]) -> &'a str {
    let mut u = rng.uniform();
    for (name, p) in table {
        if u < *p {
            return name;
        }
        u -= p;
    }
    table[table.len() - 1].0
}

fn logistic(x: f64) -> f64 {
    crate::numerics::sigmoid(x)
}

/// Cell for a numeric column, blank with probability `missing`.
fn cell(rng: &mut Rng, missing: f64, value: String) -> String {
    if rng.bernoulli(missing) {
        String::new()
    } else {
        value
    }
}

/// Writes the loan CSV and the `month,unemp_rate` CSV. Identical configs
/// give byte-identical output.
pub fn generate<L: Write, M: Write>(config: &SynthConfig, loans: L, macro_out: M) -> Result<SynthSummary> {
    if config.n_months < 24 || config.n_loans < config.n_months {
        return Err(Error::InvalidArgument(format!(
            "synth needs n_loans >= n_months >= 24, got {} loans over {} months",
            config.n_loans, config.n_months
        )));
    }
    if !config.macro_effect.is_finite() || !(0.0..1.0).contains(&config.ongoing_share) {
        return Err(Error::InvalidArgument("macro_effect must be finite and ongoing_share in [0, 1)".into()));
    }
    let mut rng = Rng::new(config.seed);
    let mut macro_rng = rng.fork();

    let months: Vec<Month> = (0..config.n_months).map(|i| config.start.plus(i as i64)).collect();
    let mut level = MACRO_MEAN + macro_rng.normal();
    let mut velocity = 0.0;
    let mut unemp = Vec::with_capacity(config.n_months);
    for _ in 0..config.n_months {
        velocity = MACRO_MOMENTUM * velocity + MACRO_SIGMA * macro_rng.normal();
        level = MACRO_MEAN + MACRO_REVERSION * (level - MACRO_MEAN) + velocity;
        unemp.push((level.max(0.5) * 100.0).round() / 100.0);
    }
    let n = unemp.len() as f64;
    let mean = unemp.iter().sum::<f64>() / n;
    let sd = (unemp.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / n).sqrt();
    let z: Vec<f64> = unemp.iter().map(|u| if sd > 0.0 { (u - mean) / sd } else { 0.0 }).collect();

    let mut mw = csv::Writer::from_writer(macro_out);
    mw.write_record(["month", "unemp_rate"])?;
    for (m, u) in months.iter().zip(&unemp) {
        mw.write_record([m.to_string(), format!("{u:.2}")])?;
    }
    mw.flush().map_err(|e| Error::io("<synth macro>", e))?;

    let base = (BASE_RATE / (1.0 - BASE_RATE)).ln();
    let mut defaults = vec![0usize; config.n_months];
    let mut resolved = vec![0usize; config.n_months];
    let mut lw = csv::Writer::from_writer(loans);
    lw.write_record(HEADER)?;
    for i in 0..config.n_loans {
        let t = i * config.n_months / config.n_loans;
        let month = months[t];
        let home = pick(&mut rng, &HOME_OWNERSHIP);
        let verification = pick(&mut rng, &VERIFICATION);
        let application = pick(&mut rng, &APPLICATION);
        let int_rate = (13.0 + 4.0 * rng.normal()).clamp(5.0, 30.0);
        let seasonal = 0.15 * (2.0 * PI * f64::from(month.month()) / 12.0).sin();
        let logit = base
            + config.macro_effect * z[t]
            + 0.08 * (int_rate - 13.0)
            + if home == "RENT" { 0.2 } else { 0.0 }
            + seasonal;
        let defaulted = rng.bernoulli(logistic(logit));
        let ongoing = rng.bernoulli(config.ongoing_share);
        let status = if ongoing {
            if rng.bernoulli(0.9) { "Current" } else { "Late (31-120 days)" }
        } else {
            resolved[t] += 1;
            let legacy = rng.bernoulli(0.02);
            if defaulted {
                defaults[t] += 1;
                if legacy {
                    "Does not meet the credit policy. Status:Charged Off"
                } else if rng.bernoulli(0.05) {
                    "Default"
                } else {
                    "Charged Off"
                }
            } else if legacy {
                "Does not meet the credit policy. Status:Fully Paid"
            } else {
                "Fully Paid"
            }
        };

        let loan_amnt = (40.0 + rng.below(1361) as f64) * 25.0;
        let monthly = int_rate / 1200.0;
        let installment = loan_amnt * monthly / (1.0 - (1.0 + monthly).powi(-36));
        let annual_inc = (11.0 + 0.5 * rng.normal()).exp();
        let total_pymnt = installment * rng.uniform_range(6.0, 36.0);
        let late_fee = if rng.bernoulli(0.05) { 15.0 * rng.uniform() } else { 0.0 };
        let recoveries = if rng.bernoulli(0.1) { 500.0 * rng.uniform() } else { 0.0 };
        let grade = GRADES[(((int_rate - 5.0) / 25.0 * 7.0) as usize).min(6)];
        let delinq_2yrs = rng.below(3) * usize::from(rng.bernoulli(0.2));
        let delinq_amnt = 1000.0 * rng.uniform();
        let open_acc = 3 + rng.below(25);
        let pub_rec = usize::from(rng.bernoulli(0.08));
        let revol_bal = (9.0 + rng.normal()).exp();
        let total_acc = 8 + rng.below(40);
        let last_pymnt = installment * rng.uniform_range(0.5, 3.0);
        let row = [
            format!("{}", 1_000_000 + i),
            month.abbreviated(),
            status.to_string(),
            grade.to_string(),
            format!("{loan_amnt:.0}"),
            format!("{int_rate:.2}%"),
            cell(&mut rng, 0.01, format!("{installment:.2}")),
            cell(&mut rng, 0.01, format!("{annual_inc:.0}")),
            format!("{delinq_2yrs}"),
            cell(&mut rng, 0.9, format!("{delinq_amnt:.0}")),
            cell(&mut rng, 0.02, format!("{open_acc}")),
            format!("{pub_rec}"),
            cell(&mut rng, 0.02, format!("{revol_bal:.0}")),
            cell(&mut rng, 0.02, format!("{total_acc}")),
            format!("{total_pymnt:.2}"),
            format!("{late_fee:.2}"),
            format!("{recoveries:.2}"),
            format!("{:.2}", recoveries * 0.18),
            cell(&mut rng, 0.01, format!("{last_pymnt:.2}")),
            home.to_string(),
            verification.to_string(),
            application.to_string(),
            format!("https://example.invalid/loan/{}", 1_000_000 + i),
        ];
        lw.write_record(&row)?;
    }
    lw.flush().map_err(|e| Error::io("<synth loans>", e))?;

    let default_rate = defaults
        .iter()
        .zip(&resolved)
        .map(|(&d, &r)| if r == 0 { 0.0 } else { d as f64 / r as f64 })
        .collect();
    Ok(SynthSummary { months, unemp_rate: unemp, default_rate })
}
