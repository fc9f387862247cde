//! Classical baselines: differencing, correlograms, AR and VAR by least
//! squares, BIC order selection and rolling one-step forecasts.

mod ar;
mod correlogram;
mod diff;
mod ols;
mod var;

use std::io::Write;
use std::ops::Range;

pub use ar::{bic, fit_ar, fit_ar_differenced, select_ar_order, select_ar_order_differenced, ArModel};
pub use correlogram::{acf, correlogram, pacf, CorrelogramReport};
pub use diff::{difference, difference_anchors, inverse_difference};
pub use var::{fit_var, fit_var_differenced, VarModel};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Draws `n` values of `x_t = c + Σ φ_j x_{t-j} + σ ε_t` after discarding
/// `burn_in` warm-up values started from zero.
pub fn simulate_ar(rng: &mut Rng, intercept: f64, phi: &[f64], sigma: f64, n: usize, burn_in: usize) -> Vec<f64> {
    let p = phi.len();
    let mut x = vec![0.0; p];
    for _ in 0..n + burn_in {
        let t = x.len();
        let mean = intercept + phi.iter().enumerate().map(|(j, c)| c * x[t - 1 - j]).sum::<f64>();
        x.push(mean + sigma * rng.normal());
    }
    x.split_off(p + burn_in)
}

fn check_targets(targets: &Range<usize>, len: usize, first: usize) -> Result<()> {
    if targets.end > len {
        return Err(Error::InvalidArgument(format!("forecast range {targets:?} beyond {len} observations")));
    }
    if targets.start < first {
        return Err(Error::InsufficientHistory(format!(
            "one-step forecasts start at index {first}, requested {}",
            targets.start
        )));
    }
    Ok(())
}

/// Level forecasts for each index in `targets`, each conditioned on the true
/// history before it. Differenced predictions are reintegrated from the
/// observed preceding levels.
pub fn forecast_ar_rolling(model: &ArModel, levels: &[f64], targets: Range<usize>) -> Result<Vec<f64>> {
    let d = model.differencing;
    check_targets(&targets, levels.len(), model.order + d)?;
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    let w = difference(&levels[..targets.end - 1], d).unwrap_or_default();
    targets
        .map(|t| {
            let next = model.predict_next(&w[..t - d]);
            reintegrate(next, &levels[t - d..t])
        })
        .collect()
}

/// Rolling one-step forecasts of column `component` of a VAR fitted to the
/// rows of `levels`.
pub fn forecast_var_rolling(model: &VarModel, levels: &Matrix, targets: Range<usize>, component: usize) -> Result<Vec<f64>> {
    let d = model.differencing;
    if levels.cols() != model.dim() || component >= model.dim() {
        return Err(Error::Shape(format!("VAR of dimension {} given {} columns", model.dim(), levels.cols())));
    }
    check_targets(&targets, levels.rows(), model.order + d)?;
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    let w = if d == 0 { levels.clone() } else { var::difference_rows(levels, d)? };
    targets
        .map(|t| {
            let next = model.predict_next(&w, t - d)[component];
            let prior: Vec<f64> = (t - d..t).map(|r| levels.get(r, component)).collect();
            reintegrate(next, &prior)
        })
        .collect()
}

fn reintegrate(next: f64, prior_levels: &[f64]) -> Result<f64> {
    if prior_levels.is_empty() {
        return Ok(next);
    }
    let anchors = difference_anchors(prior_levels, prior_levels.len())?;
    Ok(*inverse_difference(&[next], &anchors)?.last().expect("non-empty"))
}

/// One row of a baseline summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSummary {
    pub name: String,
    /// Marks the order chosen by BIC.
    pub selected: bool,
    pub order: usize,
    pub differencing: usize,
    pub n_obs: usize,
    pub bic: f64,
    /// Residual variance of the target equation.
    pub residual_variance: f64,
    pub intercept: f64,
    /// Target-equation coefficients, `name:lag=value`.
    pub coefficients: Vec<(String, usize, f64)>,
}

impl ModelSummary {
    pub fn from_ar(name: &str, series: &str, m: &ArModel) -> Self {
        ModelSummary {
            name: name.to_string(),
            selected: false,
            order: m.order,
            differencing: m.differencing,
            n_obs: m.n_obs,
            bic: m.bic,
            residual_variance: m.residual_variance,
            intercept: m.intercept,
            coefficients: m.coefficients.iter().enumerate().map(|(j, c)| (series.to_string(), j + 1, *c)).collect(),
        }
    }

    /// Summary of equation `component` of a VAR.
    pub fn from_var(name: &str, m: &VarModel, component: usize) -> Self {
        let mut coefficients = Vec::new();
        for (lag, a) in m.coefficients.iter().enumerate() {
            for (j, series) in m.names.iter().enumerate() {
                coefficients.push((series.clone(), lag + 1, a.get(component, j)));
            }
        }
        ModelSummary {
            name: name.to_string(),
            selected: false,
            order: m.order,
            differencing: m.differencing,
            n_obs: m.n_obs,
            bic: m.bic,
            residual_variance: m.sigma.get(component, component),
            intercept: m.intercept[component],
            coefficients,
        }
    }
}

/// `model,selected,order,differencing,n_obs,bic,residual_variance,intercept,coefficients`,
/// coefficients as `series:lag=value` joined by `;`.
pub fn write_model_summary<W: Write>(rows: &[ModelSummary], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "selected", "order", "differencing", "n_obs", "bic", "residual_variance", "intercept", "coefficients"])?;
    for r in rows {
        let coefs = r
            .coefficients
            .iter()
            .map(|(s, lag, v)| format!("{s}:{lag}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            r.name.clone(),
            r.selected.to_string(),
            r.order.to_string(),
            r.differencing.to_string(),
            r.n_obs.to_string(),
            r.bic.to_string(),
            r.residual_variance.to_string(),
            r.intercept.to_string(),
            coefs,
        ])?;
    }
    w.flush().map_err(|e| Error::io("<model summary>", e))
}
