use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ols::ols;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Vector autoregression `y_t = c + Σ A_j y_{t-j} + e_t`, one least-squares
/// regression per equation on the shared lagged design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarModel {
    pub names: Vec<String>,
    pub order: usize,
    pub differencing: usize,
    pub intercept: Vec<f64>,
    /// `A_1..A_p`, each `dim × dim`; row `i` is equation `i`.
    pub coefficients: Vec<Matrix>,
    /// `E'E / n_obs`.
    pub sigma: Matrix,
    pub n_obs: usize,
    pub bic: f64,
    pub residuals: Matrix,
}

pub(crate) fn difference_rows(data: &Matrix, d: usize) -> Result<Matrix> {
    let (n, k) = data.shape();
    if n <= d {
        return Err(Error::InsufficientData(format!("cannot difference {n} rows {d} times")));
    }
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let col: Vec<f64> = (0..n).map(|r| data.get(r, j)).collect();
        cols.push(super::difference(&col, d)?);
    }
    let m = n - d;
    Matrix::from_vec(m, k, (0..m).flat_map(|r| cols.iter().map(move |c| c[r])).collect())
}

/// Fits VAR(p) to the rows of `data` (`n × dim`) without differencing.
pub fn fit_var(data: &Matrix, names: &[String], p: usize) -> Result<VarModel> {
    let (n, k) = data.shape();
    if p == 0 {
        return Err(Error::InvalidArgument("VAR order must be at least 1".into()));
    }
    if names.len() != k {
        return Err(Error::Shape(format!("{} names for {k} series", names.len())));
    }
    if n < p + k * p + 2 {
        return Err(Error::InsufficientData(format!("VAR({p}) in {k} series needs more than {n} observations")));
    }
    let m = n - p;
    let regressors = 1 + k * p;
    let x = DMatrix::from_fn(m, regressors, |r, c| {
        if c == 0 {
            1.0
        } else {
            let lag = (c - 1) / k + 1;
            data.get(p + r - lag, (c - 1) % k)
        }
    });
    let y = DMatrix::from_fn(m, k, |r, c| data.get(p + r, c));
    let fit = ols(x, &y, &format!("VAR({p})"))?;
    let b = &fit.coefficients;
    let intercept = (0..k).map(|i| b[(0, i)]).collect();
    let coefficients = (1..=p)
        .map(|lag| {
            let vals = (0..k)
                .flat_map(|i| (0..k).map(move |j| b[(1 + (lag - 1) * k + j, i)]))
                .collect();
            Matrix::from_vec(k, k, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    let e = &fit.residuals;
    let mut sigma = Matrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = e.column(i).dot(&e.column(j)) / m as f64;
            sigma.set(i, j, v);
            sigma.set(j, i, v);
        }
    }
    let det = DMatrix::from_row_slice(k, k, sigma.as_slice()).determinant();
    let n_params = k * regressors;
    let bic = if det <= 0.0 {
        f64::NEG_INFINITY
    } else {
        m as f64 * det.ln() + n_params as f64 * (m as f64).ln()
    };
    let residuals = Matrix::from_vec(m, k, (0..m).flat_map(|r| (0..k).map(move |c| e[(r, c)])).collect())?;
    Ok(VarModel {
        names: names.to_vec(),
        order: p,
        differencing: 0,
        intercept,
        coefficients,
        sigma,
        n_obs: m,
        bic,
        residuals,
    })
}

/// Fits VAR(p) to the `d`-fold differences of each column of `levels`.
pub fn fit_var_differenced(levels: &Matrix, names: &[String], p: usize, d: usize) -> Result<VarModel> {
    let mut model = fit_var(&difference_rows(levels, d)?, names, p)?;
    model.differencing = d;
    Ok(model)
}

impl VarModel {
    pub fn dim(&self) -> usize {
        self.intercept.len()
    }

    /// One-step prediction of every component from the last `order` rows of
    /// the (differenced) data ending just before row `end`.
    pub fn predict_next(&self, data: &Matrix, end: usize) -> Vec<f64> {
        let k = self.dim();
        (0..k)
            .map(|i| {
                let mut acc = self.intercept[i];
                for (lag, a) in self.coefficients.iter().enumerate() {
                    let row = end - 1 - lag;
                    for j in 0..k {
                        acc += a.get(i, j) * data.get(row, j);
                    }
                }
                acc
            })
            .collect()
    }
}
