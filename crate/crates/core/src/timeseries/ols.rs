use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Least-squares fit shared by every equation: `y ≈ x b`.
pub(crate) struct Ols {
    /// `x.ncols() × y.ncols()`.
    pub coefficients: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
}

/// Solves through the SVD. Rank deficiency (relative singular value below
/// `1e-10`) is reported as [`Error::Singular`] rather than silently resolved.
pub(crate) fn ols(x: DMatrix<f64>, y: &DMatrix<f64>, what: &str) -> Result<Ols> {
    if x.nrows() < x.ncols() {
        return Err(Error::InsufficientData(format!(
            "{what}: {} observations for {} regressors",
            x.nrows(),
            x.ncols()
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what.to_string()));
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin <= smax * 1e-10 {
        return Err(Error::Singular(format!("{what}: design matrix is rank deficient")));
    }
    let coefficients = svd
        .solve(y, 0.0)
        .map_err(|e| Error::Singular(format!("{what}: {e}")))?;
    let residuals = y - &x * &coefficients;
    Ok(Ols { coefficients, residuals })
}
