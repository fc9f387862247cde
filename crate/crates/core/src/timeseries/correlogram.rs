use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelogramReport {
    pub lags: Vec<usize>,
    pub acf: Vec<f64>,
    pub pacf: Vec<f64>,
    /// Half-width of the 95% white-noise band, `1.96 / sqrt(n)`.
    pub conf_band: f64,
}

fn check(series: &[f64], max_lag: usize) -> Result<()> {
    if series.len() <= max_lag {
        return Err(Error::InsufficientData(format!("{} observations for max lag {max_lag}", series.len())));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("correlogram input".into()));
    }
    Ok(())
}

/// Sample autocorrelation for lags `0..=max_lag`, using the divide-by-n
/// autocovariance.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    check(series, max_lag)?;
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let autocov = |k: usize| centred.iter().zip(&centred[k..]).map(|(a, b)| a * b).sum::<f64>() / n;
    let gamma0 = autocov(0);
    if gamma0 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mut out = vec![1.0];
    out.extend((1..=max_lag).map(|k| (autocov(k) / gamma0).clamp(-1.0, 1.0)));
    Ok(out)
}

/// Partial autocorrelation for lags `0..=max_lag` (lag 0 is 1) by the
/// Durbin-Levinson recursion on the sample autocorrelations.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(series, max_lag)?;
    Ok(durbin_levinson(&rho))
}

pub(crate) fn durbin_levinson(rho: &[f64]) -> Vec<f64> {
    let max_lag = rho.len() - 1;
    let mut out = vec![1.0];
    let mut phi: Vec<f64> = Vec::new();
    for k in 1..=max_lag {
        let phi_kk = if k == 1 {
            rho[1]
        } else {
            let num = rho[k] - (1..k).map(|j| phi[j - 1] * rho[k - j]).sum::<f64>();
            let den = 1.0 - (1..k).map(|j| phi[j - 1] * rho[j]).sum::<f64>();
            if den.abs() < f64::EPSILON {
                0.0
            } else {
                (num / den).clamp(-1.0, 1.0)
            }
        };
        let prev = phi.clone();
        phi = (1..k).map(|j| prev[j - 1] - phi_kk * prev[k - j - 1]).collect();
        phi.push(phi_kk);
        out.push(phi_kk);
    }
    out
}

pub fn correlogram(series: &[f64], max_lag: usize) -> Result<CorrelogramReport> {
    let acf = acf(series, max_lag)?;
    let pacf = durbin_levinson(&acf);
    Ok(CorrelogramReport {
        lags: (0..=max_lag).collect(),
        acf,
        pacf,
        conf_band: 1.96 / (series.len() as f64).sqrt(),
    })
}

impl CorrelogramReport {
    /// `lag,acf,pacf,conf_band`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lag", "acf", "pacf", "conf_band"])?;
        for i in 0..self.lags.len() {
            w.write_record([
                self.lags[i].to_string(),
                self.acf[i].to_string(),
                self.pacf[i].to_string(),
                self.conf_band.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<correlogram>", e))
    }
}
