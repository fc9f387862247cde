use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::diff::difference;
use super::ols::ols;
use crate::error::{Error, Result};

/// Univariate autoregression `w_t = c + Σ φ_j w_{t-j} + e_t` fitted to the
/// `differencing`-fold differences of a level series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub order: usize,
    pub differencing: usize,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// `RSS / n_obs`.
    pub residual_variance: f64,
    pub rss: f64,
    /// Number of equations in the conditional fit.
    pub n_obs: usize,
    pub bic: f64,
    pub residuals: Vec<f64>,
}

/// `n ln(rss/n) + k ln n`; a perfect fit gives `-inf`.
pub fn bic(rss: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    if rss <= 0.0 {
        return f64::NEG_INFINITY;
    }
    n * (rss / n).ln() + k as f64 * n.ln()
}

/// Conditional least squares on `series` as given (no differencing).
pub fn fit_ar(series: &[f64], p: usize) -> Result<ArModel> {
    let n = series.len();
    if n <= p + 2 {
        return Err(Error::InsufficientData(format!("AR({p}) needs more than {n} observations")));
    }
    let m = n - p;
    let x = DMatrix::from_fn(m, p + 1, |r, c| if c == 0 { 1.0 } else { series[p + r - c] });
    let y = DMatrix::from_column_slice(m, 1, &series[p..]);
    let fit = if p == 0 {
        // Intercept-only: the mean. A constant series is a perfect (not singular) fit here.
        if series.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("AR input".into()));
        }
        let mean = series.iter().sum::<f64>() / n as f64;
        super::ols::Ols {
            coefficients: DMatrix::from_element(1, 1, mean),
            residuals: y.map(|v| v - mean),
        }
    } else {
        ols(x, &y, &format!("AR({p})"))?
    };
    let residuals: Vec<f64> = fit.residuals.iter().copied().collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    Ok(ArModel {
        order: p,
        differencing: 0,
        intercept: fit.coefficients[0],
        coefficients: (1..=p).map(|j| fit.coefficients[j]).collect(),
        residual_variance: rss / m as f64,
        rss,
        n_obs: m,
        bic: bic(rss, m, p + 1),
        residuals,
    })
}

/// Fits AR(p) to the `d`-fold differences of `levels`.
pub fn fit_ar_differenced(levels: &[f64], p: usize, d: usize) -> Result<ArModel> {
    let mut model = fit_ar(&difference(levels, d)?, p)?;
    model.differencing = d;
    Ok(model)
}

/// Fits every candidate order on a common estimation sample (the first
/// `p_max - p` observations are skipped for order `p`) and returns the
/// minimum-BIC model; ties go to the smaller order.
pub fn select_ar_order(series: &[f64], candidates: &[usize]) -> Result<ArModel> {
    let mut orders = candidates.to_vec();
    orders.sort_unstable();
    orders.dedup();
    let p_max = *orders
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty candidate order set".into()))?;
    let mut best: Option<ArModel> = None;
    for p in orders {
        if series.len() < p_max - p {
            return Err(Error::InsufficientData("series shorter than maximum order".into()));
        }
        let model = fit_ar(&series[p_max - p..], p)?;
        if best.as_ref().is_none_or(|b| model.bic < b.bic) {
            best = Some(model);
        }
    }
    Ok(best.expect("non-empty candidates"))
}

/// [`select_ar_order`] on the `d`-fold differences of `levels`.
pub fn select_ar_order_differenced(levels: &[f64], candidates: &[usize], d: usize) -> Result<ArModel> {
    let mut model = select_ar_order(&difference(levels, d)?, candidates)?;
    model.differencing = d;
    Ok(model)
}

impl ArModel {
    /// One-step prediction of the (differenced) series from its last `order`
    /// values, most recent last.
    pub fn predict_next(&self, history: &[f64]) -> f64 {
        let n = history.len();
        self.intercept
            + self
                .coefficients
                .iter()
                .enumerate()
                .map(|(j, phi)| phi * history[n - 1 - j])
                .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_rng;
    use crate::timeseries::simulate_ar;
    use proptest::prelude::*;

    fn recursion(n: usize) -> Vec<f64> {
        let mut x = vec![1.0, -1.0];
        while x.len() < n {
            let t = x.len();
            x.push(0.5 * x[t - 1] - 0.3 * x[t - 2]);
        }
        x
    }

    #[test]
    fn noiseless_recovery() {
        let m = fit_ar(&recursion(20), 2).unwrap();
        assert!((m.coefficients[0] - 0.5).abs() < 1e-8);
        assert!((m.coefficients[1] + 0.3).abs() < 1e-8);
        assert!(m.intercept.abs() < 1e-8);
    }

    #[test]
    fn white_noise_order_zero() {
        let mut rng = make_rng(5);
        let x: Vec<f64> = (0..500).map(|_| rng.normal()).collect();
        let m = fit_ar(&x, 0).unwrap();
        let mean = x.iter().sum::<f64>() / 500.0;
        assert!((m.intercept - mean).abs() < 1e-12);
        assert!((0.85..=1.15).contains(&m.residual_variance));
        let zeros = (0..10)
            .filter(|&seed| {
                let mut rng = make_rng(200 + seed);
                let x: Vec<f64> = (0..500).map(|_| rng.normal()).collect();
                select_ar_order(&x, &[0, 1, 2, 3]).unwrap().order == 0
            })
            .count();
        assert!(zeros >= 8, "{zeros}/10");
    }

    #[test]
    fn white_noise_coefficients_near_zero() {
        let mut rng = make_rng(11);
        let x: Vec<f64> = (0..10_000).map(|_| rng.normal()).collect();
        let m = fit_ar(&x, 3).unwrap();
        assert!(m.coefficients.iter().all(|c| c.abs() < 0.05), "{:?}", m.coefficients);
    }

    #[test]
    fn ar1_selection_and_singleton() {
        let hits = (0..10)
            .filter(|&seed| {
                let x = simulate_ar(&mut make_rng(300 + seed), 0.0, &[0.6], 1.0, 500, 100);
                select_ar_order(&x, &[1, 2, 3]).unwrap().order == 1
            })
            .count();
        assert!(hits >= 8, "{hits}/10");
        let x = simulate_ar(&mut make_rng(1), 0.0, &[0.6], 1.0, 100, 10);
        assert_eq!(select_ar_order(&x, &[2]).unwrap().order, 2);
        assert!(select_ar_order(&x, &[]).is_err());
    }

    #[test]
    fn ar2_bic_beats_neighbours() {
        let wins = (0..10)
            .filter(|&seed| {
                let x = simulate_ar(&mut make_rng(400 + seed), 0.0, &[0.5, -0.3], 1.0, 500, 100);
                let b: Vec<f64> = (1..=3).map(|p| fit_ar(&x[3 - p..], p).unwrap().bic).collect();
                b[1] < b[0] && b[1] < b[2]
            })
            .count();
        assert!(wins >= 8, "{wins}/10");
    }

    #[test]
    fn ar2_selection() {
        let mut hits = 0;
        for seed in 0..10 {
            let x = simulate_ar(&mut make_rng(100 + seed), 0.0, &[0.5, -0.3], 1.0, 500, 100);
            let m = select_ar_order(&x, &[1, 2, 3, 4, 5]).unwrap();
            if m.order == 2 {
                hits += 1;
            }
            let full = fit_ar(&x, 2).unwrap();
            assert!((full.coefficients[0] - 0.5).abs() <= 0.1);
            assert!((full.coefficients[1] + 0.3).abs() <= 0.1);
        }
        assert!(hits >= 8, "{hits}/10");
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let x = simulate_ar(&mut make_rng(9), 0.2, &[0.4, 0.2], 1.0, 300, 50);
        let m = fit_ar(&x, 2).unwrap();
        let sum: f64 = m.residuals.iter().sum();
        assert!(sum.abs() < 1e-8);
        for j in 1..=2 {
            let dot: f64 = m.residuals.iter().enumerate().map(|(r, e)| e * x[2 + r - j]).sum();
            assert!(dot.abs() < 1e-8, "lag {j}: {dot}");
        }
    }

    #[test]
    fn constant_series_is_singular() {
        assert!(matches!(fit_ar(&[4.0; 30], 1), Err(Error::Singular(_))));
        assert!(matches!(fit_ar(&[1.0, 2.0, 3.0], 3), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn bic_values() {
        assert_eq!(bic(0.0, 10, 2), f64::NEG_INFINITY);
        let v = bic(10.0, 10, 2);
        assert!((v - 2.0 * 10f64.ln()).abs() < 1e-12);
        assert!((bic(10.0, 10, 4) - v - 2.0 * 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn differenced_fit_tags_d() {
        let x: Vec<f64> = (0..50).map(|t| (t as f64).sqrt() + 0.1 * ((t * 7) % 5) as f64).collect();
        let m = fit_ar_differenced(&x, 1, 1).unwrap();
        assert_eq!(m.differencing, 1);
        assert_eq!(m.n_obs, 48);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn selection_is_scale_invariant(seed in 0u64..1000, c in 0.01f64..100.0) {
            let x = simulate_ar(&mut make_rng(seed), 0.0, &[0.6], 1.0, 120, 20);
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            let a = select_ar_order(&x, &[0, 1, 2, 3]).unwrap();
            let b = select_ar_order(&scaled, &[0, 1, 2, 3]).unwrap();
            prop_assert_eq!(a.order, b.order);
            for (p, q) in a.coefficients.iter().zip(&b.coefficients) {
                prop_assert!((p - q).abs() < 1e-8);
            }
        }
    }
}
