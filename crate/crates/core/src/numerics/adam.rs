use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-7 }
    }
}

/// Moment buffers for the bias-corrected adaptive-moment update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(n_params: usize, config: AdamConfig) -> Result<Self> {
        let AdamConfig { learning_rate, beta1, beta2, epsilon } = config;
        if !(learning_rate > 0.0 && epsilon > 0.0 && (0.0..1.0).contains(&beta1) && beta1 > 0.0 && beta2 > 0.0 && beta2 < 1.0)
        {
            return Err(Error::InvalidArgument(format!("adam hyperparameters out of range: {config:?}")));
        }
        Ok(Self { first_moment: vec![0.0; n_params], second_moment: vec![0.0; n_params], step_count: 0, config })
    }
}

/// One update in place:
/// `m = b1 m + (1-b1) g`, `v = b2 v + (1-b2) g^2`,
/// `p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)`.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(Error::Shape(format!(
            "adam: {} params, {} grads, {} moment slots",
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    state.step_count += 1;
    let AdamConfig { learning_rate, beta1, beta2, epsilon } = state.config;
    let t = state.step_count as i32;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);
    for ((p, &g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first_moment.iter_mut().zip(state.second_moment.iter_mut()))
    {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(n: usize) -> AdamState {
        AdamState::new(n, AdamConfig::default()).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = state(3);
        let mut p = vec![1.0, -2.0, 0.5];
        adam_step(&mut s, &mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(s.step_count, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m_hat = 1, v_hat = 1, so the step is lr / (1 + eps).
        let mut s = state(1);
        let mut p = vec![1.0];
        adam_step(&mut s, &mut p, &[1.0]).unwrap();
        let expected = 1.0 - 0.001 / (1.0 + 1e-7);
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] - 0.999).abs() < 1e-9);
    }

    #[test]
    fn constant_gradient_decreases_monotonically() {
        let mut s = state(1);
        let mut p = vec![1.0];
        let mut prev = p[0];
        for _ in 0..100 {
            adam_step(&mut s, &mut p, &[1.0]).unwrap();
            assert!(p[0] < prev);
            prev = p[0];
        }
        assert_eq!(s.step_count, 100);
    }

    #[test]
    fn shape_mismatch() {
        let mut s = state(2);
        let mut p = vec![0.0; 3];
        assert!(adam_step(&mut s, &mut p, &[0.0; 3]).is_err());
        let mut p = vec![0.0; 2];
        assert!(adam_step(&mut s, &mut p, &[0.0; 1]).is_err());
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        let bad = AdamConfig { beta1: 1.0, ..AdamConfig::default() };
        assert!(AdamState::new(1, bad).is_err());
        let bad = AdamConfig { learning_rate: 0.0, ..AdamConfig::default() };
        assert!(AdamState::new(1, bad).is_err());
    }
}
