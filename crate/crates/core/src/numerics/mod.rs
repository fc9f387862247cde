//! Deterministic numerical kernels shared by the models.

mod adam;
mod gradcheck;
mod linalg;
mod rng;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::finite_diff_gradient;
pub use linalg::{hadamard, matvec, Matrix};
pub(crate) use linalg::{axpy, dot};
pub use rng::{make_rng, Rng};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    Tanh,
    Linear,
}

impl Activation {
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn activation_apply(kind: Activation, v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| kind.eval(x)).collect()
}

/// Glorot-uniform weights: entries uniform in `[-L, L]`, `L = sqrt(6 / (rows + cols))`.
pub fn glorot_init(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let mut m = Matrix::zeros(rows, cols);
    for v in m.as_mut_slice() {
        *v = rng.uniform_range(-limit, limit);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(0.5) - 0.622459).abs() < 1e-6);
        assert_eq!(Activation::Tanh.eval(0.0), 0.0);
        assert_eq!(activation_apply(Activation::Linear, &[1.5, -2.0]), vec![1.5, -2.0]);
    }

    #[test]
    fn saturation_is_finite() {
        for x in [-1e6, -800.0, 800.0, 1e6] {
            let s = sigmoid(x);
            assert!(s.is_finite() && (0.0..=1.0).contains(&s));
            assert!(x.tanh().is_finite());
        }
    }

    #[test]
    fn glorot_bounds_and_determinism() {
        let mut rng = make_rng(5);
        let m = glorot_init(&mut rng, 2, 4);
        assert!(m.as_slice().iter().all(|v| v.abs() <= 1.0));
        let again = glorot_init(&mut make_rng(5), 2, 4);
        assert_eq!(m, again);
    }

    #[test]
    fn glorot_mean_near_zero() {
        let mut rng = make_rng(9);
        let mut sum = 0.0;
        let mut count = 0;
        while count < 10_000 {
            let m = glorot_init(&mut rng, 3, 3);
            sum += m.as_slice().iter().sum::<f64>();
            count += 9;
        }
        let mean = sum / count as f64;
        assert!(mean.abs() <= 0.02, "mean {mean}");
    }

    proptest! {
        #[test]
        fn sigmoid_symmetry(x in -30.0f64..30.0) {
            prop_assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() <= 1e-12);
            let s = sigmoid(x);
            prop_assert!(s > 0.0 && s < 1.0);
        }
    }
}
