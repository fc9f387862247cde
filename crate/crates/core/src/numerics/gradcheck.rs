/// Central-difference gradient of `loss` at `params`, one coordinate at a time.
pub fn finite_diff_gradient<F>(mut loss: F, params: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = params.to_vec();
    (0..params.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = loss(&probe);
            probe[i] = orig - h;
            let down = loss(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square() {
        let g = finite_diff_gradient(|p| p[0] * p[0], &[3.0], 1e-5);
        assert!((g[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn constant_and_linear() {
        let g = finite_diff_gradient(|_| 4.2, &[1.0, 2.0], 1e-5);
        assert_eq!(g, vec![0.0, 0.0]);
        let g = finite_diff_gradient(|p| p.iter().sum(), &[1.0, -7.0, 3.5], 1e-5);
        for v in g {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn cubic_polynomials(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0, x in -2.0f64..2.0) {
            let f = |p: &[f64]| a * p[0].powi(3) + b * p[0] * p[0] + c * p[0] + d;
            let exact = 3.0 * a * x * x + 2.0 * b * x + c;
            let g = finite_diff_gradient(f, &[x], 1e-5)[0];
            prop_assert!((g - exact).abs() <= 1e-6 * exact.abs().max(1.0));
        }
    }
}
