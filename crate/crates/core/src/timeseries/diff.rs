use crate::error::{Error, Result};

/// `d`-fold first differences; the result is `d` values shorter.
pub fn difference(series: &[f64], d: usize) -> Result<Vec<f64>> {
    if series.len() <= d {
        return Err(Error::InsufficientData(format!("cannot difference {} values {d} times", series.len())));
    }
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// First element of each of the 0..d-fold differenced versions of `series`,
/// i.e. the anchors [`inverse_difference`] needs to rebuild it.
pub fn difference_anchors(series: &[f64], d: usize) -> Result<Vec<f64>> {
    (0..d).map(|k| difference(series, k).map(|v| v[0])).collect()
}

/// Rebuilds levels from `d`-fold differences, `d = anchors.len()`.
/// `anchors[k]` is the first value of the `k`-fold differenced series; the
/// result starts with the anchored levels, so
/// `inverse_difference(&difference(x, 1)?, &[x[0]]) == x`.
pub fn inverse_difference(diffs: &[f64], anchors: &[f64]) -> Result<Vec<f64>> {
    if anchors.is_empty() {
        return Ok(diffs.to_vec());
    }
    if anchors.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite("differencing anchor".into()));
    }
    let mut current = diffs.to_vec();
    for &anchor in anchors.iter().rev() {
        let mut level = Vec::with_capacity(current.len() + 1);
        let mut acc = anchor;
        level.push(acc);
        for v in current {
            acc += v;
            level.push(acc);
        }
        current = level;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_rng;

    #[test]
    fn hand_differences() {
        assert_eq!(difference(&[1.0, 2.0, 4.0, 7.0], 1).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(difference(&[3.0; 5], 1).unwrap(), vec![0.0; 4]);
        assert_eq!(difference(&[1.0, 2.0], 0).unwrap(), vec![1.0, 2.0]);
        assert_eq!(difference(&[1.0, 2.0, 4.0, 7.0], 2).unwrap(), vec![1.0, 1.0]);
        assert!(difference(&[1.0], 1).is_err());
    }

    #[test]
    fn exact_round_trip() {
        let x = [1.0, 2.0, 4.0, 7.0];
        assert_eq!(inverse_difference(&difference(&x, 1).unwrap(), &[x[0]]).unwrap(), x.to_vec());
        assert_eq!(inverse_difference(&[0.0; 3], &[5.0]).unwrap(), vec![5.0; 4]);
        let a2 = difference_anchors(&x, 2).unwrap();
        assert_eq!(inverse_difference(&difference(&x, 2).unwrap(), &a2).unwrap(), x.to_vec());
    }

    #[test]
    fn no_anchors_is_identity() {
        assert_eq!(inverse_difference(&[1.0, 2.0], &[]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn random_round_trip() {
        let mut rng = make_rng(21);
        for d in 1..=2 {
            let x: Vec<f64> = (0..200).map(|_| rng.normal()).collect();
            let back = inverse_difference(&difference(&x, d).unwrap(), &difference_anchors(&x, d).unwrap()).unwrap();
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
        }
    }
}
