use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::erf::erfc;

use super::ResolvedLoan;
use crate::error::{Error, Result};

/// Pooled sizes up to this use the exact null distribution.
pub const EXACT_MAX_POOLED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankSumMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankSumResult {
    /// Mann-Whitney U for the first sample.
    pub statistic: f64,
    pub p_value: f64,
    pub method: RankSumMethod,
}

/// Midranks of the pooled sample, in input order.
fn midranks(pooled: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

/// Two-sided Wilcoxon rank-sum test. Exact null distribution over all
/// `C(n_a + n_b, n_a)` rank assignments (midranks for ties) when the pooled
/// size is at most 20; otherwise the tie-corrected normal approximation with
/// continuity correction.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<RankSumResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("rank-sum test needs two nonempty samples".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("rank-sum sample".into()));
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;

    if n <= EXACT_MAX_POOLED {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let p = exact_two_sided(&doubled, na, doubled[..na].iter().sum());
        return Ok(RankSumResult { statistic: u, p_value: p, method: RankSumMethod::Exact });
    }

    let mut tie_term = 0.0;
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let (naf, nbf, nf) = (na as f64, nb as f64, n as f64);
    let mean = naf * nbf / 2.0;
    let var = naf * nbf / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).min(1.0)
    };
    Ok(RankSumResult { statistic: u, p_value: p, method: RankSumMethod::Normal })
}

/// P(|S - E[S]| >= |s_obs - E[S]|) where S is the (doubled) rank sum of a
/// uniformly random size-`k` subset of `doubled_ranks`.
fn exact_two_sided(doubled_ranks: &[usize], k: usize, observed: usize) -> f64 {
    let max_sum: usize = doubled_ranks.iter().sum();
    // counts[j][s]: number of j-subsets with doubled rank sum s
    let mut counts = vec![vec![0u64; max_sum + 1]; k + 1];
    counts[0][0] = 1;
    for &r in doubled_ranks {
        for j in (1..=k).rev() {
            for s in (r..=max_sum).rev() {
                counts[j][s] += counts[j - 1][s - r];
            }
        }
    }
    let total: u64 = counts[k].iter().sum();
    // Midranks preserve the total, so the expected doubled sum k(N+1) is integral.
    let centre = k * max_sum / doubled_ranks.len();
    let dev = |s: usize| s.abs_diff(centre);
    let obs_dev = dev(observed);
    let extreme: u64 = counts[k].iter().enumerate().filter(|(s, _)| dev(*s) >= obs_dev).map(|(_, c)| *c).sum();
    extreme as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPairTest {
    pub column: String,
    pub level_a: String,
    pub level_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub default_rate_a: f64,
    pub default_rate_b: f64,
    pub statistic: f64,
    pub p_value: f64,
}

/// Rank-sum tests of the loan-level default indicator between every pair of
/// observed levels of a categorical column. Loans with the level missing are
/// skipped.
pub fn pairwise_level_tests(loans: &[ResolvedLoan], column: &str) -> Result<Vec<LevelPairTest>> {
    let mut by_level: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for loan in loans {
        if let Some(Some(level)) = loan.record.categorical.get(column) {
            by_level.entry(level.as_str()).or_default().push(f64::from(loan.target));
        }
    }
    let levels: Vec<(&str, Vec<f64>)> = by_level.into_iter().collect();
    let mut out = Vec::new();
    for i in 0..levels.len() {
        for j in i + 1..levels.len() {
            let (la, a) = &levels[i];
            let (lb, b) = &levels[j];
            let r = wilcoxon_rank_sum(a, b)?;
            out.push(LevelPairTest {
                column: column.to_string(),
                level_a: la.to_string(),
                level_b: lb.to_string(),
                n_a: a.len(),
                n_b: b.len(),
                default_rate_a: a.iter().sum::<f64>() / a.len() as f64,
                default_rate_b: b.iter().sum::<f64>() / b.len() as f64,
                statistic: r.statistic,
                p_value: r.p_value,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force enumeration of all subsets, independent of the DP.
    fn enumerate_p(a: &[f64], b: &[f64]) -> f64 {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let ranks = midranks(&pooled);
        let n = pooled.len();
        let k = a.len();
        let mean = k as f64 * (n as f64 + 1.0) / 2.0;
        let obs: f64 = ranks[..k].iter().sum();
        let (mut hits, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            total += 1;
            let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
            if (s - mean).abs() >= (obs - mean).abs() - 1e-9 {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    }

    #[test]
    fn disjoint_three_vs_three() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.method, RankSumMethod::Exact);
        assert!((r.p_value - 0.1).abs() < 1e-15);
        assert!((enumerate_p(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = wilcoxon_rank_sum(&a, &a).unwrap();
        assert!(r.p_value >= 0.99);
    }

    #[test]
    fn empty_sample_is_error() {
        assert!(wilcoxon_rank_sum(&[], &[1.0]).is_err());
        assert!(wilcoxon_rank_sum(&[1.0], &[]).is_err());
    }

    #[test]
    fn midranks_with_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn normal_approximation_large_samples() {
        let a: Vec<f64> = (0..30).map(f64::from).collect();
        let b: Vec<f64> = (0..30).map(|i| f64::from(i) + 100.0).collect();
        let r = wilcoxon_rank_sum(&a, &b).unwrap();
        assert_eq!(r.method, RankSumMethod::Normal);
        assert!(r.p_value < 1e-9);
        let same = wilcoxon_rank_sum(&a, &a).unwrap();
        assert!(same.p_value > 0.99);
    }

    #[test]
    fn binary_samples_with_heavy_ties() {
        let a = vec![0.0; 40].into_iter().chain(vec![1.0; 10]).collect::<Vec<_>>();
        let b = vec![0.0; 25].into_iter().chain(vec![1.0; 25]).collect::<Vec<_>>();
        let r = wilcoxon_rank_sum(&a, &b).unwrap();
        assert!(r.p_value < 0.01, "{r:?}");
    }

    proptest! {
        #[test]
        fn exact_matches_enumeration(a in prop::collection::vec(0u8..6, 1..7), b in prop::collection::vec(0u8..6, 1..7)) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let r = wilcoxon_rank_sum(&a, &b).unwrap();
            prop_assert!((r.p_value - enumerate_p(&a, &b)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }

        #[test]
        fn swap_symmetry(a in prop::collection::vec(-5.0f64..5.0, 1..15), b in prop::collection::vec(-5.0f64..5.0, 1..15)) {
            let ab = wilcoxon_rank_sum(&a, &b).unwrap();
            let ba = wilcoxon_rank_sum(&b, &a).unwrap();
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        }

        #[test]
        fn monotone_invariance(a in prop::collection::vec(-3.0f64..3.0, 1..15), b in prop::collection::vec(-3.0f64..3.0, 1..15)) {
            let t = |v: &[f64]| v.iter().map(|x| x.exp() * 3.0 + 1.0).collect::<Vec<_>>();
            let r1 = wilcoxon_rank_sum(&a, &b).unwrap();
            let r2 = wilcoxon_rank_sum(&t(&a), &t(&b)).unwrap();
            prop_assert_eq!(r1.p_value, r2.p_value);
        }
    }
}
