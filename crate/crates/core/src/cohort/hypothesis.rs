//! Rank-based and contingency hypothesis tests.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use super::{PairwiseComparison, StatsError, TestMethod, TestReport};

/// Tail direction for the Jonckheere–Terpstra test, in the a priori group order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendAlternative {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MannWhitneyOptions {
    /// Use exact enumeration when `n_a * n_b` is at most this.
    pub exact_max_product: usize,
    /// Apply a 0.5 continuity correction in the normal approximation.
    pub continuity_correction: bool,
}

impl Default for MannWhitneyOptions {
    fn default() -> Self {
        Self {
            exact_max_product: 10_000,
            continuity_correction: true,
        }
    }
}

/// `min(1, m·p)`.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m as f64).min(1.0)
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn upper_normal_tail(z: f64) -> f64 {
    standard_normal().sf(z)
}

fn check_sample(s: &[f64]) -> Result<(), StatsError> {
    if s.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if s.iter().any(|v| v.is_nan()) {
        return Err(StatsError::InvalidInput("sample contains NaN".into()));
    }
    Ok(())
}

/// Midranks of `values` (1-based) and the tie-group sizes.
pub(crate) fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

fn tie_sum(ties: &[usize]) -> f64 {
    ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum()
}

/// `U_a`: pairs with `a > b`, plus one half per tie.
fn u_statistic(a: &[f64], b: &[f64]) -> (f64, Vec<f64>, Vec<usize>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let n_a = a.len() as f64;
    let rank_sum: f64 = ranks[..a.len()].iter().sum();
    (rank_sum - n_a * (n_a + 1.0) / 2.0, ranks, ties)
}

/// Tie-corrected normal-approximation z for `U_a`, without continuity correction.
pub fn mann_whitney_z(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    check_sample(a)?;
    check_sample(b)?;
    let (u, _, ties) = u_statistic(a, b);
    let (n_a, n_b) = (a.len() as f64, b.len() as f64);
    let sd = mw_sd(n_a, n_b, &ties);
    Ok(if sd > 0.0 {
        (u - n_a * n_b / 2.0) / sd
    } else {
        0.0
    })
}

fn mw_sd(n_a: f64, n_b: f64, ties: &[usize]) -> f64 {
    let n = n_a + n_b;
    let var = n_a * n_b / 12.0 * ((n + 1.0) - tie_sum(ties) / (n * (n - 1.0)));
    var.max(0.0).sqrt()
}

/// Exact two-sided p under the permutation null, conditional on the observed
/// midranks. Counts size-`k` subsets of the pooled sample by rank sum.
fn mann_whitney_exact_p(ranks: &[f64], n_a: usize, u_a: f64) -> f64 {
    let n = ranks.len();
    let n_b = n - n_a;
    let k = n_a.min(n_b);
    // doubled midranks are integers
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = {
        let mut d = doubled.clone();
        d.sort_unstable_by(|x, y| y.cmp(x));
        d[..k].iter().sum()
    };
    let mut dp = vec![vec![0.0_f64; max_sum + 1]; k + 1];
    let mut reach = vec![0usize; k + 1];
    dp[0][0] = 1.0;
    for (i, &r) in doubled.iter().enumerate() {
        for j in (1..=k.min(i + 1)).rev() {
            let upto = reach[j - 1];
            let (lo, hi) = dp.split_at_mut(j);
            let (src, dst) = (&lo[j - 1], &mut hi[0]);
            for s in 0..=upto {
                let c = src[s];
                if c != 0.0 {
                    dst[s + r] += c;
                }
            }
            reach[j] = reach[j].max(upto + r).min(max_sum);
        }
    }
    let total: f64 = dp[k].iter().sum();
    // doubled U of the size-k side is 2·S - k(k+1) in doubled-rank units
    let mean2 = (n_a * n_b) as i64;
    let obs2 = (2.0 * u_a).round() as i64;
    let threshold = (obs2 - mean2).abs();
    let kk = (k * (k + 1)) as i64;
    let extreme: f64 = dp[k]
        .iter()
        .enumerate()
        .filter(|(s, c)| **c != 0.0 && ((*s as i64 - kk) - mean2).abs() >= threshold)
        .map(|(_, c)| c)
        .sum();
    (extreme / total).min(1.0)
}

/// Two-sided Mann–Whitney U test with default options.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestReport, StatsError> {
    mann_whitney_u_with(a, b, &MannWhitneyOptions::default())
}

/// Two-sided Mann–Whitney U test. The reported statistic is `U_a`.
pub fn mann_whitney_u_with(
    a: &[f64],
    b: &[f64],
    opts: &MannWhitneyOptions,
) -> Result<TestReport, StatsError> {
    check_sample(a)?;
    check_sample(b)?;
    let (u, ranks, ties) = u_statistic(a, b);
    let (n_a, n_b) = (a.len(), b.len());
    let exact = n_a * n_b <= opts.exact_max_product;
    let p_value = if exact {
        mann_whitney_exact_p(&ranks, n_a, u)
    } else {
        let sd = mw_sd(n_a as f64, n_b as f64, &ties);
        if sd == 0.0 {
            1.0
        } else {
            let mut dev = (u - (n_a * n_b) as f64 / 2.0).abs();
            if opts.continuity_correction {
                dev = (dev - 0.5).max(0.0);
            }
            (2.0 * upper_normal_tail(dev / sd)).min(1.0)
        }
    };
    Ok(TestReport {
        method: TestMethod::MannWhitneyU,
        statistic: u,
        p_value,
        df: None,
        exact,
        n_per_group: vec![n_a, n_b],
        posthoc: None,
    })
}

fn check_groups(groups: &[Vec<f64>], min: usize) -> Result<(), StatsError> {
    if groups.len() < min {
        return Err(StatsError::TooFewGroups {
            need: min,
            got: groups.len(),
        });
    }
    groups.iter().try_for_each(|g| check_sample(g))
}

/// Kruskal–Wallis H without post-hoc comparisons.
pub fn kruskal_wallis_h(groups: &[Vec<f64>]) -> Result<TestReport, StatsError> {
    check_groups(groups, 2)?;
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let (ranks, ties) = midranks(&pooled);
    let mut offset = 0;
    let mut sum_term = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum_term += r * r / g.len() as f64;
        offset += g.len();
    }
    let raw = 12.0 / (n * (n + 1.0)) * sum_term - 3.0 * (n + 1.0);
    let correction = 1.0 - tie_sum(&ties) / (n * n * n - n);
    let h = if correction > 0.0 {
        (raw / correction).max(0.0)
    } else {
        0.0
    };
    let df = (groups.len() - 1) as f64;
    let p_value = if h == 0.0 {
        1.0
    } else {
        ChiSquared::new(df).expect("df >= 1").sf(h)
    };
    Ok(TestReport {
        method: TestMethod::KruskalWallisH,
        statistic: h,
        p_value,
        df: Some(df),
        exact: false,
        n_per_group: groups.iter().map(Vec::len).collect(),
        posthoc: None,
    })
}

/// Kruskal–Wallis H with pairwise Mann–Whitney post-hoc tests,
/// Bonferroni-adjusted over `g(g-1)/2` comparisons.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestReport, StatsError> {
    let mut report = kruskal_wallis_h(groups)?;
    let g = groups.len();
    let m = g * (g - 1) / 2;
    let mut posthoc = Vec::with_capacity(m);
    for i in 0..g {
        for j in i + 1..g {
            let p = mann_whitney_u(&groups[i], &groups[j])?.p_value;
            posthoc.push(PairwiseComparison {
                group_i: i,
                group_j: j,
                p_raw: p,
                p_adjusted: bonferroni(p, m),
            });
        }
    }
    report.posthoc = Some(posthoc);
    Ok(report)
}

/// Which margins the χ² post-hoc pairs up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PosthocPairing {
    #[default]
    Rows,
    Columns,
}

fn pearson_chi_square(table: &[Vec<u64>]) -> Result<(f64, f64), StatsError> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 || table.iter().any(|r| r.len() != cols) {
        return Err(StatsError::InvalidInput(
            "contingency table must be rectangular and at least 2x2".into(),
        ));
    }
    let row_tot: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_tot: Vec<f64> = (0..cols)
        .map(|c| table.iter().map(|r| r[c]).sum::<u64>() as f64)
        .collect();
    if row_tot.iter().chain(&col_tot).any(|&t| t == 0.0) {
        return Err(StatsError::ZeroMarginal);
    }
    let total: f64 = row_tot.iter().sum();
    let mut stat = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let expected = row_tot[i] * col_tot[j] / total;
            stat += (obs as f64 - expected).powi(2) / expected;
        }
    }
    Ok((stat, ((rows - 1) * (cols - 1)) as f64))
}

fn chi_square_p(stat: f64, df: f64) -> f64 {
    ChiSquared::new(df).expect("df >= 1").sf(stat)
}

/// Pairwise 2×c (or r×2) sub-table tests, Bonferroni-adjusted. Categories
/// empty within a pair are dropped; a pair left with one category gets p = 1.
pub fn chi_square_posthoc(
    table: &[Vec<u64>],
    pairing: PosthocPairing,
) -> Result<Vec<PairwiseComparison>, StatsError> {
    pearson_chi_square(table)?;
    let oriented: Vec<Vec<u64>> = match pairing {
        PosthocPairing::Rows => table.to_vec(),
        PosthocPairing::Columns => (0..table[0].len())
            .map(|c| table.iter().map(|r| r[c]).collect())
            .collect(),
    };
    let g = oriented.len();
    let m = g * (g - 1) / 2;
    let mut out = Vec::with_capacity(m);
    for i in 0..g {
        for j in i + 1..g {
            let keep: Vec<usize> = (0..oriented[i].len())
                .filter(|&c| oriented[i][c] + oriented[j][c] > 0)
                .collect();
            let p = if keep.len() < 2 {
                1.0
            } else {
                let sub = vec![
                    keep.iter().map(|&c| oriented[i][c]).collect(),
                    keep.iter().map(|&c| oriented[j][c]).collect(),
                ];
                let (stat, df) = pearson_chi_square(&sub)?;
                chi_square_p(stat, df)
            };
            out.push(PairwiseComparison {
                group_i: i,
                group_j: j,
                p_raw: p,
                p_adjusted: bonferroni(p, m),
            });
        }
    }
    Ok(out)
}

/// Pearson χ² test of independence with row-pair post-hoc tests.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<TestReport, StatsError> {
    let (stat, df) = pearson_chi_square(table)?;
    Ok(TestReport {
        method: TestMethod::ChiSquare,
        statistic: stat,
        p_value: chi_square_p(stat, df),
        df: Some(df),
        exact: false,
        n_per_group: table
            .iter()
            .map(|r| r.iter().sum::<u64>() as usize)
            .collect(),
        posthoc: Some(chi_square_posthoc(table, PosthocPairing::Rows)?),
    })
}

/// Jonckheere–Terpstra trend test over groups in their a priori order.
///
/// `JT = Σ_{i<j} #{x ∈ G_i, y ∈ G_j : x < y}` with ties counting one half;
/// one-sided p from the tie-corrected normal approximation.
pub fn jonckheere_terpstra(
    groups: &[Vec<f64>],
    alternative: TrendAlternative,
) -> Result<TestReport, StatsError> {
    check_groups(groups, 3)?;
    let mut jt = 0.0;
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            for x in &groups[i] {
                for y in &groups[j] {
                    if x < y {
                        jt += 1.0;
                    } else if x == y {
                        jt += 0.5;
                    }
                }
            }
        }
    }
    let sizes: Vec<f64> = groups.iter().map(|g| g.len() as f64).collect();
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let (_, ties) = midranks(&pooled);
    let t: Vec<f64> = ties.iter().map(|&t| t as f64).collect();
    let n = pooled.len() as f64;
    let mean = (n * n - sizes.iter().map(|s| s * s).sum::<f64>()) / 4.0;
    let f1 = |v: &[f64]| {
        v.iter()
            .map(|s| s * (s - 1.0) * (2.0 * s + 5.0))
            .sum::<f64>()
    };
    let f2 = |v: &[f64]| v.iter().map(|s| s * (s - 1.0) * (s - 2.0)).sum::<f64>();
    let f3 = |v: &[f64]| v.iter().map(|s| s * (s - 1.0)).sum::<f64>();
    let mut var = (n * (n - 1.0) * (2.0 * n + 5.0) - f1(&sizes) - f1(&t)) / 72.0;
    if n > 2.0 {
        var += f2(&sizes) * f2(&t) / (36.0 * n * (n - 1.0) * (n - 2.0));
    }
    var += f3(&sizes) * f3(&t) / (8.0 * n * (n - 1.0));
    let p_value = if var <= 1e-12 {
        1.0
    } else {
        let z = (jt - mean) / var.sqrt();
        match alternative {
            TrendAlternative::Increasing => upper_normal_tail(z),
            TrendAlternative::Decreasing => standard_normal().cdf(z),
        }
    };
    Ok(TestReport {
        method: TestMethod::JonckheereTerpstra,
        statistic: jt,
        p_value,
        df: None,
        exact: false,
        n_per_group: groups.iter().map(Vec::len).collect(),
        posthoc: None,
    })
}

/// Pooled-variance two-sample t test, two-sided.
pub fn two_sample_t(a: &[f64], b: &[f64]) -> Result<TestReport, StatsError> {
    check_sample(a)?;
    check_sample(b)?;
    if a.len() + b.len() < 3 {
        return Err(StatsError::InvalidInput(
            "t test needs at least 3 observations".into(),
        ));
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let ss = |s: &[f64], m: f64| s.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    let (ma, mb) = (mean(a), mean(b));
    let df = (a.len() + b.len() - 2) as f64;
    let pooled = (ss(a, ma) + ss(b, mb)) / df;
    let se = (pooled * (1.0 / a.len() as f64 + 1.0 / b.len() as f64)).sqrt();
    let (t, p_value) = if se > 0.0 {
        let t = (ma - mb) / se;
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (t, (2.0 * dist.sf(t.abs())).min(1.0))
    } else {
        (0.0, if ma == mb { 1.0 } else { 0.0 })
    };
    Ok(TestReport {
        method: TestMethod::StudentT,
        statistic: t,
        p_value,
        df: Some(df),
        exact: false,
        n_per_group: vec![a.len(), b.len()],
        posthoc: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_triples_exact_p() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.exact);
        assert!((r.p_value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.statistic, 8.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn u_statistics_sum_to_product() {
        let a = [3.1, 0.2, 5.5, 2.2, 2.2];
        let b = [1.0, 2.2, 7.0];
        let ua = mann_whitney_u(&a, &b).unwrap().statistic;
        let ub = mann_whitney_u(&b, &a).unwrap().statistic;
        assert_eq!(ua + ub, 15.0);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert_eq!(
            mann_whitney_u(&[], &[1.0]).unwrap_err(),
            StatsError::EmptySample
        );
    }

    #[test]
    fn normal_branch_when_large() {
        let a: Vec<f64> = (0..120).map(f64::from).collect();
        let b: Vec<f64> = (0..100).map(|i| f64::from(i) + 30.5).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(!r.exact);
        assert!(r.p_value > 0.0 && r.p_value < 0.05);
    }

    #[test]
    fn kruskal_identical_groups() {
        let g = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]];
        let r = kruskal_wallis(&g).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-9);
        let post = r.posthoc.unwrap();
        assert_eq!(post.len(), 1);
        assert!(post[0].p_adjusted >= post[0].p_raw);
    }

    #[test]
    fn kruskal_two_groups_equals_squared_z() {
        let a = vec![1.0, 2.0, 3.0];
        let b = vec![4.0, 5.0, 6.0];
        let h = kruskal_wallis_h(&[a.clone(), b.clone()]).unwrap().statistic;
        let z = mann_whitney_z(&a, &b).unwrap();
        assert!((h - z * z).abs() < 1e-12, "{h} vs {}", z * z);
        let a = vec![1.0, 2.0, 2.0, 7.0];
        let b = vec![2.0, 5.0, 6.0, 6.0, 9.0];
        let h = kruskal_wallis_h(&[a.clone(), b.clone()]).unwrap().statistic;
        let z = mann_whitney_z(&a, &b).unwrap();
        assert!((h - z * z).abs() < 1e-12);
    }

    #[test]
    fn kruskal_needs_two_groups() {
        assert!(matches!(
            kruskal_wallis(&[vec![1.0]]),
            Err(StatsError::TooFewGroups { need: 2, got: 1 })
        ));
    }

    #[test]
    fn chi_square_examples() {
        let r = chi_square_independence(&[vec![10, 10], vec![10, 10]]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = chi_square_independence(&[vec![20, 0], vec![0, 20]]).unwrap();
        assert!((r.statistic - 40.0).abs() < 1e-12);
        assert_eq!(r.df, Some(1.0));
    }

    #[test]
    fn chi_square_quartile_shaped_table() {
        let table = vec![
            vec![392, 35687],
            vec![194, 30375],
            vec![171, 8822],
            vec![134, 7105],
        ];
        let r = chi_square_independence(&table).unwrap();
        assert_eq!(r.df, Some(3.0));
        assert_eq!(r.posthoc.as_ref().unwrap().len(), 6);
        let cols = chi_square_posthoc(&table, PosthocPairing::Columns).unwrap();
        assert_eq!(cols.len(), 1);
    }

    #[test]
    fn chi_square_zero_marginal() {
        assert_eq!(
            chi_square_independence(&[vec![0, 0], vec![1, 2]]).unwrap_err(),
            StatsError::ZeroMarginal
        );
    }

    #[test]
    fn jonckheere_examples() {
        let g = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        let up = jonckheere_terpstra(&g, TrendAlternative::Increasing).unwrap();
        assert_eq!(up.statistic, 12.0);
        let rev: Vec<_> = g.iter().rev().cloned().collect();
        let down = jonckheere_terpstra(&rev, TrendAlternative::Increasing).unwrap();
        assert_eq!(down.statistic, 0.0);
        assert!(up.p_value < down.p_value);
        let flat = vec![vec![3.0, 3.0], vec![3.0, 3.0], vec![3.0, 3.0]];
        let r = jonckheere_terpstra(&flat, TrendAlternative::Increasing).unwrap();
        assert_eq!(r.statistic, 6.0);
        assert_eq!(r.p_value, 1.0);
        assert!(jonckheere_terpstra(&g[..2], TrendAlternative::Increasing).is_err());
    }

    #[test]
    fn jonckheere_smallest_p_at_maximum() {
        // every other arrangement of 1..6 into sizes (2,2,2) has JT < 12
        let g = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        let best = jonckheere_terpstra(&g, TrendAlternative::Increasing)
            .unwrap()
            .p_value;
        let other = vec![vec![1.0, 3.0], vec![2.0, 4.0], vec![5.0, 6.0]];
        assert!(
            jonckheere_terpstra(&other, TrendAlternative::Increasing)
                .unwrap()
                .p_value
                > best
        );
    }

    #[test]
    fn t_test_basics() {
        let r = two_sample_t(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = two_sample_t(&[0.9, 0.95, 0.92, 0.97], &[0.4, 0.45, 0.38, 0.41]).unwrap();
        assert!(r.p_value < 1e-4);
    }

    #[test]
    fn midranks_average_ties() {
        let (r, t) = midranks(&[10.0, 20.0, 10.0, 30.0]);
        assert_eq!(r, vec![1.5, 3.0, 1.5, 4.0]);
        assert_eq!(t, vec![2, 1, 1]);
    }
}
