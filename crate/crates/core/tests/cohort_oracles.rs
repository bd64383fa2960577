use homevenue::cohort::{
    jonckheere_terpstra, kruskal_wallis, kruskal_wallis_h, mann_whitney_u, mann_whitney_u_with,
    MannWhitneyOptions, TrendAlternative,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// U by direct pair counting.
fn pair_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided permutation p by enumerating every relabelling of the pooled sample.
fn permutation_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let mean = (a.len() * b.len()) as f64 / 2.0;
    let obs = (pair_u(a, b) - mean).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let (ga, gb): (Vec<f64>, Vec<f64>) = {
            let mut ga = Vec::new();
            let mut gb = Vec::new();
            for (i, v) in pooled.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    ga.push(*v);
                } else {
                    gb.push(*v);
                }
            }
            (ga, gb)
        };
        total += 1;
        if (pair_u(&ga, &gb) - mean).abs() >= obs - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

fn small_sample(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..6).prop_map(f64::from), 1..=max_len)
}

proptest! {
    #[test]
    fn exact_mann_whitney_matches_permutation_oracle(a in small_sample(6), b in small_sample(6)) {
        let r = mann_whitney_u(&a, &b).unwrap();
        prop_assert!(r.exact);
        prop_assert!((r.statistic - pair_u(&a, &b)).abs() < 1e-12);
        let oracle = permutation_p(&a, &b);
        prop_assert!((r.p_value - oracle).abs() < 1e-9, "{} vs {}", r.p_value, oracle);
    }

    #[test]
    fn u_statistics_are_complementary(a in prop::collection::vec(-5.0f64..5.0, 1..30), b in prop::collection::vec(-5.0f64..5.0, 1..30)) {
        let ua = mann_whitney_u(&a, &b).unwrap().statistic;
        let ub = mann_whitney_u(&b, &a).unwrap().statistic;
        prop_assert!((ua + ub - (a.len() * b.len()) as f64).abs() < 1e-9);
    }

    #[test]
    fn p_values_in_unit_interval_and_bonferroni_monotone(groups in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 1..8), 2..5)) {
        let r = kruskal_wallis(&groups).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p_value));
        let m = groups.len() * (groups.len() - 1) / 2;
        for c in r.posthoc.unwrap() {
            prop_assert!((0.0..=1.0).contains(&c.p_raw));
            prop_assert!(c.p_adjusted >= c.p_raw);
            prop_assert!((c.p_adjusted - (m as f64 * c.p_raw).min(1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn jonckheere_reversal_sums_to_cross_pairs(seed in any::<u64>(), sizes in prop::collection::vec(1usize..6, 3..6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // tie-free: a shuffled set of distinct values
        let n: usize = sizes.iter().sum();
        let mut values: Vec<f64> = (0..n).map(|i| i as f64).collect();
        for i in (1..n).rev() {
            values.swap(i, rng.random_range(0..=i));
        }
        let mut groups = Vec::new();
        let mut off = 0;
        for s in &sizes {
            groups.push(values[off..off + s].to_vec());
            off += s;
        }
        let fwd = jonckheere_terpstra(&groups, TrendAlternative::Increasing).unwrap().statistic;
        let rev: Vec<_> = groups.iter().rev().cloned().collect();
        let bwd = jonckheere_terpstra(&rev, TrendAlternative::Increasing).unwrap().statistic;
        let mut cross = 0usize;
        for i in 0..sizes.len() {
            for j in i + 1..sizes.len() {
                cross += sizes[i] * sizes[j];
            }
        }
        prop_assert!((fwd + bwd - cross as f64).abs() < 1e-9);
    }
}

#[test]
fn exact_and_normal_branches_agree_at_twenty() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let normal = MannWhitneyOptions {
        exact_max_product: 0,
        continuity_correction: true,
    };
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let shift = rng.random_range(0.0..1.5);
        let a: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..20).map(|_| rng.random::<f64>() + shift * 0.5).collect();
        let exact = mann_whitney_u(&a, &b).unwrap();
        let approx = mann_whitney_u_with(&a, &b, &normal).unwrap();
        assert!(exact.exact && !approx.exact);
        worst = worst.max((exact.p_value - approx.p_value).abs());
    }
    assert!(worst < 0.01, "max p difference {worst}");
}

#[test]
fn kruskal_wallis_null_rejection_rate_is_nominal() {
    // the chi-square reference is slightly conservative for small groups; 30 per group keeps it near 0.05
    let mut rng = ChaCha8Rng::seed_from_u64(20240);
    let trials = 10_000;
    let mut rejections = 0;
    for _ in 0..trials {
        let groups: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..30).map(|_| rng.random::<f64>()).collect())
            .collect();
        if kruskal_wallis_h(&groups).unwrap().p_value < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;
    let sigma = (0.05f64 * 0.95 / trials as f64).sqrt();
    assert!((rate - 0.05).abs() <= 3.0 * sigma, "rejection rate {rate}");
}
