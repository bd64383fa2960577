use homevenue::trajectory::{
    choose_k_elbow, ols_slope, ts_kmeans, NormalizedSeries, Pattern, SERIES_LEN,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn template(kind: usize) -> Vec<f64> {
    (0..SERIES_LEN)
        .map(|i| {
            let t = i as f64 / (SERIES_LEN - 1) as f64;
            match kind {
                0 => 1.5,
                1 => 1.0 + 0.6 * t,
                _ => 1.6 - 0.6 * t,
            }
        })
        .collect()
}

fn noisy_corpus(per_template: usize, sd: f64, seed: u64) -> (Vec<NormalizedSeries>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sd).unwrap();
    let mut series = Vec::new();
    let mut truth = Vec::new();
    for kind in 0..3 {
        for j in 0..per_template {
            let values = template(kind)
                .into_iter()
                .map(|v| v + noise.sample(&mut rng))
                .collect();
            series.push(NormalizedSeries {
                scholar_id: format!("t{kind}-{j:02}"),
                values,
                x_axis: vec![0.0; SERIES_LEN],
                n_imputed: 0,
            });
            truth.push(kind);
        }
    }
    (series, truth)
}

fn choose2(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two labelings.
fn adjusted_rand(a: &[usize], b: &[usize]) -> f64 {
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut table = vec![vec![0usize; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let index: f64 = table.iter().flatten().map(|&n| choose2(n)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..kb)
        .map(|c| choose2(table.iter().map(|r| r[c]).sum()))
        .sum();
    let expected = rows * cols / choose2(a.len());
    let max = 0.5 * (rows + cols);
    if max == expected {
        1.0
    } else {
        (index - expected) / (max - expected)
    }
}

fn labels_in_order(
    series: &[NormalizedSeries],
    model: &homevenue::trajectory::ClusterModel,
) -> Vec<usize> {
    series
        .iter()
        .map(|s| model.assignments[&s.scholar_id])
        .collect()
}

#[test]
fn recovers_templates_across_seeds() {
    let (series, truth) = noisy_corpus(20, 0.03, 99);
    for seed in 0..10 {
        let model = ts_kmeans(&series, 3, seed).unwrap();
        let ari = adjusted_rand(&truth, &labels_in_order(&series, &model));
        assert!(ari >= 0.95, "seed {seed}: ARI {ari}");
        let mut labels: Vec<Pattern> = model.labels.values().copied().collect();
        labels.sort();
        assert_eq!(
            labels,
            vec![Pattern::Stable, Pattern::Increasing, Pattern::Decreasing]
        );
    }
}

#[test]
fn elbow_picks_three_templates() {
    let (series, _) = noisy_corpus(20, 0.03, 5);
    for seed in [1, 2, 3] {
        assert_eq!(choose_k_elbow(&series, 1..=8, seed).unwrap(), 3);
    }
}

#[test]
fn single_blob_elbow_is_in_range_and_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noise = Normal::new(1.3, 0.1).unwrap();
    let series: Vec<_> = (0..40)
        .map(|i| NormalizedSeries {
            scholar_id: format!("b{i}"),
            values: (0..SERIES_LEN).map(|_| noise.sample(&mut rng)).collect(),
            x_axis: vec![0.0; SERIES_LEN],
            n_imputed: 0,
        })
        .collect();
    let k = choose_k_elbow(&series, 1..=6, 8).unwrap();
    assert!((1..=6).contains(&k));
    assert_eq!(choose_k_elbow(&series, 1..=6, 8).unwrap(), k);
}

#[test]
fn k1_centroid_is_pointwise_mean_and_assignments_are_nearest() {
    let (series, _) = noisy_corpus(10, 0.05, 12);
    let m1 = ts_kmeans(&series, 1, 0).unwrap();
    for t in 0..SERIES_LEN {
        let mean = series.iter().map(|s| s.values[t]).sum::<f64>() / series.len() as f64;
        assert!((m1.centroids[0][t] - mean).abs() < 1e-12);
    }
    let m = ts_kmeans(&series, 4, 3).unwrap();
    let mut inertia = 0.0;
    for s in &series {
        let d: Vec<f64> = m
            .centroids
            .iter()
            .map(|c| c.iter().zip(&s.values).map(|(a, b)| (a - b).powi(2)).sum())
            .collect();
        let assigned = m.assignments[&s.scholar_id];
        assert!(d.iter().all(|&x| d[assigned] <= x + 1e-12));
        inertia += d[assigned];
    }
    assert!((inertia - m.inertia).abs() < 1e-9 * inertia.max(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn order_of_input_does_not_matter(seed in 0u64..1000, rot in 0usize..30) {
        let (series, _) = noisy_corpus(10, 0.05, seed);
        let mut shuffled = series.clone();
        shuffled.rotate_left(rot);
        shuffled.reverse();
        let a = ts_kmeans(&series, 3, seed).unwrap();
        let b = ts_kmeans(&shuffled, 3, seed).unwrap();
        prop_assert_eq!(&a.centroids, &b.centroids);
        prop_assert_eq!(&a.assignments, &b.assignments);
    }

    #[test]
    fn slope_scales_linearly(c in 0.01f64..100.0, vals in prop::collection::vec(-5.0f64..5.0, SERIES_LEN)) {
        let scaled: Vec<f64> = vals.iter().map(|v| v * c).collect();
        let (s, sc) = (ols_slope(&vals), ols_slope(&scaled));
        prop_assert!((sc - c * s).abs() <= 1e-9 * (1.0 + (c * s).abs()));
    }
}
