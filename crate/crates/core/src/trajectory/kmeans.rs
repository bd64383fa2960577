//! Lloyd's k-means with k-means++ seeding on equal-length vectors.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansOptions {
    pub max_iter: usize,
    /// Independent k-means++ restarts; the lowest-inertia run is kept.
    pub n_init: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            max_iter: 300,
            n_init: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index per input row, in input order.
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(data: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![data[rng.random_range(0..data.len())].to_vec()];
    let mut d2: Vec<f64> = data.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = data.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            // fewer distinct points than k; duplicates are harmless
            rng.random_range(0..data.len())
        };
        let c = data[pick].to_vec();
        for (d, p) in d2.iter_mut().zip(data) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(data: &[&[f64]], mut centroids: Vec<Vec<f64>>, max_iter: usize) -> KMeansFit {
    let k = centroids.len();
    let dim = data[0].len();
    let mut assignments = vec![usize::MAX; data.len()];
    let mut iterations = 0;
    let mut last_inertia = f64::INFINITY;
    loop {
        let mut changed = false;
        let mut inertia = 0.0;
        let mut dists = vec![0.0; data.len()];
        for (i, p) in data.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            if c != assignments[i] {
                assignments[i] = c;
                changed = true;
            }
            dists[i] = d;
            inertia += d;
        }
        debug_assert!(
            inertia <= last_inertia * (1.0 + 1e-12) + 1e-12,
            "inertia rose from {last_inertia} to {inertia}"
        );
        last_inertia = inertia;
        if !changed || iterations >= max_iter {
            break;
        }
        iterations += 1;

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in data.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        let mut taken = vec![false; data.len()];
        for c in 0..k {
            if counts[c] == 0 {
                // reseed an empty cluster with the worst-served point
                let far = (0..data.len())
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .expect("k <= n");
                taken[far] = true;
                centroids[c] = data[far].to_vec();
                dists[far] = 0.0;
            } else {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    KMeansFit {
        centroids,
        assignments,
        inertia: last_inertia,
        iterations,
    }
}

/// Clusters `data` into `k` groups. Results depend only on the multiset of
/// rows and the seed: rows are put in canonical order before seeding and
/// clusters are relabelled by lexicographic centroid order.
pub fn kmeans(data: &[Vec<f64>], k: usize, seed: u64, opts: &KMeansOptions) -> KMeansFit {
    assert!(k >= 1 && k <= data.len(), "need 1 <= k <= n");
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&data[a], &data[b]));
    let canonical: Vec<&[f64]> = order.iter().map(|&i| data[i].as_slice()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..opts.n_init.max(1) {
        let init = plus_plus_init(&canonical, k, &mut rng);
        let fit = lloyd(&canonical, init, opts.max_iter);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    let fit = best.expect("at least one run");

    let mut relabel: Vec<usize> = (0..k).collect();
    relabel.sort_by(|&a, &b| lex_cmp(&fit.centroids[a], &fit.centroids[b]));
    let mut new_index = vec![0; k];
    for (new, &old) in relabel.iter().enumerate() {
        new_index[old] = new;
    }
    let centroids = relabel
        .iter()
        .map(|&old| fit.centroids[old].clone())
        .collect();
    let mut assignments = vec![0; data.len()];
    for (pos, &orig) in order.iter().enumerate() {
        assignments[orig] = new_index[fit.assignments[pos]];
    }
    KMeansFit {
        centroids,
        assignments,
        inertia: fit.inertia,
        iterations: fit.iterations,
    }
}
