//! Fixed-length α series, time-series k-means, and cluster shape labels.

mod kmeans;

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::homevenue::AlphaTrajectory;
pub use kmeans::{kmeans, KMeansFit, KMeansOptions};

/// Points per clustered series.
pub const SERIES_LEN: usize = 30;

/// Default slope threshold (α units per publication) for pattern labels.
pub const DEFAULT_TAU: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("need at least {k} series for k = {k}, got {n}")]
    TooFewSeries { k: usize, n: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k range {start}..={end} needs at least 3 values and must fit in 1..={n}")]
    InvalidRange { start: usize, end: usize, n: usize },
    #[error("series {index} has length {len}, expected {expected}")]
    RaggedSeries {
        index: usize,
        len: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooShort,
    NoValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSeries {
    pub scholar_id: String,
    pub values: Vec<f64>,
    /// Publication index over career length for each point; plotting only.
    pub x_axis: Vec<f64>,
    /// Points filled in by interpolation.
    pub n_imputed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SeriesOutcome {
    Accepted(NormalizedSeries),
    Rejected {
        scholar_id: String,
        reason: RejectReason,
        len: usize,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SeriesOptions {
    /// Standardize each series to zero mean and unit variance.
    pub z_normalize: bool,
}

/// Fills gaps by linear interpolation between present neighbours; leading
/// and trailing gaps copy the nearest present value.
pub fn impute(values: &[Option<f64>]) -> Option<Vec<f64>> {
    let present: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    let (&first, &last) = (present.first()?, present.last()?);
    let mut out = vec![0.0; values.len()];
    for i in 0..values.len() {
        out[i] = if let Some(v) = values[i] {
            v
        } else if i < first {
            values[first].unwrap()
        } else if i > last {
            values[last].unwrap()
        } else {
            let lo = present[present.partition_point(|&p| p < i) - 1];
            let hi = present[present.partition_point(|&p| p < i)];
            let (a, b) = (values[lo].unwrap(), values[hi].unwrap());
            a + (b - a) * (i - lo) as f64 / (hi - lo) as f64
        };
    }
    Some(out)
}

fn z_normalize(values: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    // rounding leaves a tiny spread on constant input
    let flat = sd <= 1e-12 * mean.abs().max(1.0);
    for v in values.iter_mut() {
        *v = if flat { 0.0 } else { (*v - mean) / sd };
    }
}

/// First [`SERIES_LEN`] α values of a trajectory, gaps imputed.
pub fn extract_normalized_series(traj: &AlphaTrajectory, opts: &SeriesOptions) -> SeriesOutcome {
    let reject = |reason| SeriesOutcome::Rejected {
        scholar_id: traj.scholar_id.clone(),
        reason,
        len: traj.values.len(),
    };
    if traj.values.len() < SERIES_LEN {
        return reject(RejectReason::TooShort);
    }
    let Some(filled) = impute(&traj.values) else {
        return reject(RejectReason::NoValues);
    };
    let mut values = filled[..SERIES_LEN].to_vec();
    if opts.z_normalize {
        z_normalize(&mut values);
    }
    let total = traj.total_pubs.max(1) as f64;
    SeriesOutcome::Accepted(NormalizedSeries {
        scholar_id: traj.scholar_id.clone(),
        values,
        x_axis: (0..SERIES_LEN)
            .map(|i| (traj.emergence_seq + i) as f64 / total)
            .collect(),
        n_imputed: traj.values[..SERIES_LEN]
            .iter()
            .filter(|v| v.is_none())
            .count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Stable,
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub seed: u64,
    pub centroids: Vec<Vec<f64>>,
    /// Pointwise standard deviation of each cluster's members.
    pub spread: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    pub assignments: BTreeMap<String, usize>,
    pub inertia: f64,
    pub labels: BTreeMap<usize, Pattern>,
}

impl ClusterModel {
    /// Cluster sizes as percentages of all assigned series.
    pub fn shares(&self) -> Vec<f64> {
        let n: usize = self.sizes.iter().sum();
        self.sizes
            .iter()
            .map(|&s| 100.0 * s as f64 / n.max(1) as f64)
            .collect()
    }
}

fn check_series(series: &[NormalizedSeries]) -> Result<(), ClusterError> {
    let expected = series.first().map_or(SERIES_LEN, |s| s.values.len());
    match series.iter().position(|s| s.values.len() != expected) {
        Some(index) => Err(ClusterError::RaggedSeries {
            index,
            len: series[index].values.len(),
            expected,
        }),
        None => Ok(()),
    }
}

/// Euclidean k-means over aligned series with default restarts.
pub fn ts_kmeans(
    series: &[NormalizedSeries],
    k: usize,
    seed: u64,
) -> Result<ClusterModel, ClusterError> {
    ts_kmeans_with(series, k, seed, &KMeansOptions::default())
}

pub fn ts_kmeans_with(
    series: &[NormalizedSeries],
    k: usize,
    seed: u64,
    opts: &KMeansOptions,
) -> Result<ClusterModel, ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if series.len() < k {
        return Err(ClusterError::TooFewSeries { k, n: series.len() });
    }
    check_series(series)?;
    let data: Vec<Vec<f64>> = series.iter().map(|s| s.values.clone()).collect();
    let fit = kmeans(&data, k, seed, opts);

    let dim = data[0].len();
    let mut sizes = vec![0usize; k];
    let mut sq = vec![vec![0.0; dim]; k];
    for (row, &c) in data.iter().zip(&fit.assignments) {
        sizes[c] += 1;
        for ((acc, v), m) in sq[c].iter_mut().zip(row).zip(&fit.centroids[c]) {
            *acc += (v - m).powi(2);
        }
    }
    let spread = sq
        .iter()
        .zip(&sizes)
        .map(|(row, &n)| row.iter().map(|s| (s / n.max(1) as f64).sqrt()).collect())
        .collect();
    let mut model = ClusterModel {
        k,
        seed,
        centroids: fit.centroids,
        spread,
        sizes,
        assignments: series
            .iter()
            .map(|s| s.scholar_id.clone())
            .zip(fit.assignments)
            .collect(),
        inertia: fit.inertia,
        labels: BTreeMap::new(),
    };
    model.labels = label_patterns(&model, DEFAULT_TAU);
    Ok(model)
}

/// Inertia for every `k` in `range`.
pub fn inertia_curve(
    series: &[NormalizedSeries],
    range: RangeInclusive<usize>,
    seed: u64,
) -> Result<Vec<(usize, f64)>, ClusterError> {
    range
        .map(|k| ts_kmeans(series, k, seed).map(|m| (k, m.inertia)))
        .collect()
}

/// Index (into `inertias`) of the largest second difference, ties to the
/// smallest index. `None` with fewer than three values.
pub fn elbow_from_inertias(inertias: &[f64]) -> Option<usize> {
    if inertias.len() < 3 {
        return None;
    }
    let mut best = (1, f64::NEG_INFINITY);
    for i in 1..inertias.len() - 1 {
        let d2 = inertias[i - 1] - 2.0 * inertias[i] + inertias[i + 1];
        if d2 > best.1 {
            best = (i, d2);
        }
    }
    Some(best.0)
}

/// `k` at the sharpest bend of the inertia curve over `range`.
pub fn choose_k_elbow(
    series: &[NormalizedSeries],
    range: RangeInclusive<usize>,
    seed: u64,
) -> Result<usize, ClusterError> {
    let (start, end) = (*range.start(), *range.end());
    if start == 0 || end < start + 2 || end > series.len() {
        return Err(ClusterError::InvalidRange {
            start,
            end,
            n: series.len(),
        });
    }
    let curve = inertia_curve(series, range, seed)?;
    let inertias: Vec<f64> = curve.iter().map(|(_, i)| *i).collect();
    Ok(curve[elbow_from_inertias(&inertias).expect("width >= 3")].0)
}

/// Ordinary least-squares slope of `values` against `0, 1, 2, ...`.
pub fn ols_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in values.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    sxy / sxx
}

pub fn pattern_of(centroid: &[f64], tau: f64) -> Pattern {
    let slope = ols_slope(centroid);
    if slope >= tau {
        Pattern::Increasing
    } else if slope <= -tau {
        Pattern::Decreasing
    } else {
        Pattern::Stable
    }
}

pub fn label_patterns(model: &ClusterModel, tau: f64) -> BTreeMap<usize, Pattern> {
    model
        .centroids
        .iter()
        .enumerate()
        .map(|(i, c)| (i, pattern_of(c, tau)))
        .collect()
}
