//! Sorted publication distributions and distribution-family fitting.
//!
//! Fits run on a *rank/share* domain: the venue at rank `r` (1-based, in the
//! sorted distribution) contributes the point `(r, counts[r] / t_pubs)`.
//! Normalizing by the publication total makes adjusted R² comparable across
//! scholars and makes classification invariant to scaling all counts.

mod family;
pub mod mle;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::PublicationRecord;
use crate::lm::{self, LeastSquaresProblem, LmConfig};

pub use family::Family;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("prefix length {upto} outside 1..={len}")]
    InvalidPrefix { upto: usize, len: usize },
    #[error("{family} is not applicable to {n_points} point(s)")]
    InapplicableFamily { family: Family, n_points: usize },
    #[error("{family} has no {method} estimator")]
    UnsupportedFamily { family: Family, method: FitMethod },
    #[error("{} fit did not converge (best r2_adj {:.6})", best.family, best.r2_adj)]
    ConvergenceFailure { best: Box<FitResult> },
    #[error("invalid fit data: {0}")]
    InvalidData(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    #[default]
    LeastSquares,
    Mle,
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitMethod::LeastSquares => "least_squares",
            FitMethod::Mle => "mle",
        })
    }
}

/// A scholar's venue counts after some number of publications, sorted
/// non-increasing; equal counts are ordered by when the venue first appeared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationDistribution {
    pub counts: Vec<u32>,
    pub venue_ids: Vec<String>,
    /// `seq` of the first publication in each venue.
    pub first_seq: Vec<usize>,
    pub t_pubs: usize,
}

impl PublicationDistribution {
    /// Number of distinct venues, `|J_t|`.
    pub fn n_venues(&self) -> usize {
        self.counts.len()
    }
}

/// Accumulates venue counts one publication at a time.
#[derive(Debug, Clone, Default)]
pub struct DistributionBuilder {
    index: HashMap<String, usize>,
    counts: Vec<u32>,
    venue_ids: Vec<String>,
    first_seq: Vec<usize>,
    t_pubs: usize,
}

impl DistributionBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, rec: &PublicationRecord) {
        match self.index.get(&rec.venue_id) {
            Some(&i) => self.counts[i] += 1,
            None => {
                self.index.insert(rec.venue_id.clone(), self.counts.len());
                self.counts.push(1);
                self.venue_ids.push(rec.venue_id.clone());
                self.first_seq.push(rec.seq);
            }
        }
        self.t_pubs += 1;
    }

    pub fn t_pubs(&self) -> usize {
        self.t_pubs
    }

    pub fn snapshot(&self) -> PublicationDistribution {
        let mut order: Vec<usize> = (0..self.counts.len()).collect();
        order.sort_by(|&a, &b| {
            self.counts[b]
                .cmp(&self.counts[a])
                .then(self.first_seq[a].cmp(&self.first_seq[b]))
        });
        PublicationDistribution {
            counts: order.iter().map(|&i| self.counts[i]).collect(),
            venue_ids: order.iter().map(|&i| self.venue_ids[i].clone()).collect(),
            first_seq: order.iter().map(|&i| self.first_seq[i]).collect(),
            t_pubs: self.t_pubs,
        }
    }
}

/// Distribution over the first `upto` publications of a `seq`-ordered timeline.
pub fn build_distribution(
    timeline: &[PublicationRecord],
    upto: usize,
) -> Result<PublicationDistribution, FitError> {
    if upto == 0 || upto > timeline.len() {
        return Err(FitError::InvalidPrefix {
            upto,
            len: timeline.len(),
        });
    }
    let mut builder = DistributionBuilder::new();
    for rec in &timeline[..upto] {
        builder.push(rec);
    }
    Ok(builder.snapshot())
}

/// Points a family is fitted to, plus the sample weights used by MLE.
#[derive(Debug, Clone, PartialEq)]
pub struct FitDomain {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FitDomain {
    pub fn from_distribution(dist: &PublicationDistribution) -> Self {
        let total = dist.t_pubs as f64;
        Self {
            x: (1..=dist.counts.len()).map(|r| r as f64).collect(),
            y: dist.counts.iter().map(|&c| f64::from(c) / total).collect(),
            weights: dist.counts.iter().map(|&c| f64::from(c)).collect(),
        }
    }

    /// Arbitrary curve samples; MLE treats the `y` values as weights.
    pub fn from_points(x: Vec<f64>, y: Vec<f64>) -> Self {
        let weights = y.clone();
        Self { x, y, weights }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn sum_sq(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum()
    }

    /// True when every `y` is equal (up to rounding).
    pub fn has_zero_variance(&self) -> bool {
        let n = self.y.len() as f64;
        let mean = self.y.iter().sum::<f64>() / n;
        let sst: f64 = self.y.iter().map(|v| (v - mean).powi(2)).sum();
        sst <= 1e-20 * self.sum_sq()
    }
}

/// Fitting hyperparameters. One record so that every run's settings can be
/// logged and reproduced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub lm: LmConfig,
    /// Starting Pareto shape for least squares.
    pub initial_alpha: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lm: LmConfig::default(),
            initial_alpha: 1.0,
        }
    }
}

/// One family fitted to one distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub method: FitMethod,
    /// Pareto `[α]`, linear `[a, b]`, single peak `[a]`, uniform `[]`,
    /// exponential `[λ]`, Fréchet `[shape, scale]`.
    pub params: Vec<f64>,
    /// Adjusted R²; `-inf` (serialized as `null`) when undefined.
    #[serde(with = "neg_inf_as_null")]
    pub r2_adj: f64,
    /// Observed minus fitted, per rank.
    #[serde(skip)]
    pub residuals: Vec<f64>,
    pub n_points: usize,
}

mod neg_inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

/// Adjusted R² of `fitted` against `observed` with `p` free parameters.
///
/// Conventions: if `observed` has zero variance, a zero-residual fit scores 1
/// and anything else `-inf`; if `n - p - 1 <= 0` the correction is undefined
/// and the same exact-or-`-inf` rule applies.
pub fn adjusted_r2(observed: &[f64], fitted: &[f64], p: usize) -> f64 {
    let n = observed.len();
    let scale: f64 = observed
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let mean = observed.iter().sum::<f64>() / n as f64;
    let sst: f64 = observed.iter().map(|v| (v - mean).powi(2)).sum();
    let ssr: f64 = observed
        .iter()
        .zip(fitted)
        .map(|(o, f)| (o - f).powi(2))
        .sum();
    if !ssr.is_finite() {
        return f64::NEG_INFINITY;
    }
    let exact = ssr <= 1e-24 * scale;
    let dof = n as i64 - p as i64 - 1;
    if sst <= 1e-20 * scale || dof <= 0 {
        return if exact { 1.0 } else { f64::NEG_INFINITY };
    }
    let r2 = 1.0 - ssr / sst;
    1.0 - (1.0 - r2) * (n as f64 - 1.0) / dof as f64
}

/// Plain (unadjusted) R².
pub fn r_squared(observed: &[f64], fitted: &[f64]) -> f64 {
    let n = observed.len() as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let sst: f64 = observed.iter().map(|v| (v - mean).powi(2)).sum();
    let ssr: f64 = observed
        .iter()
        .zip(fitted)
        .map(|(o, f)| (o - f).powi(2))
        .sum();
    1.0 - ssr / sst
}

struct CurveProblem<'a> {
    family: Family,
    x: &'a [f64],
    y: &'a [f64],
}

impl LeastSquaresProblem for CurveProblem<'_> {
    fn n_params(&self) -> usize {
        self.family.n_params()
    }
    fn n_residuals(&self) -> usize {
        self.x.len()
    }
    fn residuals(&self, params: &[f64], out: &mut [f64]) {
        let n = self.x.len();
        for (o, (x, y)) in out.iter_mut().zip(self.x.iter().zip(self.y)) {
            *o = self.family.eval(params, *x, n) - y;
        }
    }
    fn jacobian(&self, params: &[f64], out: &mut [Vec<f64>]) {
        for (row, x) in out.iter_mut().zip(self.x) {
            self.family.gradient(params, *x, row);
        }
    }
    fn is_feasible(&self, params: &[f64]) -> bool {
        self.family.params_valid(params)
    }
}

fn finish(
    domain: &FitDomain,
    family: Family,
    method: FitMethod,
    params: Vec<f64>,
    fitted: &[f64],
) -> FitResult {
    FitResult {
        family,
        method,
        r2_adj: adjusted_r2(&domain.y, fitted, family.n_params()),
        residuals: domain.y.iter().zip(fitted).map(|(o, f)| o - f).collect(),
        params,
        n_points: domain.len(),
    }
}

fn ols_line(x: &[f64], y: &[f64]) -> [f64; 2] {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    // f(x) = -a x + b
    [-slope, my - slope * mx]
}

fn check_applicable(domain: &FitDomain, family: Family) -> Result<(), FitError> {
    if domain.x.len() != domain.y.len() || domain.y.iter().any(|v| !v.is_finite()) {
        return Err(FitError::InvalidData(
            "x and y must be finite and of equal length".into(),
        ));
    }
    if !family.is_applicable(domain.len()) {
        return Err(FitError::InapplicableFamily {
            family,
            n_points: domain.len(),
        });
    }
    Ok(())
}

fn starting_point(domain: &FitDomain, family: Family, cfg: &FitConfig) -> Vec<f64> {
    match family {
        Family::Pareto => vec![cfg.initial_alpha],
        Family::Linear => ols_line(&domain.x, &domain.y).to_vec(),
        Family::Exponential => {
            vec![mle::exponential_rate(&domain.x, &domain.weights).unwrap_or(1.0)]
        }
        Family::Frechet => {
            let (k, s) = mle::frechet_params(&domain.x, &domain.weights).unwrap_or((1.0, 1.0));
            vec![k, s]
        }
        Family::SinglePeak | Family::Uniform => Vec::new(),
    }
}

/// Least-squares fit of `family` to arbitrary curve samples.
pub fn fit_points(
    domain: &FitDomain,
    family: Family,
    cfg: &FitConfig,
) -> Result<FitResult, FitError> {
    check_applicable(domain, family)?;
    let method = FitMethod::LeastSquares;
    match family {
        Family::SinglePeak => {
            let a = domain.y[0];
            Ok(finish(domain, family, method, vec![a], &[a]))
        }
        Family::Uniform => {
            let n = domain.len();
            Ok(finish(
                domain,
                family,
                method,
                Vec::new(),
                &vec![1.0 / n as f64; n],
            ))
        }
        _ => {
            let problem = CurveProblem {
                family,
                x: &domain.x,
                y: &domain.y,
            };
            let init = starting_point(domain, family, cfg);
            let out = lm::minimize(&problem, &init, &cfg.lm);
            let n = domain.len();
            let fitted: Vec<f64> = domain
                .x
                .iter()
                .map(|&x| family.eval(&out.params, x, n))
                .collect();
            let result = finish(domain, family, method, out.params.clone(), &fitted);
            if out.converged() {
                Ok(result)
            } else {
                Err(FitError::ConvergenceFailure {
                    best: Box::new(result),
                })
            }
        }
    }
}

/// Maximum-likelihood fit of a heavy-tailed family to curve samples.
///
/// Adjusted R² is scored on the implied share curve: the fitted density at
/// each rank, rescaled so that it sums to the observed total.
pub fn fit_points_mle(
    domain: &FitDomain,
    family: Family,
    _cfg: &FitConfig,
) -> Result<FitResult, FitError> {
    if !family.is_power_law() {
        return Err(FitError::UnsupportedFamily {
            family,
            method: FitMethod::Mle,
        });
    }
    check_applicable(domain, family)?;
    let (x, w) = (&domain.x, &domain.weights);
    let params = match family {
        Family::Pareto => mle::pareto_alpha(x, w).map(|a| vec![a]),
        Family::Exponential => mle::exponential_rate(x, w).map(|l| vec![l]),
        Family::Frechet => mle::frechet_params(x, w).map(|(k, s)| vec![k, s]),
        _ => unreachable!(),
    }
    .ok_or_else(|| {
        FitError::InvalidData(format!("{family} likelihood has no maximum on this sample"))
    })?;
    let n = domain.len();
    let density: Vec<f64> = x.iter().map(|&xi| family.eval(&params, xi, n)).collect();
    let scale = domain.y.iter().sum::<f64>() / density.iter().sum::<f64>();
    let fitted: Vec<f64> = density.iter().map(|d| d * scale).collect();
    Ok(finish(domain, family, FitMethod::Mle, params, &fitted))
}

/// Least-squares fit of one family to a publication distribution.
pub fn fit_family(
    dist: &PublicationDistribution,
    family: Family,
    cfg: &FitConfig,
) -> Result<FitResult, FitError> {
    fit_points(&FitDomain::from_distribution(dist), family, cfg)
}

/// Maximum-likelihood fit over the expanded per-publication rank sample.
pub fn fit_family_mle(
    dist: &PublicationDistribution,
    family: Family,
    cfg: &FitConfig,
) -> Result<FitResult, FitError> {
    fit_points_mle(&FitDomain::from_distribution(dist), family, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub method: FitMethod,
    /// Heavy-tailed family competing against the single-peak, linear, and
    /// uniform archetypes. Pareto unless replicating with an alternative.
    pub power_law: Family,
    pub fit: FitConfig,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            method: FitMethod::LeastSquares,
            power_law: Family::Pareto,
            fit: FitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub best: Family,
    pub fits: BTreeMap<Family, FitResult>,
}

impl Classification {
    pub fn best_fit(&self) -> &FitResult {
        &self.fits[&self.best]
    }
}

/// Candidate families in tie-break priority order.
pub fn candidates(power_law: Family) -> [Family; 4] {
    [
        power_law,
        Family::SinglePeak,
        Family::Linear,
        Family::Uniform,
    ]
}

/// Fits every applicable candidate and picks the best adjusted R².
///
/// Exact ties go to the earlier family in [`candidates`] order. When all
/// shares are equal, every exact fit scores 1 and the family with fewer free
/// parameters wins, so equal counts classify as uniform.
pub fn classify_domain(
    domain: &FitDomain,
    opts: &ClassifyOptions,
) -> Result<Classification, FitError> {
    if domain.is_empty() {
        return Err(FitError::InvalidData("empty distribution".into()));
    }
    if !opts.power_law.is_power_law() {
        return Err(FitError::InvalidData(format!(
            "{} is not a power-law family",
            opts.power_law
        )));
    }
    let zero_variance = domain.len() > 1 && domain.has_zero_variance();
    let mut fits = BTreeMap::new();
    let mut first_failure = None;
    let mut best: Option<(Family, f64)> = None;
    for family in candidates(opts.power_law) {
        if !family.is_applicable(domain.len()) {
            continue;
        }
        let fit = if opts.method == FitMethod::Mle && family.is_power_law() {
            fit_points_mle(domain, family, &opts.fit)
        } else {
            fit_points(domain, family, &opts.fit)
        };
        let fit = match fit {
            Ok(f) => f,
            Err(e) => {
                first_failure.get_or_insert(e);
                continue;
            }
        };
        let better = match best {
            None => true,
            Some((current, score)) => {
                fit.r2_adj > score
                    || (zero_variance
                        && fit.r2_adj == score
                        && family.n_params() < current.n_params())
            }
        };
        if better {
            best = Some((family, fit.r2_adj));
        }
        fits.insert(family, fit);
    }
    match best {
        Some((best, _)) => Ok(Classification { best, fits }),
        None => Err(first_failure.expect("at least one family applies to a non-empty domain")),
    }
}

pub fn classify(
    dist: &PublicationDistribution,
    opts: &ClassifyOptions,
) -> Result<Classification, FitError> {
    classify_domain(&FitDomain::from_distribution(dist), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::VenueType;

    fn timeline(venues: &[&str]) -> Vec<PublicationRecord> {
        venues
            .iter()
            .enumerate()
            .map(|(i, v)| PublicationRecord {
                scholar_id: "s".into(),
                venue_id: (*v).into(),
                year: 2000,
                seq: i,
                venue_type: VenueType::Journal,
                informal: false,
                first_author: true,
            })
            .collect()
    }

    fn dist(counts: &[u32]) -> PublicationDistribution {
        PublicationDistribution {
            counts: counts.to_vec(),
            venue_ids: (0..counts.len()).map(|i| format!("v{i}")).collect(),
            first_seq: (0..counts.len()).collect(),
            t_pubs: counts.iter().sum::<u32>() as usize,
        }
    }

    #[test]
    fn counts_sorted_descending() {
        let d = build_distribution(&timeline(&["A", "A", "B"]), 3).unwrap();
        assert_eq!(d.counts, vec![2, 1]);
        assert_eq!(d.venue_ids, vec!["A", "B"]);
    }

    #[test]
    fn equal_counts_keep_entry_order() {
        let d = build_distribution(&timeline(&["B", "A", "A", "B"]), 4).unwrap();
        assert_eq!(d.counts, vec![2, 2]);
        assert_eq!(d.venue_ids, vec!["B", "A"]);
        assert_eq!(d.first_seq, vec![0, 1]);
    }

    #[test]
    fn single_venue_distribution() {
        let d = build_distribution(&timeline(&["A", "A", "A"]), 3).unwrap();
        assert_eq!(d.counts, vec![3]);
        assert_eq!(d.n_venues(), 1);
    }

    #[test]
    fn prefix_bounds_are_checked() {
        let tl = timeline(&["A", "B"]);
        assert!(matches!(
            build_distribution(&tl, 0),
            Err(FitError::InvalidPrefix { .. })
        ));
        assert!(matches!(
            build_distribution(&tl, 3),
            Err(FitError::InvalidPrefix { .. })
        ));
    }

    #[test]
    fn exact_uniform_fit() {
        let f = fit_family(&dist(&[5, 5, 5, 5]), Family::Uniform, &FitConfig::default()).unwrap();
        assert!(f.residuals.iter().all(|r| r.abs() < 1e-15));
        assert_eq!(f.r2_adj, 1.0);
    }

    #[test]
    fn exact_linear_fit() {
        let f = fit_family(
            &dist(&[9, 7, 5, 3, 1]),
            Family::Linear,
            &FitConfig::default(),
        )
        .unwrap();
        assert!(
            f.residuals.iter().all(|r| r.abs() < 1e-12),
            "{:?}",
            f.residuals
        );
        assert!((f.r2_adj - 1.0).abs() < 1e-12);
        assert!((f.params[0] - 0.08).abs() < 1e-12);
    }

    #[test]
    fn inapplicable_families_are_typed_errors() {
        let cfg = FitConfig::default();
        assert!(matches!(
            fit_family(&dist(&[3, 1]), Family::Pareto, &cfg),
            Err(FitError::InapplicableFamily { n_points: 2, .. })
        ));
        assert!(matches!(
            fit_family(&dist(&[3, 1]), Family::SinglePeak, &cfg),
            Err(FitError::InapplicableFamily { .. })
        ));
        assert!(matches!(
            fit_family_mle(&dist(&[3, 2, 1]), Family::Linear, &cfg),
            Err(FitError::UnsupportedFamily { .. })
        ));
    }

    #[test]
    fn single_peak_scores_one() {
        let f = fit_family(&dist(&[12]), Family::SinglePeak, &FitConfig::default()).unwrap();
        assert_eq!(f.r2_adj, 1.0);
        assert_eq!(f.params, vec![1.0]);
    }

    #[test]
    fn exponential_mle_rate() {
        // sample [1,3]: mean 2
        let d = FitDomain {
            x: vec![1.0, 2.0, 3.0],
            y: vec![0.5, 0.0, 0.5],
            weights: vec![1.0, 0.0, 1.0],
        };
        let f = fit_points_mle(&d, Family::Exponential, &FitConfig::default()).unwrap();
        assert!((f.params[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn classify_archetypes() {
        let opts = ClassifyOptions::default();
        assert_eq!(
            classify(&dist(&[16, 8, 4, 2, 1]), &opts).unwrap().best,
            Family::Pareto
        );
        assert_eq!(
            classify(&dist(&[5, 5, 5, 5, 5]), &opts).unwrap().best,
            Family::Uniform
        );
        let c = classify(&dist(&[12]), &opts).unwrap();
        assert_eq!(c.best, Family::SinglePeak);
        assert_eq!(c.fits.len(), 1);
    }

    #[test]
    fn classification_contains_every_applicable_family() {
        let c = classify(&dist(&[6, 3, 2, 1]), &ClassifyOptions::default()).unwrap();
        let fams: Vec<_> = c.fits.keys().copied().collect();
        assert_eq!(fams, vec![Family::Pareto, Family::Linear, Family::Uniform]);
        let two = classify(&dist(&[6, 3]), &ClassifyOptions::default()).unwrap();
        assert_eq!(two.best, Family::Uniform);
    }

    #[test]
    fn alternative_power_law_candidate() {
        let opts = ClassifyOptions {
            power_law: Family::Exponential,
            ..ClassifyOptions::default()
        };
        let c = classify(&dist(&[16, 8, 4, 2, 1]), &opts).unwrap();
        assert!(c.fits.contains_key(&Family::Exponential));
        assert!(!c.fits.contains_key(&Family::Pareto));
        let bad = ClassifyOptions {
            power_law: Family::Linear,
            ..ClassifyOptions::default()
        };
        assert!(classify(&dist(&[3, 2, 1]), &bad).is_err());
    }

    #[test]
    fn adjusted_r2_conventions() {
        assert_eq!(adjusted_r2(&[0.2, 0.2], &[0.2, 0.2], 0), 1.0);
        assert_eq!(adjusted_r2(&[0.2, 0.2], &[0.1, 0.3], 0), f64::NEG_INFINITY);
        // n - p - 1 == 0 with an imperfect fit
        assert_eq!(
            adjusted_r2(&[0.5, 0.3, 0.2], &[0.5, 0.2, 0.3], 2),
            f64::NEG_INFINITY
        );
        let y = [0.5, 0.3, 0.15, 0.05];
        let f = [0.45, 0.33, 0.16, 0.06];
        assert!(adjusted_r2(&y, &f, 1) < r_squared(&y, &f));
        assert_eq!(adjusted_r2(&y, &f, 0), r_squared(&y, &f));
    }

    #[test]
    fn fit_result_json_shape() {
        let f = fit_family(&dist(&[5, 5, 5, 5]), Family::Uniform, &FitConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(v["family"], "uniform");
        assert_eq!(v["method"], "least_squares");
        assert_eq!(v["n_points"], 4);
        let mut bad = f.clone();
        bad.r2_adj = f64::NEG_INFINITY;
        let s = serde_json::to_string(&bad).unwrap();
        assert!(s.contains("\"r2_adj\":null"));
        let back: FitResult = serde_json::from_str(&s).unwrap();
        assert_eq!(back.r2_adj, f64::NEG_INFINITY);
    }
}
