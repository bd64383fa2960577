//! Home-venue identification, emergence scanning, and α-series extraction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distfit::{
    self, ClassifyOptions, DistributionBuilder, Family, FitDomain, FitError, FitMethod, FitResult,
    PublicationDistribution,
};
use crate::ingest::PublicationRecord;

/// Shortest career prefix the emergence scan looks at.
pub const MIN_PREFIX: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HvError {
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("elbow needs at least 3 venues, got {n_venues}")]
    ElbowUndefined { n_venues: usize },
    #[error("{0} has no CDF to take an elbow from")]
    NoCdf(Family),
    #[error("home-venue set is empty")]
    NoHomeVenue,
    #[error("timeline has {n} publications, need at least {MIN_PREFIX}")]
    TooShort { n: usize },
    #[error("scholar has no emergence point")]
    NoEmergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HVResult {
    pub best_family: Family,
    pub k_star: Option<usize>,
    /// The first `k_star` venues of the sorted distribution.
    pub hv_venues: Vec<String>,
    pub leading_hv: Option<String>,
    /// Pareto shape, whenever a Pareto fit was applicable.
    pub alpha: Option<f64>,
    pub r2_adj: f64,
}

impl HVResult {
    pub fn has_home_venue(&self) -> bool {
        !self.hv_venues.is_empty()
    }
}

/// Classification of one career prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixOutcome {
    pub prefix_len: usize,
    pub best_family: Family,
    pub alpha: Option<f64>,
    pub n_hv: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergenceResult {
    /// Publication count from which the home-venue set stays non-empty.
    pub emergence_seq: Option<usize>,
    /// One entry per prefix length `5..=n`.
    pub per_prefix: Vec<PrefixOutcome>,
}

/// α after each publication from the emergence point on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaTrajectory {
    pub scholar_id: String,
    pub emergence_seq: usize,
    /// `None` where the Pareto fit was inapplicable or failed.
    pub values: Vec<Option<f64>>,
    pub total_pubs: usize,
}

impl AlphaTrajectory {
    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// 1-based rank minimizing `|F(r+2) - 2F(r+1) + F(r)|` over `r = 1..n-2`,
/// with ties going to the smallest rank. `None` when `n < 3`.
pub fn elbow_from_cdf(cdf: &[f64]) -> Option<usize> {
    if cdf.len() < 3 {
        return None;
    }
    let first = forward_diff(cdf);
    let second = forward_diff(&first);
    let mut best = 0;
    for (i, v) in second.iter().enumerate() {
        if v.abs() < second[best].abs() {
            best = i;
        }
    }
    Some(best + 1)
}

fn forward_diff(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Elbow rank `k*` of a fitted heavy-tailed curve over the distribution's ranks.
pub fn elbow_index(fit: &FitResult, dist: &PublicationDistribution) -> Result<usize, HvError> {
    let n = dist.n_venues();
    let cdf: Vec<f64> = (1..=n)
        .map(|r| {
            fit.family
                .cdf(&fit.params, r as f64)
                .ok_or(HvError::NoCdf(fit.family))
        })
        .collect::<Result<_, _>>()?;
    let k = elbow_from_cdf(&cdf).ok_or(HvError::ElbowUndefined { n_venues: n })?;
    Ok(k.clamp(1, n))
}

/// Venue with the most publications among the home venues; equal counts go
/// to the venue published in first.
pub fn leading_home_venue(
    hv: &HVResult,
    dist: &PublicationDistribution,
) -> Result<String, HvError> {
    hv.hv_venues
        .iter()
        .filter_map(|v| dist.venue_ids.iter().position(|d| d == v))
        .min_by(|&a, &b| {
            dist.counts[b]
                .cmp(&dist.counts[a])
                .then(dist.first_seq[a].cmp(&dist.first_seq[b]))
        })
        .map(|i| dist.venue_ids[i].clone())
        .ok_or(HvError::NoHomeVenue)
}

/// Classifies the distribution and extracts its home venues.
///
/// Single peak: the one venue. Power-law best: the venues up to the elbow
/// (the top venue alone if there are fewer than three). Linear or uniform:
/// none.
pub fn identify_home_venues(
    dist: &PublicationDistribution,
    opts: &ClassifyOptions,
) -> Result<HVResult, HvError> {
    let class = distfit::classify(dist, opts)?;
    let best = class.best_fit();
    let k_star = if class.best == Family::SinglePeak {
        Some(1)
    } else if class.best.is_power_law() {
        match elbow_index(best, dist) {
            Ok(k) => Some(k),
            Err(HvError::ElbowUndefined { .. }) => Some(1),
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let hv_venues = k_star.map_or_else(Vec::new, |k| dist.venue_ids[..k].to_vec());
    let mut result = HVResult {
        best_family: class.best,
        k_star,
        hv_venues,
        leading_hv: None,
        alpha: class.fits.get(&Family::Pareto).map(|f| f.params[0]),
        r2_adj: best.r2_adj,
    };
    if result.has_home_venue() {
        result.leading_hv = Some(leading_home_venue(&result, dist)?);
    }
    Ok(result)
}

/// Runs home-venue identification on every prefix of length 5..=n and finds
/// the first prefix after which the home-venue set never empties again.
pub fn emergence_point(
    timeline: &[PublicationRecord],
    opts: &ClassifyOptions,
) -> Result<EmergenceResult, HvError> {
    if timeline.len() < MIN_PREFIX {
        return Err(HvError::TooShort { n: timeline.len() });
    }
    let mut builder = DistributionBuilder::new();
    let mut per_prefix = Vec::with_capacity(timeline.len() + 1 - MIN_PREFIX);
    for rec in timeline {
        builder.push(rec);
        if builder.t_pubs() < MIN_PREFIX {
            continue;
        }
        let hv = identify_home_venues(&builder.snapshot(), opts)?;
        per_prefix.push(PrefixOutcome {
            prefix_len: builder.t_pubs(),
            best_family: hv.best_family,
            alpha: hv.alpha,
            n_hv: hv.hv_venues.len(),
        });
    }
    let trailing = per_prefix.iter().rev().take_while(|p| p.n_hv > 0).count();
    let emergence_seq = (trailing > 0).then(|| per_prefix[per_prefix.len() - trailing].prefix_len);
    Ok(EmergenceResult {
        emergence_seq,
        per_prefix,
    })
}

/// Pareto α of every prefix from the emergence point to the full career,
/// recorded whichever family won that prefix.
pub fn alpha_series(
    timeline: &[PublicationRecord],
    emergence: &EmergenceResult,
    opts: &ClassifyOptions,
) -> Result<AlphaTrajectory, HvError> {
    let start = emergence.emergence_seq.ok_or(HvError::NoEmergence)?;
    let mut builder = DistributionBuilder::new();
    let mut values = Vec::with_capacity(timeline.len() + 1 - start);
    for rec in timeline {
        builder.push(rec);
        if builder.t_pubs() < start {
            continue;
        }
        let domain = FitDomain::from_distribution(&builder.snapshot());
        let fit = match opts.method {
            FitMethod::LeastSquares => distfit::fit_points(&domain, Family::Pareto, &opts.fit),
            FitMethod::Mle => distfit::fit_points_mle(&domain, Family::Pareto, &opts.fit),
        };
        values.push(fit.ok().map(|f| f.params[0]));
    }
    Ok(AlphaTrajectory {
        scholar_id: timeline
            .first()
            .map(|r| r.scholar_id.clone())
            .unwrap_or_default(),
        emergence_seq: start,
        values,
        total_pubs: timeline.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distfit::{build_distribution, FitConfig};
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

    fn dist(counts: &[u32], first_seq: &[usize]) -> PublicationDistribution {
        PublicationDistribution {
            counts: counts.to_vec(),
            venue_ids: (0..counts.len())
                .map(|i| ((b'A' + i as u8) as char).to_string())
                .collect(),
            first_seq: first_seq.to_vec(),
            t_pubs: counts.iter().sum::<u32>() as usize,
        }
    }

    fn brute_elbow(alpha: f64, n: usize) -> usize {
        let f = |r: usize| 1.0 - (r as f64).powf(-alpha);
        let mut best = (f64::INFINITY, 0);
        for r in 1..=n - 2 {
            let d = ((f(r + 2) - f(r + 1)) - (f(r + 1) - f(r))).abs();
            if d < best.0 {
                best = (d, r);
            }
        }
        best.1
    }

    fn pareto_fit(alpha: f64) -> FitResult {
        FitResult {
            family: Family::Pareto,
            method: FitMethod::LeastSquares,
            params: vec![alpha],
            r2_adj: 1.0,
            residuals: vec![],
            n_points: 0,
        }
    }

    #[test]
    fn linear_cdf_ties_to_first_rank() {
        let cdf: Vec<f64> = (0..8).map(|i| i as f64 * 0.125).collect();
        assert_eq!(elbow_from_cdf(&cdf), Some(1));
        assert_eq!(elbow_from_cdf(&[0.0, 0.5]), None);
    }

    #[test]
    fn elbow_matches_enumeration() {
        for (alpha, n) in [(1.0, 6), (2.0, 10)] {
            let counts = vec![1; n];
            let d = dist(&counts, &(0..n).collect::<Vec<_>>());
            assert_eq!(
                elbow_index(&pareto_fit(alpha), &d).unwrap(),
                brute_elbow(alpha, n)
            );
        }
        assert_eq!(brute_elbow(1.0, 6), 4);
        assert_eq!(brute_elbow(2.0, 10), 8);
    }

    #[test]
    fn elbow_needs_three_venues() {
        let d = dist(&[3, 1], &[0, 1]);
        assert_eq!(
            elbow_index(&pareto_fit(1.0), &d),
            Err(HvError::ElbowUndefined { n_venues: 2 })
        );
    }

    #[test]
    fn single_peak_home_venue() {
        let hv = identify_home_venues(&dist(&[12], &[0]), &ClassifyOptions::default()).unwrap();
        assert_eq!(hv.best_family, Family::SinglePeak);
        assert_eq!(hv.hv_venues, vec!["A"]);
        assert_eq!(hv.leading_hv.as_deref(), Some("A"));
        assert_eq!(hv.alpha, None);
    }

    #[test]
    fn uniform_has_no_home_venue() {
        let hv = identify_home_venues(
            &dist(&[5; 5], &[0, 1, 2, 3, 4]),
            &ClassifyOptions::default(),
        )
        .unwrap();
        assert_eq!(hv.best_family, Family::Uniform);
        assert!(hv.hv_venues.is_empty());
        assert_eq!(hv.k_star, None);
        assert_eq!(hv.leading_hv, None);
        assert!(hv.alpha.is_some());
    }

    #[test]
    fn pareto_home_venues_are_prefix_to_elbow() {
        let d = dist(&[16, 8, 4, 2, 1], &[0, 1, 2, 3, 4]);
        let hv = identify_home_venues(&d, &ClassifyOptions::default()).unwrap();
        assert_eq!(hv.best_family, Family::Pareto);
        let alpha = hv.alpha.unwrap();
        let k = brute_elbow(alpha, 5);
        assert_eq!(hv.k_star, Some(k));
        assert_eq!(hv.hv_venues, d.venue_ids[..k].to_vec());
    }

    #[test]
    fn leading_venue_rules() {
        let d = dist(&[5, 3], &[0, 1]);
        let hv = HVResult {
            best_family: Family::Pareto,
            k_star: Some(2),
            hv_venues: vec!["A".into(), "B".into()],
            leading_hv: None,
            alpha: None,
            r2_adj: 1.0,
        };
        assert_eq!(leading_home_venue(&hv, &d).unwrap(), "A");
        let tied = dist(&[5, 5], &[4, 1]);
        assert_eq!(leading_home_venue(&hv, &tied).unwrap(), "B");
        let single = HVResult {
            hv_venues: vec!["B".into()],
            ..hv.clone()
        };
        assert_eq!(leading_home_venue(&single, &d).unwrap(), "B");
        let empty = HVResult {
            hv_venues: vec![],
            ..hv
        };
        assert_eq!(leading_home_venue(&empty, &d), Err(HvError::NoHomeVenue));
    }

    #[test]
    fn single_venue_career_emerges_at_five() {
        let tl = timeline(&["A"; 12]);
        let em = emergence_point(&tl, &ClassifyOptions::default()).unwrap();
        assert_eq!(em.emergence_seq, Some(5));
        assert_eq!(em.per_prefix.len(), 8);
        assert!(em
            .per_prefix
            .iter()
            .all(|p| p.best_family == Family::SinglePeak));
    }

    #[test]
    fn round_robin_never_emerges() {
        let venues = ["A", "B", "C", "D", "E"];
        let tl = timeline(&(0..25).map(|i| venues[i % 5]).collect::<Vec<_>>());
        let em = emergence_point(&tl, &ClassifyOptions::default()).unwrap();
        assert_eq!(em.emergence_seq, None);
        // every multiple of five is exactly uniform
        for p in em.per_prefix.iter().filter(|p| p.prefix_len % 5 == 0) {
            assert_eq!(p.best_family, Family::Uniform);
        }
    }

    #[test]
    fn short_timeline_is_rejected() {
        let tl = timeline(&["A"; 4]);
        assert_eq!(
            emergence_point(&tl, &ClassifyOptions::default()),
            Err(HvError::TooShort { n: 4 })
        );
    }

    #[test]
    fn alpha_series_length_and_values() {
        let block = ["A", "A", "A", "A", "B", "B", "C", "D"];
        let venues: Vec<&str> = block.iter().cycle().take(40).copied().collect();
        let tl = timeline(&venues);
        let opts = ClassifyOptions::default();
        let em = emergence_point(&tl, &opts).unwrap();
        let e = em.emergence_seq.expect("concentrated career emerges");
        let series = alpha_series(&tl, &em, &opts).unwrap();
        assert_eq!(series.values.len(), tl.len() - e + 1);
        for (i, v) in series.values.iter().enumerate() {
            let d = build_distribution(&tl, e + i).unwrap();
            let direct = distfit::fit_family(&d, Family::Pareto, &FitConfig::default())
                .ok()
                .map(|f| f.params[0]);
            assert_eq!(*v, direct);
        }
        // shares repeat exactly at every full block, and so does α
        let at_blocks: Vec<f64> = (1..=5)
            .filter(|b| b * 8 >= e)
            .map(|b| series.values[b * 8 - e].unwrap())
            .collect();
        assert!(at_blocks.windows(2).all(|w| w[0] == w[1]), "{at_blocks:?}");
    }

    #[test]
    fn emergence_at_last_publication_gives_one_value() {
        let em = EmergenceResult {
            emergence_seq: Some(6),
            per_prefix: vec![],
        };
        let tl = timeline(&["A", "B", "C", "A", "A", "A"]);
        let series = alpha_series(&tl, &em, &ClassifyOptions::default()).unwrap();
        assert_eq!(series.values.len(), 1);
        let none = EmergenceResult {
            emergence_seq: None,
            per_prefix: vec![],
        };
        assert_eq!(
            alpha_series(&tl, &none, &ClassifyOptions::default()),
            Err(HvError::NoEmergence)
        );
    }
}
