use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::ingest::{Quartile, VenueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MedianGroup {
    HvHigher,
    Equal,
    NonHvHigher,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianComparison {
    pub group: MedianGroup,
    /// Numeric quartile median, Q1 = 1 (best) to Q4 = 4.
    pub hv_median: f64,
    pub nonhv_median: f64,
}

/// Median of quartiles on the 1..4 scale; even counts average the two
/// central values.
pub fn quartile_median(qs: &[Quartile]) -> Option<f64> {
    if qs.is_empty() {
        return None;
    }
    let mut v: Vec<u8> = qs.iter().map(|q| q.numeric()).collect();
    v.sort_unstable();
    let n = v.len();
    Some(if n % 2 == 1 {
        f64::from(v[n / 2])
    } else {
        0.5 * f64::from(v[n / 2 - 1] + v[n / 2])
    })
}

/// Compares median quartiles of a scholar's home venues and other journals.
/// A smaller numeric median is the higher-ranked side.
pub fn median_q_comparison(
    hv: &[Quartile],
    nonhv: &[Quartile],
) -> Result<MedianComparison, StatsError> {
    let hv_median = quartile_median(hv).ok_or(StatsError::EmptySample)?;
    let nonhv_median = quartile_median(nonhv).ok_or(StatsError::EmptySample)?;
    let group = match hv_median.total_cmp(&nonhv_median) {
        std::cmp::Ordering::Less => MedianGroup::HvHigher,
        std::cmp::Ordering::Equal => MedianGroup::Equal,
        std::cmp::Ordering::Greater => MedianGroup::NonHvHigher,
    };
    Ok(MedianComparison {
        group,
        hv_median,
        nonhv_median,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HvCountBucket {
    One,
    Two,
    Three,
    FourPlus,
}

impl HvCountBucket {
    pub const ALL: [HvCountBucket; 4] = [Self::One, Self::Two, Self::Three, Self::FourPlus];

    pub fn from_count(n: usize) -> Option<Self> {
        match n {
            0 => None,
            1 => Some(Self::One),
            2 => Some(Self::Two),
            3 => Some(Self::Three),
            _ => Some(Self::FourPlus),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::One => "1",
            Self::Two => "2",
            Self::Three => "3",
            Self::FourPlus => "4+",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HvTypeCategory {
    JournalsOnly,
    ConferencesOnly,
    Other,
    Mixed,
}

impl HvTypeCategory {
    pub const ALL: [HvTypeCategory; 4] = [
        Self::JournalsOnly,
        Self::ConferencesOnly,
        Self::Other,
        Self::Mixed,
    ];

    /// Homogeneous sets take their type; anything else is mixed.
    pub fn of(types: &[VenueType]) -> Self {
        match types.first() {
            Some(first) if types.iter().all(|t| t == first) => match first {
                VenueType::Journal => Self::JournalsOnly,
                VenueType::Conference => Self::ConferencesOnly,
                VenueType::Other => Self::Other,
            },
            Some(_) => Self::Mixed,
            None => Self::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::JournalsOnly => "journals_only",
            Self::ConferencesOnly => "conferences_only",
            Self::Other => "other",
            Self::Mixed => "mixed",
        }
    }
}

/// Scholar counts by number of home venues and their venue types.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HvTypePartition {
    /// `counts[bucket][category]`, indexed by the `ALL` orderings.
    pub counts: [[u64; 4]; 4],
    /// HV venues with no known type, counted as `other`.
    pub untyped_venues: u64,
}

impl HvTypePartition {
    pub fn get(&self, bucket: HvCountBucket, category: HvTypeCategory) -> u64 {
        self.counts[bucket as usize][category as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Partitions scholars with at least one home venue. Scholars without home
/// venues are skipped.
pub fn hv_type_partition<'a, I>(
    hv_sets: I,
    venue_types: &BTreeMap<String, VenueType>,
) -> HvTypePartition
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut out = HvTypePartition::default();
    for set in hv_sets {
        let Some(bucket) = HvCountBucket::from_count(set.len()) else {
            continue;
        };
        let types: Vec<VenueType> = set
            .iter()
            .map(|v| {
                venue_types.get(v).copied().unwrap_or_else(|| {
                    out.untyped_venues += 1;
                    VenueType::Other
                })
            })
            .collect();
        out.counts[bucket as usize][HvTypeCategory::of(&types) as usize] += 1;
    }
    out
}

/// Counts and per-column proportions of quartiles, rows Q1..Q4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileTable {
    pub columns: Vec<String>,
    /// `counts[row][col]`, row 0 = Q1.
    pub counts: Vec<Vec<u64>>,
    pub proportions: Vec<Vec<f64>>,
}

impl QuartileTable {
    /// Counts transposed to one row per column group, for χ² testing.
    pub fn contingency(&self) -> Vec<Vec<u64>> {
        (0..self.columns.len())
            .map(|c| self.counts.iter().map(|r| r[c]).collect())
            .collect()
    }
}

pub fn quartile_table(columns: &[(String, Vec<Quartile>)]) -> QuartileTable {
    let mut counts = vec![vec![0u64; columns.len()]; 4];
    for (c, (_, qs)) in columns.iter().enumerate() {
        for q in qs {
            counts[usize::from(q.numeric()) - 1][c] += 1;
        }
    }
    let totals: Vec<u64> = (0..columns.len())
        .map(|c| counts.iter().map(|r| r[c]).sum())
        .collect();
    let proportions = counts
        .iter()
        .map(|row| {
            row.iter()
                .zip(&totals)
                .map(|(&n, &t)| if t == 0 { 0.0 } else { n as f64 / t as f64 })
                .collect()
        })
        .collect();
    QuartileTable {
        columns: columns.iter().map(|(name, _)| name.clone()).collect(),
        counts,
        proportions,
    }
}
