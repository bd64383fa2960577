//! Publication records, corpus filtering, and the input-file loaders.
//!
//! Records come out of [`dblp::DblpReader`] in document order; [`filter_corpus`]
//! groups them by scholar, drops informal and under-threshold scholars, and
//! assigns the per-scholar `seq` that every downstream module uses as its
//! only temporal key.

pub mod dblp;
pub mod tables;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dblp::{parse_dblp_stream, DblpReader, IngestConfig, SkipReason, SkippedRecord};
pub use tables::{load_rankings, load_scholar_metrics};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Table { line: u64, message: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("empty corpus: no scholar has at least {min_pubs} eligible publications")]
    EmptyCorpus { min_pubs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VenueType {
    Journal,
    Conference,
    Other,
}

impl VenueType {
    pub fn as_str(self) -> &'static str {
        match self {
            VenueType::Journal => "journal",
            VenueType::Conference => "conference",
            VenueType::Other => "other",
        }
    }
}

impl FromStr for VenueType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "journal" => Ok(VenueType::Journal),
            "conference" => Ok(VenueType::Conference),
            "other" => Ok(VenueType::Other),
            other => Err(format!("unknown venue type `{other}`")),
        }
    }
}

/// One scholar–venue–time publication event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub scholar_id: String,
    pub venue_id: String,
    pub year: i32,
    /// 0-based position in the scholar's career. Provisional (document order)
    /// until [`filter_corpus`] reassigns it.
    pub seq: usize,
    pub venue_type: VenueType,
    pub informal: bool,
    pub first_author: bool,
}

/// Journal quartile. `Q1` is the highest rank, so `Q1 > Q2 > Q3 > Q4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quartile {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quartile {
    pub const ALL: [Quartile; 4] = [Quartile::Q1, Quartile::Q2, Quartile::Q3, Quartile::Q4];

    /// Numeric encoding with Q1 = 1; smaller means higher-ranked.
    pub fn numeric(self) -> u8 {
        match self {
            Quartile::Q1 => 1,
            Quartile::Q2 => 2,
            Quartile::Q3 => 3,
            Quartile::Q4 => 4,
        }
    }
}

impl Ord for Quartile {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.numeric().cmp(&self.numeric())
    }
}

impl PartialOrd for Quartile {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Quartile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.numeric())
    }
}

impl FromStr for Quartile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Q1" => Ok(Quartile::Q1),
            "Q2" => Ok(Quartile::Q2),
            "Q3" => Ok(Quartile::Q3),
            "Q4" => Ok(Quartile::Q4),
            other => Err(format!("unknown quartile `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScholarMetrics {
    pub h_index: u32,
    pub n_publications: u32,
    pub first_pub_year: i32,
    pub academic_age: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterOptions {
    pub min_pubs: usize,
    pub exclude_informal: bool,
    pub first_author_only: bool,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            min_pubs: 5,
            exclude_informal: true,
            first_author_only: false,
        }
    }
}

/// Filtered publication records keyed by scholar, plus the joined tables.
///
/// Each scholar's records are ordered by `seq`, which runs 0..n-1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub scholars: BTreeMap<String, Vec<PublicationRecord>>,
    pub rankings: BTreeMap<String, Quartile>,
    pub metrics: BTreeMap<String, ScholarMetrics>,
}

impl Corpus {
    pub fn n_scholars(&self) -> usize {
        self.scholars.len()
    }

    pub fn n_publications(&self) -> usize {
        self.scholars.values().map(Vec::len).sum()
    }

    pub fn timeline(&self, scholar_id: &str) -> Option<&[PublicationRecord]> {
        self.scholars.get(scholar_id).map(Vec::as_slice)
    }

    /// Venue type of every venue seen in the records. A venue listed under
    /// several types keeps the first one encountered in scholar-id order.
    pub fn venue_types(&self) -> BTreeMap<String, VenueType> {
        let mut out = BTreeMap::new();
        for rec in self.scholars.values().flatten() {
            out.entry(rec.venue_id.clone()).or_insert(rec.venue_type);
        }
        out
    }

    /// Flattened records in scholar-id then `seq` order.
    pub fn records(&self) -> impl Iterator<Item = &PublicationRecord> {
        self.scholars.values().flatten()
    }
}

/// Groups records by scholar and applies the eligibility rules.
///
/// Within a scholar, records are stably ordered by year, so same-year
/// publications keep their input order; `seq` is then reassigned 0..n-1.
pub fn filter_corpus<I>(records: I, opts: &FilterOptions) -> Result<Corpus, IngestError>
where
    I: IntoIterator<Item = PublicationRecord>,
{
    let mut grouped: BTreeMap<String, Vec<PublicationRecord>> = BTreeMap::new();
    for rec in records {
        if opts.exclude_informal && rec.informal {
            continue;
        }
        if opts.first_author_only && !rec.first_author {
            continue;
        }
        grouped.entry(rec.scholar_id.clone()).or_default().push(rec);
    }
    grouped.retain(|_, recs| recs.len() >= opts.min_pubs);
    if grouped.is_empty() {
        return Err(IngestError::EmptyCorpus {
            min_pubs: opts.min_pubs,
        });
    }
    for recs in grouped.values_mut() {
        recs.sort_by_key(|r| r.year);
        for (i, r) in recs.iter_mut().enumerate() {
            r.seq = i;
        }
    }
    Ok(Corpus {
        scholars: grouped,
        ..Corpus::default()
    })
}
