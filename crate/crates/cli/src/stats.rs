//! `stats`: cohort tests over an analysis joined with rankings and metrics.
//!
//! Joins that cannot be resolved (a scholar without metrics, a journal
//! without a quartile) are listed in `stats.json` and left out of the tests
//! that need them. A test that cannot run records its error in place.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use clap::ValueEnum;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use homevenue::cohort::{
    chi_square_independence, chi_square_posthoc, hv_type_partition, jonckheere_terpstra,
    kruskal_wallis, mann_whitney_u, median_q_comparison, quartile_table, sigmoid_fit, two_sample_t,
    HvCountBucket, HvTypeCategory, HvTypePartition, MedianComparison, MedianGroup,
    PairwiseComparison, PortionPoint, PosthocPairing, QuartileTable, SigmoidFit, StatsError,
    TestReport, TrendAlternative,
};
use homevenue::ingest::{Corpus, Quartile, VenueType};

use crate::analyze::{HvRow, HV, PORTION_CURVE};
use crate::manifest::ManifestBuilder;
use crate::{archive, read_jsonl, write_json, CliError, Outcome, StatsArgs, SCHEMA_VERSION};

pub const STATS: &str = "stats.json";
pub const QUARTILE_TABLE: &str = "quartile_table.csv";
pub const HV_TYPE_PARTITION: &str = "hv_type_partition.csv";

/// Largest publication count used for the sigmoid fit of the portion curve.
pub const SIGMOID_MAX_X: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Adjusted R² of power-law-best scholars against everyone else.
    R2Groups,
    /// H-index of scholars with and without home venues.
    HIndexHv,
    /// H-index across 1, 2, 3, 4+ home venues.
    HIndexHvCount,
    /// Quartile distributions of journals and journal home venues.
    QuartileChiSquare,
    /// Decreasing H-index from Q1 to Q4 journal home venues.
    HIndexTrend,
    /// Median quartile of home-venue journals against other journals.
    MedianQ,
    /// Scholars by number and venue types of home venues.
    HvTypes,
    /// Sigmoid fit of the power-law portion curve.
    Sigmoid,
}

impl TestKind {
    pub const ALL: [TestKind; 8] = [
        TestKind::R2Groups,
        TestKind::HIndexHv,
        TestKind::HIndexHvCount,
        TestKind::QuartileChiSquare,
        TestKind::HIndexTrend,
        TestKind::MedianQ,
        TestKind::HvTypes,
        TestKind::Sigmoid,
    ];
}

/// A test run on named groups; `report` or `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTest {
    pub name: String,
    pub groups: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<TestReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl NamedTest {
    fn new(name: &str, groups: &[&str], result: Result<TestReport, StatsError>) -> Self {
        let groups = groups.iter().map(|g| g.to_string()).collect();
        match result {
            Ok(report) => Self {
                name: name.into(),
                groups,
                report: Some(report),
                error: None,
            },
            Err(e) => Self {
                name: name.into(),
                groups,
                report: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianQSummary {
    pub n_scholars: usize,
    pub hv_higher: usize,
    pub equal: usize,
    pub nonhv_higher: usize,
    pub comparisons: BTreeMap<String, MedianComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileSection {
    pub table: QuartileTable,
    pub chi_square: NamedTest,
    /// Pairwise tests between quartile rows.
    pub posthoc_rows: Option<Vec<PairwiseComparison>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmoidSection {
    pub max_x: usize,
    pub n_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<SigmoidFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Unresolved {
    /// Scholars in the analysis without a metrics row.
    pub scholars_without_metrics: Vec<String>,
    /// Journals published in by analysed scholars but absent from the rankings.
    pub journals_without_quartile: Vec<String>,
    /// Home venues missing from the archive's records.
    pub venues_without_type: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub schema_version: u32,
    pub run_id: String,
    pub n_scholars: usize,
    pub tests: Vec<NamedTest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quartiles: Option<QuartileSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_q: Option<MedianQSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hv_type_partition: Option<HvTypePartition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigmoid: Option<SigmoidSection>,
    pub unresolved: Unresolved,
}

/// Joined view of an analysis and its corpus.
struct Joined<'a> {
    rows: &'a [HvRow],
    corpus: &'a Corpus,
    venue_types: BTreeMap<String, VenueType>,
    unresolved: Unresolved,
}

impl<'a> Joined<'a> {
    fn new(rows: &'a [HvRow], corpus: &'a Corpus) -> Self {
        let venue_types = corpus.venue_types();
        let mut unresolved = Unresolved::default();
        let mut missing_q = BTreeSet::new();
        let mut untyped = BTreeSet::new();
        for row in rows {
            if !corpus.metrics.contains_key(&row.scholar_id) {
                unresolved
                    .scholars_without_metrics
                    .push(row.scholar_id.clone());
            }
            for v in &row.hv_venues {
                if !venue_types.contains_key(v) {
                    untyped.insert(v.clone());
                }
            }
            for v in scholar_journals(corpus, &row.scholar_id, &venue_types) {
                if !corpus.rankings.contains_key(&v) {
                    missing_q.insert(v);
                }
            }
        }
        unresolved.journals_without_quartile = missing_q.into_iter().collect();
        unresolved.venues_without_type = untyped.into_iter().collect();
        Self {
            rows,
            corpus,
            venue_types,
            unresolved,
        }
    }

    fn h_index(&self, row: &HvRow) -> Option<f64> {
        self.corpus
            .metrics
            .get(&row.scholar_id)
            .map(|m| f64::from(m.h_index))
    }

    fn is_journal(&self, venue: &str) -> bool {
        self.venue_types.get(venue) == Some(&VenueType::Journal)
    }

    /// Quartile of a ranked journal; `None` for anything else.
    fn journal_quartile(&self, venue: &str) -> Option<Quartile> {
        if self.is_journal(venue) {
            self.corpus.rankings.get(venue).copied()
        } else {
            None
        }
    }
}

/// Distinct journals in a scholar's timeline, in first-appearance order.
fn scholar_journals(
    corpus: &Corpus,
    scholar_id: &str,
    types: &BTreeMap<String, VenueType>,
) -> Vec<String> {
    let mut seen = BTreeSet::new();
    corpus
        .timeline(scholar_id)
        .unwrap_or_default()
        .iter()
        .filter(|r| {
            types.get(&r.venue_id) == Some(&VenueType::Journal) && seen.insert(r.venue_id.clone())
        })
        .map(|r| r.venue_id.clone())
        .collect()
}

fn r2_groups(j: &Joined) -> Vec<NamedTest> {
    let (mut pl, mut other) = (Vec::new(), Vec::new());
    for row in j.rows {
        if let Some(r2) = row.r2_adj {
            if row.best_family.is_power_law() {
                pl.push(r2)
            } else {
                other.push(r2)
            }
        }
    }
    let groups = ["power_law_best", "other_best"];
    vec![
        NamedTest::new("r2_groups_t", &groups, two_sample_t(&pl, &other)),
        NamedTest::new(
            "r2_groups_mann_whitney",
            &groups,
            mann_whitney_u(&pl, &other),
        ),
    ]
}

fn h_index_hv(j: &Joined) -> NamedTest {
    let (mut hv, mut none) = (Vec::new(), Vec::new());
    for row in j.rows {
        if let Some(h) = j.h_index(row) {
            if row.hv_venues.is_empty() {
                none.push(h)
            } else {
                hv.push(h)
            }
        }
    }
    NamedTest::new(
        "h_index_hv",
        &["with_hv", "without_hv"],
        mann_whitney_u(&hv, &none),
    )
}

fn h_index_hv_count(j: &Joined) -> NamedTest {
    let mut groups = vec![Vec::new(); 4];
    for row in j.rows {
        if let (Some(bucket), Some(h)) = (
            HvCountBucket::from_count(row.hv_venues.len()),
            j.h_index(row),
        ) {
            groups[bucket as usize].push(h);
        }
    }
    let (names, groups): (Vec<&str>, Vec<Vec<f64>>) = HvCountBucket::ALL
        .iter()
        .zip(groups)
        .filter(|(_, g)| !g.is_empty())
        .map(|(b, g)| (b.label(), g))
        .unzip();
    NamedTest::new("h_index_hv_count", &names, kruskal_wallis(&groups))
}

/// Scholars whose home-venue set is a single ranked journal, and scholars
/// whose leading home venue is a ranked journal.
type Members<'a> = Vec<(&'a HvRow, Quartile)>;

fn journal_hv_quartiles<'a>(j: &Joined<'a>) -> (Members<'a>, Members<'a>) {
    let single = j
        .rows
        .iter()
        .filter(|r| r.hv_venues.len() == 1)
        .filter_map(|r| j.journal_quartile(&r.hv_venues[0]).map(|q| (r, q)))
        .collect();
    let leading = j
        .rows
        .iter()
        .filter_map(|r| {
            r.leading_hv
                .as_deref()
                .and_then(|v| j.journal_quartile(v))
                .map(|q| (r, q))
        })
        .collect();
    (single, leading)
}

fn quartile_section(j: &Joined) -> QuartileSection {
    let mut pool = BTreeSet::new();
    for row in j.rows {
        pool.extend(scholar_journals(j.corpus, &row.scholar_id, &j.venue_types));
    }
    let pool: Vec<Quartile> = pool
        .iter()
        .filter_map(|v| j.corpus.rankings.get(v).copied())
        .collect();
    let (single, leading) = journal_hv_quartiles(j);
    let columns = [
        ("journals".to_string(), pool),
        (
            "single_hv".to_string(),
            single.iter().map(|(_, q)| *q).collect(),
        ),
        (
            "leading_hv".to_string(),
            leading.iter().map(|(_, q)| *q).collect(),
        ),
    ];
    let names: Vec<&str> = columns.iter().map(|(n, _)| n.as_str()).collect();
    let table = quartile_table(&columns);
    let contingency = table.contingency();
    let chi_square = NamedTest::new(
        "quartile_chi_square",
        &names,
        chi_square_independence(&contingency),
    );
    let posthoc_rows = chi_square_posthoc(&table.counts, PosthocPairing::Rows).ok();
    QuartileSection {
        table,
        chi_square,
        posthoc_rows,
    }
}

fn h_index_trend(j: &Joined) -> Vec<NamedTest> {
    let (single, leading) = journal_hv_quartiles(j);
    let trend = |name: &str, members: &[(&HvRow, Quartile)]| {
        let mut groups = vec![Vec::new(); 4];
        for (row, q) in members {
            if let Some(h) = j.h_index(row) {
                groups[usize::from(q.numeric()) - 1].push(h);
            }
        }
        let (names, groups): (Vec<&str>, Vec<Vec<f64>>) = ["Q1", "Q2", "Q3", "Q4"]
            .into_iter()
            .zip(groups)
            .filter(|(_, g)| !g.is_empty())
            .unzip();
        NamedTest::new(
            name,
            &names,
            jonckheere_terpstra(&groups, TrendAlternative::Decreasing),
        )
    };
    vec![
        trend("h_index_trend_single_hv", &single),
        trend("h_index_trend_leading_hv", &leading),
    ]
}

fn median_q(j: &Joined) -> MedianQSummary {
    let mut comparisons = BTreeMap::new();
    for row in j.rows {
        let hv_set: BTreeSet<&String> = row.hv_venues.iter().collect();
        let (mut hv, mut nonhv) = (Vec::new(), Vec::new());
        for v in scholar_journals(j.corpus, &row.scholar_id, &j.venue_types) {
            if let Some(q) = j.corpus.rankings.get(&v) {
                if hv_set.contains(&v) {
                    hv.push(*q)
                } else {
                    nonhv.push(*q)
                }
            }
        }
        if let Ok(c) = median_q_comparison(&hv, &nonhv) {
            comparisons.insert(row.scholar_id.clone(), c);
        }
    }
    let count = |g: MedianGroup| comparisons.values().filter(|c| c.group == g).count();
    MedianQSummary {
        n_scholars: comparisons.len(),
        hv_higher: count(MedianGroup::HvHigher),
        equal: count(MedianGroup::Equal),
        nonhv_higher: count(MedianGroup::NonHvHigher),
        comparisons,
    }
}

fn sigmoid_section(curve_path: &Path) -> Result<SigmoidSection, CliError> {
    let mut r = csv::Reader::from_path(curve_path).map_err(|e| CliError::input(curve_path, e))?;
    let mut points = Vec::new();
    for row in r.deserialize::<PortionPoint>() {
        let p = row.map_err(|e| CliError::input(curve_path, e))?;
        if p.n_pubs <= SIGMOID_MAX_X {
            points.push((p.n_pubs as f64, p.portion));
        }
    }
    let (fit, error) = match sigmoid_fit(&points) {
        Ok(fit) => (Some(fit), None),
        Err(StatsError::ConvergenceFailure { best }) => {
            (Some(*best), Some("did not converge; best fit kept".into()))
        }
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SigmoidSection {
        max_x: SIGMOID_MAX_X,
        n_points: points.len(),
        fit,
        error,
    })
}

fn write_quartile_table(path: &Path, table: &QuartileTable) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(crate::create_file(path)?);
    let io = |e: csv::Error| CliError::output(path, e.into());
    let mut header = vec!["quartile".to_string()];
    for c in &table.columns {
        header.push(format!("{c}_count"));
        header.push(format!("{c}_proportion"));
    }
    w.write_record(&header).map_err(io)?;
    for (i, (counts, props)) in table.counts.iter().zip(&table.proportions).enumerate() {
        let mut record = vec![format!("Q{}", i + 1)];
        for (n, p) in counts.iter().zip(props) {
            record.push(n.to_string());
            record.push(p.to_string());
        }
        w.write_record(&record).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

fn write_partition(path: &Path, partition: &HvTypePartition) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(crate::create_file(path)?);
    let io = |e: csv::Error| CliError::output(path, e.into());
    w.write_record(["n_hvs", "category", "count"]).map_err(io)?;
    for bucket in HvCountBucket::ALL {
        for category in HvTypeCategory::ALL {
            w.write_record([
                bucket.label(),
                category.as_str(),
                &partition.get(bucket, category).to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

pub fn run(args: &StatsArgs) -> Result<Outcome, CliError> {
    let kinds: BTreeSet<TestKind> = if args.tests.is_empty() {
        TestKind::ALL.into_iter().collect()
    } else {
        args.tests.iter().copied().collect()
    };
    let corpus = archive::read(&args.archive)?;
    let hv_path = args.analysis.join(HV);
    let curve_path = args.analysis.join(PORTION_CURVE);
    let rows: Vec<HvRow> = read_jsonl(&hv_path)?;
    let mut inputs = archive::input_paths(&args.archive);
    inputs.push(hv_path);
    inputs.push(curve_path.clone());
    let config = serde_json::json!({ "tests": kinds });
    let manifest = ManifestBuilder::new("stats", config, &inputs, Vec::new())?;

    let joined = Joined::new(&rows, &corpus);
    if !joined.unresolved.scholars_without_metrics.is_empty() {
        warn!(
            "{} scholars without metrics",
            joined.unresolved.scholars_without_metrics.len()
        );
    }
    if !joined.unresolved.journals_without_quartile.is_empty() {
        warn!(
            "{} journals without a quartile",
            joined.unresolved.journals_without_quartile.len()
        );
    }

    let mut tests = Vec::new();
    if kinds.contains(&TestKind::R2Groups) {
        tests.extend(r2_groups(&joined));
    }
    if kinds.contains(&TestKind::HIndexHv) {
        tests.push(h_index_hv(&joined));
    }
    if kinds.contains(&TestKind::HIndexHvCount) {
        tests.push(h_index_hv_count(&joined));
    }
    if kinds.contains(&TestKind::HIndexTrend) {
        tests.extend(h_index_trend(&joined));
    }
    let quartiles = kinds
        .contains(&TestKind::QuartileChiSquare)
        .then(|| quartile_section(&joined));
    let median_q = kinds
        .contains(&TestKind::MedianQ)
        .then(|| median_q(&joined));
    let partition = kinds.contains(&TestKind::HvTypes).then(|| {
        hv_type_partition(
            rows.iter().map(|r| r.hv_venues.as_slice()),
            &joined.venue_types,
        )
    });
    let sigmoid = if kinds.contains(&TestKind::Sigmoid) {
        Some(sigmoid_section(&curve_path)?)
    } else {
        None
    };
    for t in &tests {
        if let Some(e) = &t.error {
            warn!("{}: {e}", t.name);
        }
    }

    let report = StatsReport {
        schema_version: SCHEMA_VERSION,
        run_id: manifest.run_id().to_string(),
        n_scholars: rows.len(),
        tests,
        quartiles,
        median_q,
        hv_type_partition: partition,
        sigmoid,
        unresolved: joined.unresolved,
    };
    crate::create_dir(&args.out)?;
    let mut outputs = vec![STATS];
    write_json(&args.out.join(STATS), &report)?;
    if let Some(q) = &report.quartiles {
        write_quartile_table(&args.out.join(QUARTILE_TABLE), &q.table)?;
        outputs.push(QUARTILE_TABLE);
    }
    if let Some(p) = &report.hv_type_partition {
        write_partition(&args.out.join(HV_TYPE_PARTITION), p)?;
        outputs.push(HV_TYPE_PARTITION);
    }
    manifest.finish(&args.out, &outputs)?;
    info!(
        "{} tests over {} scholars",
        report.tests.len(),
        report.n_scholars
    );
    Ok(Outcome::Success)
}
