//! Corpus archive: a directory of plain tables.
//!
//! | file            | content                                                   |
//! |-----------------|-----------------------------------------------------------|
//! | `records.csv`   | filtered records, scholar-id then `seq` order             |
//! | `rankings.csv`  | `venue_id,quartile`                                       |
//! | `metrics.csv`   | `scholar_id,h_index,n_publications,first_pub_year,academic_age` |
//! | `skips.jsonl`   | records dropped while parsing, one JSON object per line   |
//! | `manifest.json` | run manifest                                              |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use homevenue::ingest::{Corpus, PublicationRecord, Quartile, ScholarMetrics};

use crate::{create_file, CliError};

pub const RECORDS: &str = "records.csv";
pub const RANKINGS: &str = "rankings.csv";
pub const METRICS: &str = "metrics.csv";
pub const SKIPS: &str = "skips.jsonl";

pub const FILES: [&str; 4] = [RECORDS, RANKINGS, METRICS, SKIPS];

#[derive(Serialize, Deserialize)]
struct RankingRow {
    venue_id: String,
    quartile: Quartile,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create_file(path)?);
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::output(path, e.into()))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

/// Writes the table files (not the manifest) into `dir`.
pub fn write<S: Serialize>(dir: &Path, corpus: &Corpus, skips: &[S]) -> Result<(), CliError> {
    crate::create_dir(dir)?;
    write_csv(&dir.join(RECORDS), corpus.records())?;
    write_csv(
        &dir.join(RANKINGS),
        corpus.rankings.iter().map(|(v, q)| RankingRow {
            venue_id: v.clone(),
            quartile: *q,
        }),
    )?;
    let path = dir.join(METRICS);
    let mut w = csv::Writer::from_writer(create_file(&path)?);
    let io = |e: csv::Error| CliError::output(&path, e.into());
    w.write_record([
        "scholar_id",
        "h_index",
        "n_publications",
        "first_pub_year",
        "academic_age",
    ])
    .map_err(io)?;
    for (id, m) in &corpus.metrics {
        w.write_record([
            id.clone(),
            m.h_index.to_string(),
            m.n_publications.to_string(),
            m.first_pub_year.to_string(),
            m.academic_age.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::output(&path, e))?;
    crate::write_jsonl(&dir.join(SKIPS), skips)
}

fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::input(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| CliError::input(path, e)))
        .collect()
}

#[derive(Deserialize)]
struct MetricsIn {
    scholar_id: String,
    h_index: u32,
    n_publications: u32,
    first_pub_year: i32,
    academic_age: u32,
}

/// Paths of the table files, for manifest input digests.
pub fn input_paths(dir: &Path) -> Vec<PathBuf> {
    [RECORDS, RANKINGS, METRICS]
        .iter()
        .map(|f| dir.join(f))
        .collect()
}

pub fn read(dir: &Path) -> Result<Corpus, CliError> {
    if !dir.is_dir() {
        return Err(CliError::input(dir, "archive directory not found"));
    }
    let records_path = dir.join(RECORDS);
    let records: Vec<PublicationRecord> = read_csv(&records_path)?;
    let mut scholars: BTreeMap<String, Vec<PublicationRecord>> = BTreeMap::new();
    for rec in records {
        scholars
            .entry(rec.scholar_id.clone())
            .or_default()
            .push(rec);
    }
    for (id, timeline) in &scholars {
        if timeline.iter().enumerate().any(|(i, r)| r.seq != i) {
            return Err(CliError::input(
                &records_path,
                format!("records of `{id}` are not in seq order 0..n-1"),
            ));
        }
    }
    let rankings = read_csv::<RankingRow>(&dir.join(RANKINGS))?
        .into_iter()
        .map(|r| (r.venue_id, r.quartile))
        .collect();
    let metrics = read_csv::<MetricsIn>(&dir.join(METRICS))?
        .into_iter()
        .map(|m| {
            (
                m.scholar_id,
                ScholarMetrics {
                    h_index: m.h_index,
                    n_publications: m.n_publications,
                    first_pub_year: m.first_pub_year,
                    academic_age: m.academic_age,
                },
            )
        })
        .collect();
    Ok(Corpus {
        scholars,
        rankings,
        metrics,
    })
}
