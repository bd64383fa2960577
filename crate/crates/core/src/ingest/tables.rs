//! CSV loaders for the venue-rankings and scholar-metrics tables.

use std::collections::BTreeMap;
use std::io::Read;

use super::{IngestError, Quartile, ScholarMetrics};

struct Table<R: Read> {
    reader: csv::Reader<R>,
    columns: Vec<usize>,
}

impl<R: Read> Table<R> {
    fn open(source: R, required: &[&str]) -> Result<Self, IngestError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = reader.headers().map_err(|e| table_error(&e, 1))?.clone();
        let columns = required
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h == *name)
                    .ok_or_else(|| IngestError::MissingColumn((*name).to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { reader, columns })
    }

    /// Yields `(line, fields)` with fields in `required` order.
    fn rows(&mut self) -> impl Iterator<Item = Result<(u64, Vec<String>), IngestError>> + '_ {
        let columns = self.columns.clone();
        self.reader.records().map(move |row| {
            let row = row.map_err(|e| table_error(&e, 0))?;
            let line = row.position().map_or(0, |p| p.line());
            let fields = columns
                .iter()
                .map(|&i| {
                    row.get(i)
                        .map(str::to_string)
                        .ok_or_else(|| IngestError::Table {
                            line,
                            message: "row has too few fields".into(),
                        })
                })
                .collect::<Result<_, _>>()?;
            Ok((line, fields))
        })
    }
}

fn table_error(e: &csv::Error, fallback_line: u64) -> IngestError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    IngestError::Table {
        line,
        message: e.to_string(),
    }
}

/// Reads a `venue_id,quartile` table. Repeated venues must agree.
pub fn load_rankings<R: Read>(source: R) -> Result<BTreeMap<String, Quartile>, IngestError> {
    let mut table = Table::open(source, &["venue_id", "quartile"])?;
    let mut out = BTreeMap::new();
    for row in table.rows() {
        let (line, fields) = row?;
        let q: Quartile = fields[1]
            .parse()
            .map_err(|message| IngestError::Table { line, message })?;
        match out.insert(fields[0].clone(), q) {
            Some(prev) if prev != q => {
                return Err(IngestError::Table {
                    line,
                    message: format!("venue `{}` listed as both {prev} and {q}", fields[0]),
                })
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Reads a `scholar_id,h_index,n_publications,first_pub_year` table and
/// derives academic age relative to `reference_year`.
pub fn load_scholar_metrics<R: Read>(
    source: R,
    reference_year: i32,
) -> Result<BTreeMap<String, ScholarMetrics>, IngestError> {
    let mut table = Table::open(
        source,
        &["scholar_id", "h_index", "n_publications", "first_pub_year"],
    )?;
    let mut out = BTreeMap::new();
    for row in table.rows() {
        let (line, fields) = row?;
        let num = |i: usize, what: &str| -> Result<i64, IngestError> {
            fields[i].parse::<i64>().map_err(|_| IngestError::Table {
                line,
                message: format!("{what} `{}` is not an integer", fields[i]),
            })
        };
        let h_index = num(1, "h_index")?;
        let n_publications = num(2, "n_publications")?;
        let first_pub_year = num(3, "first_pub_year")?;
        if h_index < 0 || n_publications < 1 {
            return Err(IngestError::Table {
                line,
                message: "h_index must be >= 0 and n_publications >= 1".into(),
            });
        }
        let age = i64::from(reference_year) - first_pub_year;
        if age < 0 {
            return Err(IngestError::Table {
                line,
                message: format!(
                    "first_pub_year {first_pub_year} is after reference year {reference_year}"
                ),
            });
        }
        out.insert(
            fields[0].clone(),
            ScholarMetrics {
                h_index: h_index as u32,
                n_publications: n_publications as u32,
                first_pub_year: first_pub_year as i32,
                academic_age: age as u32,
            },
        );
    }
    Ok(out)
}
