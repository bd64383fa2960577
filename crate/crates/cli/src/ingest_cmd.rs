use std::fs::File;
use std::io::BufReader;

use log::info;
use serde::Serialize;

use homevenue::ingest::{
    filter_corpus, load_rankings, load_scholar_metrics, parse_dblp_stream, FilterOptions,
    IngestConfig, SkippedRecord,
};

use crate::manifest::{ManifestBuilder, MANIFEST_FILE};
use crate::{archive, CliError, IngestArgs, Outcome};

#[derive(Serialize)]
struct SkipRow<'a> {
    file: String,
    #[serde(flatten)]
    skip: &'a SkippedRecord,
}

fn open(path: &std::path::Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::input(path, e))
}

pub fn run(args: &IngestArgs) -> Result<Outcome, CliError> {
    let filter = FilterOptions {
        min_pubs: args.filter.min_pubs,
        exclude_informal: args.filter.exclude_informal,
        first_author_only: args.filter.first_author_only,
    };
    // fail on unreadable tables before the long XML pass
    let rankings = match &args.rankings {
        Some(p) => load_rankings(open(p)?).map_err(|e| CliError::input(p, e))?,
        None => Default::default(),
    };
    let metrics = match &args.metrics {
        Some(p) => load_scholar_metrics(open(p)?, args.reference_year)
            .map_err(|e| CliError::input(p, e))?,
        None => Default::default(),
    };

    let mut records = Vec::new();
    let mut skip_rows = Vec::new();
    for path in &args.xml {
        let mut reader = parse_dblp_stream(BufReader::new(open(path)?), IngestConfig::default());
        for rec in reader.by_ref() {
            records.push(rec.map_err(|e| CliError::input(path, e))?);
        }
        let skipped = reader.into_skipped();
        info!("{}: {} skipped records", path.display(), skipped.len());
        skip_rows.extend(skipped.into_iter().map(|s| (path.display().to_string(), s)));
    }
    info!("parsed {} author-publication records", records.len());

    let mut corpus =
        filter_corpus(records, &filter).map_err(|e| CliError::input(&args.xml[0], e))?;
    corpus.rankings = rankings;
    corpus.metrics = metrics;
    info!(
        "{} scholars, {} publications after filtering",
        corpus.n_scholars(),
        corpus.n_publications()
    );

    let mut inputs = args.xml.clone();
    inputs.extend(args.rankings.iter().cloned());
    inputs.extend(args.metrics.iter().cloned());
    let config = serde_json::json!({
        "min_pubs": filter.min_pubs,
        "exclude_informal": filter.exclude_informal,
        "first_author_only": filter.first_author_only,
        "reference_year": args.reference_year,
    });
    let manifest = ManifestBuilder::new("ingest", config, &inputs, Vec::new())?;
    let skips: Vec<SkipRow> = skip_rows
        .iter()
        .map(|(file, skip)| SkipRow {
            file: file.clone(),
            skip,
        })
        .collect();
    archive::write(&args.out, &corpus, &skips)?;
    manifest.finish(&args.out, &archive::FILES)?;
    info!("wrote {}", args.out.join(MANIFEST_FILE).display());
    Ok(Outcome::Success)
}
