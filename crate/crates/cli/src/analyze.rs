//! `analyze`: per-scholar classification, home venues, emergence and α series.
//!
//! Outputs, all in scholar-id order:
//!
//! | file                 | content                                               |
//! |----------------------|-------------------------------------------------------|
//! | `hv.jsonl`           | one [`HvRow`] per analysed scholar                    |
//! | `emergence.jsonl`    | per-prefix classifications, one [`EmergenceRow`] each |
//! | `trajectories.jsonl` | post-emergence α series                               |
//! | `portion_curve.csv`  | power-law-best share by publication count             |
//! | `summary.json`       | family portions and adjusted-R² summaries             |
//! | `errors.jsonl`       | per-scholar failures                                  |

use std::collections::BTreeMap;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use homevenue::cohort::pareto_portion_curve;
use homevenue::distfit::{
    build_distribution, classify, fit_family, fit_family_mle, ClassifyOptions, Family, FitMethod,
    FitResult,
};
use homevenue::homevenue::{
    alpha_series, emergence_point, identify_home_venues, AlphaTrajectory, HvError, PrefixOutcome,
};
use homevenue::ingest::PublicationRecord;

use crate::manifest::ManifestBuilder;
use crate::{
    archive, mean_sd, parse_families, write_json, write_jsonl, AnalyzeArgs, CliError, Outcome,
    SCHEMA_VERSION,
};

pub const HV: &str = "hv.jsonl";
pub const EMERGENCE: &str = "emergence.jsonl";
pub const TRAJECTORIES: &str = "trajectories.jsonl";
pub const PORTION_CURVE: &str = "portion_curve.csv";
pub const SUMMARY: &str = "summary.json";
pub const ERRORS: &str = "errors.jsonl";

const FILES: [&str; 6] = [HV, EMERGENCE, TRAJECTORIES, PORTION_CURVE, SUMMARY, ERRORS];

/// Settings shared by every scholar of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeConfig {
    pub method: FitMethod,
    /// Power-law families to compare; the first competes in classification.
    pub families: Vec<Family>,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            method: FitMethod::LeastSquares,
            families: vec![Family::Pareto],
        }
    }
}

impl AnalyzeConfig {
    pub fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            method: self.method,
            power_law: self.families[0],
            ..ClassifyOptions::default()
        }
    }

    fn alt_method(&self) -> FitMethod {
        match self.method {
            FitMethod::LeastSquares => FitMethod::Mle,
            FitMethod::Mle => FitMethod::LeastSquares,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvRow {
    pub schema_version: u32,
    pub run_id: String,
    pub scholar_id: String,
    pub n_pubs: usize,
    pub n_venues: usize,
    pub best_family: Family,
    /// Adjusted R² of the best fit; `null` when undefined.
    pub r2_adj: Option<f64>,
    pub fits: BTreeMap<Family, FitResult>,
    pub k_star: Option<usize>,
    pub hv_venues: Vec<String>,
    pub leading_hv: Option<String>,
    pub alpha: Option<f64>,
    pub emergence_seq: Option<usize>,
    /// Best of the `--families` list on the full distribution, when more
    /// than one was given and at least three venues exist.
    pub family_winner: Option<Family>,
    /// Best family under the other fitting method.
    pub alt_method_best: Option<Family>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergenceRow {
    pub schema_version: u32,
    pub scholar_id: String,
    pub emergence_seq: Option<usize>,
    pub per_prefix: Vec<PrefixOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub schema_version: u32,
    #[serde(flatten)]
    pub trajectory: AlphaTrajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub schema_version: u32,
    pub scholar_id: String,
    pub stage: String,
    pub error: String,
}

/// Everything computed for one scholar.
#[derive(Debug, Clone, PartialEq)]
pub struct ScholarAnalysis {
    pub hv: HvRow,
    /// `None` for careers shorter than the first scanned prefix.
    pub emergence: Option<EmergenceRow>,
    pub trajectory: Option<AlphaTrajectory>,
    pub errors: Vec<ErrorRow>,
}

fn error_row(scholar_id: &str, stage: &str, error: impl std::fmt::Display) -> ErrorRow {
    ErrorRow {
        schema_version: SCHEMA_VERSION,
        scholar_id: scholar_id.into(),
        stage: stage.into(),
        error: error.to_string(),
    }
}

fn family_winner(
    dist: &homevenue::distfit::PublicationDistribution,
    cfg: &AnalyzeConfig,
    opts: &ClassifyOptions,
) -> Option<Family> {
    if cfg.families.len() < 2 {
        return None;
    }
    let mut best: Option<(Family, f64)> = None;
    for &family in &cfg.families {
        let fit = match cfg.method {
            FitMethod::LeastSquares => fit_family(dist, family, &opts.fit),
            FitMethod::Mle => fit_family_mle(dist, family, &opts.fit),
        };
        if let Ok(fit) = fit {
            if best.is_none_or(|(_, score)| fit.r2_adj > score) {
                best = Some((family, fit.r2_adj));
            }
        }
    }
    best.map(|(f, _)| f)
}

/// Runs the whole per-scholar pipeline. `Err` only when the full-career
/// classification fails; later stages record their failures in `errors`.
pub fn analyze_scholar(
    scholar_id: &str,
    timeline: &[PublicationRecord],
    cfg: &AnalyzeConfig,
    run_id: &str,
) -> Result<ScholarAnalysis, ErrorRow> {
    let opts = cfg.classify_options();
    let dist = build_distribution(timeline, timeline.len())
        .map_err(|e| error_row(scholar_id, "distribution", e))?;
    let hv =
        identify_home_venues(&dist, &opts).map_err(|e| error_row(scholar_id, "home_venue", e))?;
    let mut errors = Vec::new();

    let alt_opts = ClassifyOptions {
        method: cfg.alt_method(),
        ..opts
    };
    let alt_method_best = match classify(&dist, &alt_opts) {
        Ok(c) => Some(c.best),
        Err(e) => {
            errors.push(error_row(scholar_id, "alt_method", e));
            None
        }
    };
    let fits = match classify(&dist, &opts) {
        Ok(c) => c.fits,
        Err(e) => {
            errors.push(error_row(scholar_id, "fits", e));
            BTreeMap::new()
        }
    };

    let (emergence, trajectory) = match emergence_point(timeline, &opts) {
        Ok(em) => {
            let trajectory = match alpha_series(timeline, &em, &opts) {
                Ok(t) => Some(t),
                Err(HvError::NoEmergence) => None,
                Err(e) => {
                    errors.push(error_row(scholar_id, "alpha_series", e));
                    None
                }
            };
            let row = EmergenceRow {
                schema_version: SCHEMA_VERSION,
                scholar_id: scholar_id.into(),
                emergence_seq: em.emergence_seq,
                per_prefix: em.per_prefix,
            };
            (Some(row), trajectory)
        }
        Err(HvError::TooShort { .. }) => (None, None),
        Err(e) => {
            errors.push(error_row(scholar_id, "emergence", e));
            (None, None)
        }
    };

    let hv = HvRow {
        schema_version: SCHEMA_VERSION,
        run_id: run_id.into(),
        scholar_id: scholar_id.into(),
        n_pubs: timeline.len(),
        n_venues: dist.n_venues(),
        best_family: hv.best_family,
        r2_adj: hv.r2_adj.is_finite().then_some(hv.r2_adj),
        fits,
        k_star: hv.k_star,
        hv_venues: hv.hv_venues,
        leading_hv: hv.leading_hv,
        alpha: hv.alpha,
        emergence_seq: emergence.as_ref().and_then(|e| e.emergence_seq),
        family_winner: family_winner(&dist, cfg, &opts),
        alt_method_best,
    };
    Ok(ScholarAnalysis {
        hv,
        emergence,
        trajectory,
        errors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub family: Family,
    pub n: usize,
    /// Share of analysed scholars, in [0, 1].
    pub portion: f64,
    /// Over scholars with a defined adjusted R².
    pub r2_adj_mean: Option<f64>,
    pub r2_adj_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRate {
    pub family: Family,
    pub wins: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub run_id: String,
    pub method: FitMethod,
    pub families: Vec<Family>,
    pub n_scholars: usize,
    pub n_analysed: usize,
    pub n_failed: usize,
    pub n_with_hv: usize,
    pub n_emerged: usize,
    /// Share of analysed scholars whose best family is the power-law candidate.
    pub power_law_portion: f64,
    /// One row per best family, in family order.
    pub by_family: Vec<FamilySummary>,
    /// Head-to-head winners among `families`; empty for a single family.
    pub family_win_rates: Vec<WinRate>,
    /// Share of scholars classified identically by both fitting methods.
    pub method_agreement: Option<f64>,
}

fn summarize(rows: &[HvRow], cfg: &AnalyzeConfig, n_scholars: usize, run_id: &str) -> Summary {
    let n = rows.len();
    let share = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let mut by_best: BTreeMap<Family, Vec<Option<f64>>> = BTreeMap::new();
    for row in rows {
        by_best.entry(row.best_family).or_default().push(row.r2_adj);
    }
    let by_family = by_best
        .into_iter()
        .map(|(family, r2)| {
            let finite: Vec<f64> = r2.iter().flatten().copied().collect();
            let ms = mean_sd(&finite);
            FamilySummary {
                family,
                n: r2.len(),
                portion: share(r2.len()),
                r2_adj_mean: ms.map(|m| m.0),
                r2_adj_sd: ms.map(|m| m.1),
            }
        })
        .collect();
    let contested: Vec<Family> = rows.iter().filter_map(|r| r.family_winner).collect();
    let family_win_rates = if cfg.families.len() > 1 {
        cfg.families
            .iter()
            .map(|&family| {
                let wins = contested.iter().filter(|&&f| f == family).count();
                let rate = if contested.is_empty() {
                    0.0
                } else {
                    wins as f64 / contested.len() as f64
                };
                WinRate { family, wins, rate }
            })
            .collect()
    } else {
        Vec::new()
    };
    let compared: Vec<bool> = rows
        .iter()
        .filter_map(|r| r.alt_method_best.map(|alt| alt == r.best_family))
        .collect();
    let method_agreement = (!compared.is_empty())
        .then(|| compared.iter().filter(|&&b| b).count() as f64 / compared.len() as f64);
    Summary {
        schema_version: SCHEMA_VERSION,
        run_id: run_id.into(),
        method: cfg.method,
        families: cfg.families.clone(),
        n_scholars,
        n_analysed: n,
        n_failed: n_scholars - n,
        n_with_hv: rows.iter().filter(|r| !r.hv_venues.is_empty()).count(),
        n_emerged: rows.iter().filter(|r| r.emergence_seq.is_some()).count(),
        power_law_portion: share(
            rows.iter()
                .filter(|r| r.best_family == cfg.families[0])
                .count(),
        ),
        by_family,
        family_win_rates,
        method_agreement,
    }
}

fn write_portion_curve(path: &Path, emergence: &[EmergenceRow]) -> Result<(), CliError> {
    let curve = if emergence.is_empty() {
        Vec::new()
    } else {
        pareto_portion_curve(emergence.iter().map(|e| e.per_prefix.as_slice()))
            .map_err(|e| CliError::output(path, std::io::Error::other(e.to_string())))?
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(crate::create_file(path)?);
    w.write_record(["n_pubs", "portion", "n_scholars"])
        .map_err(|e| CliError::output(path, e.into()))?;
    for p in curve {
        w.serialize(p)
            .map_err(|e| CliError::output(path, e.into()))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

pub fn run(args: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let families = parse_families(&args.families)?;
    if let Some(f) = families.iter().find(|f| !f.is_power_law()) {
        return Err(CliError::Usage(format!(
            "--families takes power-law families (pareto, exponential, frechet), got `{f}`"
        )));
    }
    let cfg = AnalyzeConfig {
        method: args.method.into(),
        families,
    };
    let corpus = archive::read(&args.archive)?;
    let config = serde_json::json!({
        "method": cfg.method,
        "families": cfg.families,
    });
    let manifest = ManifestBuilder::new(
        "analyze",
        config,
        &archive::input_paths(&args.archive),
        Vec::new(),
    )?;
    let run_id = manifest.run_id().to_string();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", args.workers)))?;
    info!(
        "analysing {} scholars on {} workers",
        corpus.n_scholars(),
        pool.current_num_threads()
    );
    let scholars: Vec<(&String, &Vec<PublicationRecord>)> = corpus.scholars.iter().collect();
    let results: Vec<Result<ScholarAnalysis, ErrorRow>> = pool.install(|| {
        scholars
            .par_iter()
            .map(|(id, timeline)| analyze_scholar(id, timeline, &cfg, &run_id))
            .collect()
    });

    let mut hv_rows = Vec::new();
    let mut emergence_rows = Vec::new();
    let mut trajectories = Vec::new();
    let mut errors = Vec::new();
    for result in results {
        match result {
            Ok(a) => {
                hv_rows.push(a.hv);
                emergence_rows.extend(a.emergence);
                trajectories.extend(a.trajectory.map(|trajectory| TrajectoryRow {
                    schema_version: SCHEMA_VERSION,
                    trajectory,
                }));
                errors.extend(a.errors);
            }
            Err(e) => errors.push(e),
        }
    }
    for e in &errors {
        warn!("{} [{}]: {}", e.scholar_id, e.stage, e.error);
    }

    crate::create_dir(&args.out)?;
    write_jsonl(&args.out.join(HV), &hv_rows)?;
    write_jsonl(&args.out.join(EMERGENCE), &emergence_rows)?;
    write_jsonl(&args.out.join(TRAJECTORIES), &trajectories)?;
    write_portion_curve(&args.out.join(PORTION_CURVE), &emergence_rows)?;
    write_json(
        &args.out.join(SUMMARY),
        &summarize(&hv_rows, &cfg, corpus.n_scholars(), &run_id),
    )?;
    write_jsonl(&args.out.join(ERRORS), &errors)?;
    manifest.finish(&args.out, &FILES)?;
    info!(
        "{} scholars analysed, {} errors",
        hv_rows.len(),
        errors.len()
    );
    Ok(if errors.is_empty() {
        Outcome::Success
    } else {
        Outcome::Partial
    })
}
