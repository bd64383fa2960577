//! `cluster`: k-means over post-emergence α series from an analysis.

use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use homevenue::trajectory::{
    elbow_from_inertias, extract_normalized_series, inertia_curve, label_patterns, ts_kmeans,
    ClusterModel, Pattern, RejectReason, SeriesOptions, SeriesOutcome, SERIES_LEN,
};

use crate::analyze::{TrajectoryRow, TRAJECTORIES};
use crate::manifest::ManifestBuilder;
use crate::{read_jsonl, write_json, CliError, ClusterArgs, KArg, Outcome, SCHEMA_VERSION};

pub const CLUSTER: &str = "cluster.json";
pub const CENTROIDS: &str = "centroids.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub pattern: Pattern,
    pub size: usize,
    /// Percent of clustered series.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub schema_version: u32,
    pub run_id: String,
    pub k: usize,
    pub k_selection: String,
    /// `(k, inertia)` over the scanned range when `k` was chosen by elbow.
    pub inertia_curve: Vec<(usize, f64)>,
    pub tau: f64,
    pub z_normalize: bool,
    pub n_trajectories: usize,
    pub n_clustered: usize,
    pub n_rejected_too_short: usize,
    pub n_rejected_no_values: usize,
    pub clusters: Vec<ClusterSummary>,
    pub model: ClusterModel,
}

fn write_centroids(path: &Path, model: &ClusterModel) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(crate::create_file(path)?);
    let io = |e: csv::Error| CliError::output(path, e.into());
    let mut header = vec!["cluster".to_string(), "stat".to_string()];
    header.extend((1..=SERIES_LEN).map(|i| format!("p{i}")));
    w.write_record(&header).map_err(io)?;
    for (c, (mean, sd)) in model.centroids.iter().zip(&model.spread).enumerate() {
        for (stat, row) in [("mean", mean), ("sd", sd)] {
            let mut record = vec![c.to_string(), stat.to_string()];
            record.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&record).map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

pub fn run(args: &ClusterArgs) -> Result<Outcome, CliError> {
    let input = args.analysis.join(TRAJECTORIES);
    let rows: Vec<TrajectoryRow> = read_jsonl(&input)?;
    let opts = SeriesOptions {
        z_normalize: args.z_normalize,
    };
    let (mut series, mut too_short, mut no_values) = (Vec::new(), 0, 0);
    for row in &rows {
        match extract_normalized_series(&row.trajectory, &opts) {
            SeriesOutcome::Accepted(s) => series.push(s),
            SeriesOutcome::Rejected {
                reason: RejectReason::TooShort,
                ..
            } => too_short += 1,
            SeriesOutcome::Rejected {
                reason: RejectReason::NoValues,
                ..
            } => no_values += 1,
        }
    }
    info!("{} of {} trajectories eligible", series.len(), rows.len());

    let needed = match args.k {
        KArg::Fixed(k) => k,
        KArg::Auto => 3,
    };
    if series.len() < needed {
        return Err(CliError::input(
            &input,
            format!(
                "{} eligible trajectories, need at least {needed}; a trajectory is eligible when it has \
                 at least {SERIES_LEN} post-emergence points ({too_short} too short, {no_values} without any α)",
                series.len()
            ),
        ));
    }

    let config = serde_json::json!({
        "k": match args.k { KArg::Fixed(k) => serde_json::json!(k), KArg::Auto => serde_json::json!("auto") },
        "k_max": args.k_max,
        "z_normalize": args.z_normalize,
        "tau": args.tau,
    });
    let manifest = ManifestBuilder::new(
        "cluster",
        config,
        std::slice::from_ref(&input),
        vec![args.seed],
    )?;

    let cluster_err = |e: homevenue::trajectory::ClusterError| CliError::input(&input, e);
    let (k, k_selection, curve) = match args.k {
        KArg::Fixed(k) => (k, "fixed".to_string(), Vec::new()),
        KArg::Auto => {
            let end = args.k_max.min(series.len());
            if end < 3 {
                return Err(CliError::Usage(format!(
                    "--k auto needs --k-max of at least 3, got {}",
                    args.k_max
                )));
            }
            let curve = inertia_curve(&series, 1..=end, args.seed).map_err(cluster_err)?;
            let inertias: Vec<f64> = curve.iter().map(|c| c.1).collect();
            let k = curve[elbow_from_inertias(&inertias).expect("at least three k values")].0;
            (k, "elbow".to_string(), curve)
        }
    };
    let mut model = ts_kmeans(&series, k, args.seed).map_err(cluster_err)?;
    model.labels = label_patterns(&model, args.tau);
    let clusters = model
        .sizes
        .iter()
        .zip(model.shares())
        .enumerate()
        .map(|(c, (&size, share))| ClusterSummary {
            pattern: model.labels[&c],
            size,
            share,
        })
        .collect();

    let report = ClusterReport {
        schema_version: SCHEMA_VERSION,
        run_id: manifest.run_id().to_string(),
        k,
        k_selection,
        inertia_curve: curve,
        tau: args.tau,
        z_normalize: args.z_normalize,
        n_trajectories: rows.len(),
        n_clustered: series.len(),
        n_rejected_too_short: too_short,
        n_rejected_no_values: no_values,
        clusters,
        model,
    };
    crate::create_dir(&args.out)?;
    write_json(&args.out.join(CLUSTER), &report)?;
    write_centroids(&args.out.join(CENTROIDS), &report.model)?;
    manifest.finish(&args.out, &[CLUSTER, CENTROIDS])?;
    info!("k = {k}, shares {:?}", report.model.shares());
    Ok(Outcome::Success)
}
