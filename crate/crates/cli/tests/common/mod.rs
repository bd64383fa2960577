#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const EPOCH: &str = "1700000000";

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini")
}

/// Runs the binary in `cwd` with a pinned clock and quiet logging.
pub fn run_in(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homevenue"))
        .args(args)
        .current_dir(cwd)
        .env("SOURCE_DATE_EPOCH", EPOCH)
        .env("HOMEVENUE_LOG", "error")
        .output()
        .expect("binary runs")
}

pub fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Temp dir holding copies of the fixture inputs under their plain names.
pub fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in ["dblp.xml", "rankings.csv", "metrics.csv"] {
        std::fs::copy(fixture_dir().join(f), dir.path().join(f)).unwrap();
    }
    dir
}

pub fn ingest_fixture(dir: &Path) {
    ok(&run_in(
        dir,
        &[
            "ingest",
            "--xml",
            "dblp.xml",
            "--rankings",
            "rankings.csv",
            "--metrics",
            "metrics.csv",
            "--out",
            "archive",
        ],
    ));
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Vec<T> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Relative path and contents of every file under `root`, sorted.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/");
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// Independent classifier for share curves: Pareto by grid search plus
/// golden-section refinement, linear by closed-form OLS.
pub mod oracle {
    fn adjusted(obs: &[f64], fit: &[f64], p: usize) -> f64 {
        let n = obs.len();
        let mean = obs.iter().sum::<f64>() / n as f64;
        let sst: f64 = obs.iter().map(|o| (o - mean).powi(2)).sum();
        let ssr: f64 = obs.iter().zip(fit).map(|(o, f)| (o - f).powi(2)).sum();
        let scale: f64 = obs.iter().map(|o| o * o).sum();
        let exact = ssr <= 1e-24 * scale;
        if sst <= 1e-20 * scale || n <= p + 1 {
            return if exact { 1.0 } else { f64::NEG_INFINITY };
        }
        1.0 - (ssr / sst) * (n as f64 - 1.0) / (n - p - 1) as f64
    }

    fn pareto_sse(x: &[f64], y: &[f64], a: f64) -> f64 {
        x.iter()
            .zip(y)
            .map(|(xi, yi)| (yi - a * xi.powf(-(a + 1.0))).powi(2))
            .sum()
    }

    pub fn pareto_alpha(x: &[f64], y: &[f64]) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..=20_000 {
            let a = i as f64 * 1e-3;
            let s = pareto_sse(x, y, a);
            if s < best.0 {
                best = (s, a);
            }
        }
        let (mut lo, mut hi) = (best.1 - 1e-3, best.1 + 1e-3);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        while hi - lo > 1e-13 {
            let (c, d) = (hi - g * (hi - lo), lo + g * (hi - lo));
            if pareto_sse(x, y, c) < pareto_sse(x, y, d) {
                hi = d;
            } else {
                lo = c;
            }
        }
        0.5 * (lo + hi)
    }

    /// Best family name for publication counts at each venue.
    pub fn best_family(counts: &[u32]) -> &'static str {
        let mut c: Vec<f64> = counts.iter().map(|&v| f64::from(v)).collect();
        c.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = c.iter().sum();
        let y: Vec<f64> = c.iter().map(|v| v / total).collect();
        let n = y.len();
        if n == 1 {
            return "single_peak";
        }
        let x: Vec<f64> = (1..=n).map(|r| r as f64).collect();
        // (name, parameter count, score) in tie-break order
        let mut scored = Vec::new();
        if n >= 3 {
            let a = pareto_alpha(&x, &y);
            let fit: Vec<f64> = x.iter().map(|xi| a * xi.powf(-(a + 1.0))).collect();
            scored.push(("pareto", 1, adjusted(&y, &fit, 1)));
            let xm = x.iter().sum::<f64>() / n as f64;
            let ym = y.iter().sum::<f64>() / n as f64;
            let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - xm) * (yi - ym)).sum();
            let sxx: f64 = x.iter().map(|xi| (xi - xm).powi(2)).sum();
            let slope = sxy / sxx;
            let fit: Vec<f64> = x.iter().map(|xi| ym + slope * (xi - xm)).collect();
            scored.push(("linear", 2, adjusted(&y, &fit, 2)));
        }
        scored.push(("uniform", 0, adjusted(&y, &vec![1.0 / n as f64; n], 0)));
        let flat = y.iter().all(|v| (v - y[0]).abs() < 1e-15);
        let mut best = scored[0];
        for &cand in &scored[1..] {
            if cand.2 > best.2 || (flat && cand.2 == best.2 && cand.1 < best.1) {
                best = cand;
            }
        }
        best.0
    }
}
