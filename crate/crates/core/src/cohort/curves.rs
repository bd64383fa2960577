use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::homevenue::PrefixOutcome;
use crate::lm::{self, LeastSquaresProblem, LmConfig};

/// Share of scholars whose career prefix of length `n_pubs` is best fitted
/// by the power-law candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortionPoint {
    pub n_pubs: usize,
    pub portion: f64,
    /// Scholars with at least `n_pubs` publications.
    pub n_scholars: usize,
}

/// Builds the portion curve from per-scholar emergence audits.
///
/// The denominator at `x` is the number of scholars with an audited prefix of
/// length `x`, i.e. careers at least that long.
pub fn pareto_portion_curve<'a, I>(audits: I) -> Result<Vec<PortionPoint>, StatsError>
where
    I: IntoIterator<Item = &'a [PrefixOutcome]>,
{
    let mut hits: Vec<(usize, usize)> = Vec::new();
    let mut any = false;
    for audit in audits {
        any = true;
        for p in audit {
            if hits.len() <= p.prefix_len {
                hits.resize(p.prefix_len + 1, (0, 0));
            }
            hits[p.prefix_len].1 += 1;
            if p.best_family.is_power_law() {
                hits[p.prefix_len].0 += 1;
            }
        }
    }
    if !any {
        return Err(StatsError::EmptyCorpus);
    }
    Ok(hits
        .into_iter()
        .enumerate()
        .filter(|(_, (_, total))| *total > 0)
        .map(|(x, (hit, total))| PortionPoint {
            n_pubs: x,
            portion: hit as f64 / total as f64,
            n_scholars: total,
        })
        .collect())
}

/// `ρ(x) = L / (1 + e^(-k(x - x0)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmoidFit {
    #[serde(rename = "L")]
    pub l: f64,
    pub k: f64,
    pub x0: f64,
    pub r2: f64,
    /// Flat input. Reported as `k = 0`, `x0` = median x and `L` twice the
    /// plateau, so `L/2` reproduces the constant level.
    pub degenerate: bool,
}

impl SigmoidFit {
    pub fn eval(&self, x: f64) -> f64 {
        logistic(self.l, self.k, self.x0, x)
    }
}

fn logistic(l: f64, k: f64, x0: f64, x: f64) -> f64 {
    l / (1.0 + (-k * (x - x0)).exp())
}

struct SigmoidProblem<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

impl LeastSquaresProblem for SigmoidProblem<'_> {
    fn n_params(&self) -> usize {
        3
    }

    fn n_residuals(&self) -> usize {
        self.x.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for ((o, &x), &y) in out.iter_mut().zip(self.x).zip(self.y) {
            *o = logistic(p[0], p[1], p[2], x) - y;
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut [Vec<f64>]) {
        let (l, k, x0) = (p[0], p[1], p[2]);
        for (row, &x) in out.iter_mut().zip(self.x) {
            let s = 1.0 / (1.0 + (-k * (x - x0)).exp());
            let ds = s * (1.0 - s);
            row[0] = s;
            row[1] = l * ds * (x - x0);
            row[2] = -l * ds * k;
        }
    }

    fn is_feasible(&self, p: &[f64]) -> bool {
        p.iter().all(|v| v.is_finite())
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn r_squared(x: &[f64], y: &[f64], fit: impl Fn(f64) -> f64) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - fit(xi)).powi(2))
        .sum();
    if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= 1e-24 * y.iter().map(|v| v * v).sum::<f64>() {
        1.0
    } else {
        f64::NEG_INFINITY
    }
}

/// Levenberg–Marquardt logistic fit, started from `L = max ρ`,
/// `x0 = median x`, `k = 1`.
pub fn sigmoid_fit(points: &[(f64, f64)]) -> Result<SigmoidFit, StatsError> {
    if points.len() < 4 {
        return Err(StatsError::TooFewPoints {
            need: 4,
            got: points.len(),
        });
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite point".into()));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mut xs = x.clone();
    xs.sort_by(f64::total_cmp);
    let x_med = median(&xs);

    if y.iter().all(|&v| v == y[0]) {
        return Ok(SigmoidFit {
            l: 2.0 * y[0],
            k: 0.0,
            x0: x_med,
            r2: 1.0,
            degenerate: true,
        });
    }

    let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let problem = SigmoidProblem { x: &x, y: &y };
    let outcome = lm::minimize(&problem, &[y_max, 1.0, x_med], &LmConfig::default());
    let (l, k, x0) = (outcome.params[0], outcome.params[1], outcome.params[2]);
    let fit = SigmoidFit {
        l,
        k,
        x0,
        r2: r_squared(&x, &y, |v| logistic(l, k, x0, v)),
        degenerate: k.abs() < 1e-8,
    };
    if outcome.converged() {
        Ok(fit)
    } else {
        Err(StatsError::ConvergenceFailure {
            best: Box::new(fit),
        })
    }
}
