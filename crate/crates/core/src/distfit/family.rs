//! Model curves for the candidate distribution families.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Candidate shapes for a sorted publication distribution.
///
/// Declaration order is the default model-selection tie-break priority for
/// the core four: Pareto, then single peak, linear, uniform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Pareto,
    SinglePeak,
    Linear,
    Uniform,
    Exponential,
    Frechet,
}

impl Family {
    pub const POWER_LAW: [Family; 3] = [Family::Pareto, Family::Exponential, Family::Frechet];

    /// Number of free parameters used in the adjusted-R² correction.
    pub fn n_params(self) -> usize {
        match self {
            Family::Uniform => 0,
            Family::SinglePeak | Family::Pareto | Family::Exponential => 1,
            Family::Linear | Family::Frechet => 2,
        }
    }

    /// Whether the family may be fitted to `n` ranked points.
    pub fn is_applicable(self, n: usize) -> bool {
        match self {
            Family::SinglePeak => n == 1,
            Family::Uniform => n >= 2,
            Family::Pareto | Family::Linear | Family::Exponential | Family::Frechet => n >= 3,
        }
    }

    /// Heavy-tailed families that can stand in as the power-law candidate.
    pub fn is_power_law(self) -> bool {
        Self::POWER_LAW.contains(&self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Pareto => "pareto",
            Family::SinglePeak => "single_peak",
            Family::Linear => "linear",
            Family::Uniform => "uniform",
            Family::Exponential => "exponential",
            Family::Frechet => "frechet",
        }
    }

    /// Model value at rank `x` for a distribution over `n_points` ranks.
    ///
    /// * single peak: `a`
    /// * Pareto (x_m = 1): `α x^-(α+1)`
    /// * linear: `-a x + b`
    /// * uniform: `1/n`
    /// * exponential: `λ e^(-λx)`
    /// * Fréchet: `(k/s) (x/s)^(-1-k) e^(-(x/s)^-k)`
    pub fn eval(self, params: &[f64], x: f64, n_points: usize) -> f64 {
        match self {
            Family::SinglePeak => params[0],
            Family::Pareto => {
                let a = params[0];
                a * x.powf(-(a + 1.0))
            }
            Family::Linear => -params[0] * x + params[1],
            Family::Uniform => 1.0 / n_points as f64,
            Family::Exponential => {
                let l = params[0];
                l * (-l * x).exp()
            }
            Family::Frechet => {
                let (k, s) = (params[0], params[1]);
                let z = x / s;
                (k / s) * z.powf(-1.0 - k) * (-z.powf(-k)).exp()
            }
        }
    }

    /// Gradient of [`Family::eval`] with respect to the parameters.
    pub(crate) fn gradient(self, params: &[f64], x: f64, out: &mut [f64]) {
        match self {
            Family::SinglePeak => out[0] = 1.0,
            Family::Uniform => {}
            Family::Pareto => {
                let a = params[0];
                out[0] = x.powf(-(a + 1.0)) * (1.0 - a * x.ln());
            }
            Family::Linear => {
                out[0] = -x;
                out[1] = 1.0;
            }
            Family::Exponential => {
                let l = params[0];
                out[0] = (-l * x).exp() * (1.0 - l * x);
            }
            Family::Frechet => {
                let (k, s) = (params[0], params[1]);
                let f = self.eval(params, x, 0);
                let ln_z = (x / s).ln();
                let z_k = (-k * ln_z).exp();
                out[0] = f * (1.0 / k - ln_z + z_k * ln_z);
                out[1] = f * k * (1.0 - z_k) / s;
            }
        }
    }

    /// Cumulative distribution function, where one exists.
    pub fn cdf(self, params: &[f64], x: f64) -> Option<f64> {
        match self {
            Family::Pareto => Some(1.0 - x.powf(-params[0])),
            Family::Exponential => Some(1.0 - (-params[0] * x).exp()),
            Family::Frechet => Some((-(x / params[1]).powf(-params[0])).exp()),
            _ => None,
        }
    }

    /// Parameter-domain check (positive shapes, rates, and scales).
    pub fn params_valid(self, params: &[f64]) -> bool {
        let finite = params.iter().all(|p| p.is_finite());
        finite
            && match self {
                Family::Pareto | Family::Exponential => params[0] > 0.0,
                Family::Frechet => params[0] > 0.0 && params[1] > 0.0,
                _ => true,
            }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pareto" => Ok(Family::Pareto),
            "single_peak" | "single-peak" | "singlepeak" => Ok(Family::SinglePeak),
            "linear" => Ok(Family::Linear),
            "uniform" => Ok(Family::Uniform),
            "exponential" => Ok(Family::Exponential),
            "frechet" | "fréchet" => Ok(Family::Frechet),
            other => Err(format!("unknown family `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_diff(family: Family, params: &[f64], x: f64) -> Vec<f64> {
        (0..params.len())
            .map(|j| {
                let h = 1e-6 * params[j].abs().max(1.0);
                let mut up = params.to_vec();
                let mut dn = params.to_vec();
                up[j] += h;
                dn[j] -= h;
                (family.eval(&up, x, 5) - family.eval(&dn, x, 5)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        let cases: [(Family, &[f64]); 4] = [
            (Family::Pareto, &[1.3]),
            (Family::Linear, &[0.1, 0.9]),
            (Family::Exponential, &[0.6]),
            (Family::Frechet, &[1.7, 2.2]),
        ];
        for (family, params) in cases {
            for x in [1.0, 2.0, 3.5, 7.0, 20.0] {
                let mut g = vec![0.0; params.len()];
                family.gradient(params, x, &mut g);
                let fd = finite_diff(family, params, x);
                for (a, b) in g.iter().zip(&fd) {
                    assert!(
                        (a - b).abs() < 1e-6 * b.abs().max(1e-3),
                        "{family} x={x}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn applicability_thresholds() {
        assert!(Family::SinglePeak.is_applicable(1));
        assert!(!Family::SinglePeak.is_applicable(2));
        assert!(!Family::Uniform.is_applicable(1));
        assert!(Family::Uniform.is_applicable(2));
        assert!(!Family::Pareto.is_applicable(2));
        assert!(Family::Frechet.is_applicable(3));
    }

    #[test]
    fn pareto_cdf_at_support_start_is_zero() {
        assert_eq!(Family::Pareto.cdf(&[2.0], 1.0), Some(0.0));
        assert!((Family::Pareto.cdf(&[1.0], 4.0).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn family_names_round_trip() {
        for f in [
            Family::Pareto,
            Family::SinglePeak,
            Family::Linear,
            Family::Uniform,
            Family::Exponential,
            Family::Frechet,
        ] {
            assert_eq!(f.as_str().parse::<Family>().unwrap(), f);
            assert_eq!(
                serde_json::to_string(&f).unwrap(),
                format!("\"{}\"", f.as_str())
            );
        }
    }
}
