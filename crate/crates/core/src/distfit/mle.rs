//! Maximum-likelihood estimators over a weighted rank sample.
//!
//! A distribution with `counts[r]` publications at rank `r` is the sample in
//! which value `r` occurs `counts[r]` times; the estimators take the distinct
//! values and their multiplicities as weights.

/// Pareto shape with `x_m = 1`: `α = n / Σ ln x_i`.
pub fn pareto_alpha(x: &[f64], w: &[f64]) -> Option<f64> {
    let total: f64 = w.iter().sum();
    let log_sum: f64 = x.iter().zip(w).map(|(xi, wi)| wi * xi.ln()).sum();
    let alpha = total / log_sum;
    (log_sum > 0.0 && alpha.is_finite()).then_some(alpha)
}

/// Exponential rate: `λ = 1 / mean`.
pub fn exponential_rate(x: &[f64], w: &[f64]) -> Option<f64> {
    let total: f64 = w.iter().sum();
    let sum: f64 = x.iter().zip(w).map(|(xi, wi)| wi * xi).sum();
    let rate = total / sum;
    (sum > 0.0 && rate.is_finite()).then_some(rate)
}

/// `ln Σ w_i x_i^-k`, evaluated with a max shift.
fn log_weighted_power_sum(x: &[f64], w: &[f64], k: f64) -> f64 {
    let m = x
        .iter()
        .map(|xi| -k * xi.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = x
        .iter()
        .zip(w)
        .map(|(xi, wi)| wi * (-k * xi.ln() - m).exp())
        .sum();
    m + s.ln()
}

/// Derivative of the Fréchet profile log-likelihood in the shape `k`
/// (scale eliminated at its conditional optimum). Strictly decreasing in `k`.
fn frechet_profile_slope(x: &[f64], w: &[f64], k: f64) -> f64 {
    let total: f64 = w.iter().sum();
    let m = x
        .iter()
        .map(|xi| -k * xi.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let e = wi * (-k * xi.ln() - m).exp();
        num += e * xi.ln();
        den += e;
    }
    let weighted_log: f64 = x.iter().zip(w).map(|(xi, wi)| wi * xi.ln()).sum();
    total / k + total * num / den - weighted_log
}

/// Fréchet `(shape, scale)` maximizing the weighted log-likelihood.
///
/// For fixed shape `k` the scale optimum is `s^k = n / Σ x_i^-k`; the
/// remaining one-dimensional problem is solved by bisection on the score in
/// `ln k`. Returns `None` when the sample has no spread.
pub fn frechet_params(x: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (1e-8_f64.ln(), 1e8_f64.ln());
    if frechet_profile_slope(x, w, hi.exp()) >= 0.0 || frechet_profile_slope(x, w, lo.exp()) <= 0.0
    {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if frechet_profile_slope(x, w, mid.exp()) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let k = (0.5 * (lo + hi)).exp();
    let total: f64 = w.iter().sum();
    let log_scale = (total.ln() - log_weighted_power_sum(x, w, k)) / k;
    let s = log_scale.exp();
    (k.is_finite() && s.is_finite()).then_some((k, s))
}

/// Weighted Fréchet log-likelihood, used by tests and diagnostics.
pub fn frechet_log_likelihood(x: &[f64], w: &[f64], k: f64, s: f64) -> f64 {
    x.iter()
        .zip(w)
        .map(|(xi, wi)| {
            let z = xi / s;
            wi * (k.ln() - s.ln() - (1.0 + k) * z.ln() - z.powf(-k))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pareto_closed_form_on_small_sample() {
        // sample [1,1,2,4]
        let a = pareto_alpha(&[1.0, 2.0, 4.0], &[2.0, 1.0, 1.0]).unwrap();
        let expected = 4.0 / (2.0_f64.ln() + 4.0_f64.ln());
        assert!((a - expected).abs() < 1e-12);
        assert!((a - 1.9236).abs() < 1e-3);
    }

    #[test]
    fn pareto_closed_form_is_the_likelihood_maximum() {
        let (x, w) = ([1.0, 2.0, 4.0], [2.0, 1.0, 1.0]);
        let ll = |a: f64| -> f64 {
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| wi * (a.ln() - (a + 1.0) * f64::ln(*xi)))
                .sum()
        };
        let a_hat = pareto_alpha(&x, &w).unwrap();
        let best_grid = (1..40000)
            .map(|i| i as f64 * 1e-4)
            .max_by(|a, b| ll(*a).total_cmp(&ll(*b)))
            .unwrap();
        assert!((a_hat - best_grid).abs() < 1e-4);
    }

    #[test]
    fn exponential_rate_is_inverse_mean() {
        let r = exponential_rate(&[1.0, 3.0], &[1.0, 1.0]).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_samples_have_no_estimate() {
        assert!(pareto_alpha(&[1.0], &[5.0]).is_none());
        assert!(frechet_params(&[2.0], &[3.0]).is_none());
    }

    #[test]
    fn frechet_estimate_beats_nearby_points() {
        let x: Vec<f64> = (1..=12).map(f64::from).collect();
        let w = [30.0, 14.0, 9.0, 6.0, 4.0, 3.0, 3.0, 2.0, 2.0, 1.0, 1.0, 1.0];
        let (k, s) = frechet_params(&x, &w).unwrap();
        let best = frechet_log_likelihood(&x, &w, k, s);
        for dk in [-0.01, 0.0, 0.01] {
            for ds in [-0.01, 0.0, 0.01] {
                if dk == 0.0 && ds == 0.0 {
                    continue;
                }
                assert!(frechet_log_likelihood(&x, &w, k + dk, s + ds) < best);
            }
        }
    }
}
