//! Levenberg–Marquardt for small dense least-squares problems.
//!
//! The problems in this crate have at most three parameters, so the normal
//! equations are formed explicitly and solved by Gaussian elimination.

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    /// Upper bound on attempted steps (accepted or rejected).
    pub max_iter: usize,
    /// Relative parameter-step tolerance.
    pub xtol: f64,
    /// Relative cost-reduction tolerance.
    pub ftol: f64,
    /// Gradient infinity-norm tolerance.
    pub gtol: f64,
    /// Initial Marquardt damping factor.
    pub initial_damping: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            xtol: 1e-10,
            ftol: 1e-15,
            gtol: 1e-30,
            initial_damping: 1e-3,
        }
    }
}

/// A least-squares problem `min Σ r_i(p)²`.
pub trait LeastSquaresProblem {
    fn n_params(&self) -> usize;
    fn n_residuals(&self) -> usize;
    /// Writes `r_i = model_i(p) - observed_i`.
    fn residuals(&self, params: &[f64], out: &mut [f64]);
    /// Writes `∂r_i/∂p_j` into `out[i][j]`.
    fn jacobian(&self, params: &[f64], out: &mut [Vec<f64>]);
    /// Steps leaving the feasible region are rejected like cost increases.
    fn is_feasible(&self, _params: &[f64]) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ParameterTolerance,
    CostTolerance,
    GradientTolerance,
    ZeroCost,
    MaxIterations,
    /// The starting point produced non-finite residuals or was infeasible.
    InvalidStart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Sum of squared residuals at `params`.
    pub cost: f64,
    pub iterations: usize,
    pub termination: Termination,
}

impl LmOutcome {
    pub fn converged(&self) -> bool {
        !matches!(
            self.termination,
            Termination::MaxIterations | Termination::InvalidStart
        )
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn norm(v: &[f64]) -> f64 {
    sum_sq(v).sqrt()
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Minimizes the problem's squared residuals starting from `init`.
///
/// Never fails outright: a run that exhausts `max_iter` reports
/// [`Termination::MaxIterations`] together with the best point seen.
pub fn minimize<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    init: &[f64],
    cfg: &LmConfig,
) -> LmOutcome {
    let p_len = problem.n_params();
    let m = problem.n_residuals();
    debug_assert_eq!(init.len(), p_len);

    let mut params = init.to_vec();
    let mut r = vec![0.0; m];
    problem.residuals(&params, &mut r);
    let mut cost = sum_sq(&r);
    if !problem.is_feasible(&params) || !cost.is_finite() {
        return LmOutcome {
            params,
            cost,
            iterations: 0,
            termination: Termination::InvalidStart,
        };
    }

    let mut jac = vec![vec![0.0; p_len]; m];
    let mut trial = vec![0.0; p_len];
    let mut r_trial = vec![0.0; m];
    let mut lambda = cfg.initial_damping;
    let mut iterations = 0;
    let mut need_jacobian = true;
    let mut jtj = vec![vec![0.0; p_len]; p_len];
    let mut grad = vec![0.0; p_len];

    loop {
        if cost == 0.0 {
            return LmOutcome {
                params,
                cost,
                iterations,
                termination: Termination::ZeroCost,
            };
        }
        if need_jacobian {
            problem.jacobian(&params, &mut jac);
            for a in 0..p_len {
                grad[a] = (0..m).map(|i| jac[i][a] * r[i]).sum();
                for b in 0..p_len {
                    jtj[a][b] = (0..m).map(|i| jac[i][a] * jac[i][b]).sum();
                }
            }
            let gmax = grad.iter().fold(0.0_f64, |acc, g| acc.max(g.abs()));
            if gmax <= cfg.gtol {
                return LmOutcome {
                    params,
                    cost,
                    iterations,
                    termination: Termination::GradientTolerance,
                };
            }
            need_jacobian = false;
        }
        if iterations >= cfg.max_iter {
            return LmOutcome {
                params,
                cost,
                iterations,
                termination: Termination::MaxIterations,
            };
        }
        iterations += 1;

        let diag_floor = jtj
            .iter()
            .enumerate()
            .map(|(i, row)| row[i])
            .fold(0.0_f64, f64::max)
            * 1e-12;
        let mut a = jtj.clone();
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += lambda * jtj[i][i].max(diag_floor).max(f64::MIN_POSITIVE);
        }
        let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        let Some(step) = solve_dense(a, rhs) else {
            lambda *= 10.0;
            continue;
        };
        let small_step = norm(&step) <= cfg.xtol * (norm(&params) + cfg.xtol);

        for (t, (p, s)) in trial.iter_mut().zip(params.iter().zip(&step)) {
            *t = p + s;
        }
        let accepted = problem.is_feasible(&trial) && {
            problem.residuals(&trial, &mut r_trial);
            let c = sum_sq(&r_trial);
            c.is_finite() && c < cost
        };
        if accepted {
            let new_cost = sum_sq(&r_trial);
            let reduction = cost - new_cost;
            params.copy_from_slice(&trial);
            std::mem::swap(&mut r, &mut r_trial);
            cost = new_cost;
            need_jacobian = true;
            lambda = (lambda / 10.0).max(1e-15);
            if small_step {
                return LmOutcome {
                    params,
                    cost,
                    iterations,
                    termination: Termination::ParameterTolerance,
                };
            }
            if reduction <= cfg.ftol * (cost + reduction) {
                return LmOutcome {
                    params,
                    cost,
                    iterations,
                    termination: Termination::CostTolerance,
                };
            }
        } else {
            if small_step {
                // no descent left at machine precision
                return LmOutcome {
                    params,
                    cost,
                    iterations,
                    termination: Termination::ParameterTolerance,
                };
            }
            lambda *= 10.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquaresProblem for Line {
        fn n_params(&self) -> usize {
            2
        }
        fn n_residuals(&self) -> usize {
            self.x.len()
        }
        fn residuals(&self, p: &[f64], out: &mut [f64]) {
            for i in 0..self.x.len() {
                out[i] = p[0] * self.x[i] + p[1] - self.y[i];
            }
        }
        fn jacobian(&self, _p: &[f64], out: &mut [Vec<f64>]) {
            for (i, row) in out.iter_mut().enumerate() {
                row[0] = self.x[i];
                row[1] = 1.0;
            }
        }
    }

    struct Decay {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquaresProblem for Decay {
        fn n_params(&self) -> usize {
            2
        }
        fn n_residuals(&self) -> usize {
            self.x.len()
        }
        fn residuals(&self, p: &[f64], out: &mut [f64]) {
            for i in 0..self.x.len() {
                out[i] = p[0] * (-p[1] * self.x[i]).exp() - self.y[i];
            }
        }
        fn jacobian(&self, p: &[f64], out: &mut [Vec<f64>]) {
            for (i, row) in out.iter_mut().enumerate() {
                let e = (-p[1] * self.x[i]).exp();
                row[0] = e;
                row[1] = -p[0] * self.x[i] * e;
            }
        }
        fn is_feasible(&self, p: &[f64]) -> bool {
            p[1] > 0.0
        }
    }

    #[test]
    fn two_point_line_is_interpolated() {
        let prob = Line {
            x: vec![1.0, 4.0],
            y: vec![3.0, -3.0],
        };
        let out = minimize(&prob, &[0.0, 0.0], &LmConfig::default());
        assert!(out.converged());
        assert!((out.params[0] + 2.0).abs() < 1e-9);
        assert!((out.params[1] - 5.0).abs() < 1e-9);
        assert!(out.cost < 1e-20);
    }

    #[test]
    fn recovers_exponential_decay() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let y = x.iter().map(|v| 3.0 * (-0.7 * v).exp()).collect();
        let prob = Decay { x, y };
        let out = minimize(&prob, &[1.0, 0.1], &LmConfig::default());
        assert!(out.converged(), "{:?}", out.termination);
        assert!((out.params[0] - 3.0).abs() < 1e-8);
        assert!((out.params[1] - 0.7).abs() < 1e-8);
    }

    #[test]
    fn iteration_cap_reports_best_so_far() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let y = x.iter().map(|v| 3.0 * (-0.7 * v).exp()).collect();
        let prob = Decay { x, y };
        let cfg = LmConfig {
            max_iter: 2,
            ..LmConfig::default()
        };
        let out = minimize(&prob, &[1.0, 0.1], &cfg);
        assert_eq!(out.termination, Termination::MaxIterations);
        assert!(!out.converged());
        let mut r = vec![0.0; 20];
        prob.residuals(&[1.0, 0.1], &mut r);
        assert!(out.cost < sum_sq(&r));
    }

    #[test]
    fn infeasible_start_is_reported() {
        let prob = Decay {
            x: vec![1.0, 2.0],
            y: vec![1.0, 0.5],
        };
        let out = minimize(&prob, &[1.0, -1.0], &LmConfig::default());
        assert_eq!(out.termination, Termination::InvalidStart);
    }

    #[test]
    fn singular_system_returns_none() {
        assert!(solve_dense(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
        let x = solve_dense(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
    }
}
