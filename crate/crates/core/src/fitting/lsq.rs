//! Damped Gauss-Newton (Levenberg-Marquardt) minimizer for small dense
//! nonlinear least-squares problems.
//!
//! Minimizes `‖r(x)‖²` over a handful of parameters. Every iteration first
//! tries the undamped Gauss-Newton step and only adds Marquardt damping
//! `λ·diag(JᵀJ)` when that step fails to reduce the cost, so linear problems
//! are solved exactly on the first iteration.

use serde::{Deserialize, Serialize};

pub trait LeastSquaresProblem {
    fn num_params(&self) -> usize;
    fn num_residuals(&self) -> usize;

    /// Writes `r(x)` into `out` (length `num_residuals`).
    fn residuals(&self, params: &[f64], out: &mut [f64]);

    /// Writes the row-major `m × n` Jacobian into `out`. Returning `false`
    /// falls back to forward differences.
    fn jacobian(&self, _params: &[f64], _out: &mut [f64]) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Stop when `‖δ‖ ≤ step · (‖x‖ + step)`.
    pub step: f64,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub cost: f64,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            step: 1e-8,
            cost: 1e-10,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ZeroResidual,
    StepTolerance,
    CostTolerance,
    MaxIterations,
    /// Damping grew without bound and no step reduced the cost.
    Stalled,
    NonFinite,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(
            self,
            Termination::ZeroResidual | Termination::StepTolerance | Termination::CostTolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimization {
    pub params: Vec<f64>,
    /// `‖r(x)‖` at the returned parameters.
    pub residual_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// `s² (JᵀJ)⁻¹` (row-major `n × n`) with `s² = ‖r‖² / (m − n)`, when defined.
    pub covariance: Option<Vec<f64>>,
}

impl Minimization {
    pub fn converged(&self) -> bool {
        self.termination.converged()
    }

    pub fn stderr(&self, i: usize) -> Option<f64> {
        let n = self.params.len();
        self.covariance
            .as_ref()
            .map(|c| c[i * n + i].max(0.0).sqrt())
    }
}

const MAX_DAMPING: f64 = 1e16;

pub fn minimize_damped_lsq<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    init: &[f64],
    tol: &Tolerances,
) -> Minimization {
    let n = problem.num_params();
    let m = problem.num_residuals();
    assert_eq!(init.len(), n, "initial guess has wrong dimension");

    let mut x = init.to_vec();
    let mut r = vec![0.0; m];
    problem.residuals(&x, &mut r);
    let mut cost = sum_sq(&r);

    let finish = |x: Vec<f64>, cost: f64, iterations, termination| {
        let covariance = covariance(problem, &x, cost);
        Minimization {
            params: x,
            residual_norm: cost.sqrt(),
            iterations,
            termination,
            covariance,
        }
    };

    if !cost.is_finite() {
        return finish(x, cost, 0, Termination::NonFinite);
    }
    if cost == 0.0 {
        return finish(x, cost, 0, Termination::ZeroResidual);
    }

    let mut jac = vec![0.0; m * n];
    let mut trial = vec![0.0; n];
    let mut r_trial = vec![0.0; m];
    let mut lambda = 0.0;

    for iteration in 1..=tol.max_iterations {
        evaluate_jacobian(problem, &x, &r, &mut jac);
        let (jtj, jtr) = normal_equations(&jac, &r, m, n);
        if jtj.iter().chain(&jtr).any(|v| !v.is_finite()) {
            return finish(x, cost, iteration, Termination::NonFinite);
        }
        let diag_floor = 1e-12 * (0..n).map(|i| jtj[i * n + i]).fold(0.0, f64::max) + 1e-300;
        let x_norm = norm(&x);

        loop {
            let mut a = jtj.clone();
            for i in 0..n {
                a[i * n + i] += lambda * jtj[i * n + i].max(diag_floor);
            }
            let rhs: Vec<f64> = jtr.iter().map(|g| -g).collect();
            let Some(delta) = cholesky_solve(&mut a, &rhs, n) else {
                lambda = bump(lambda);
                if lambda > MAX_DAMPING {
                    return finish(x, cost, iteration, Termination::Stalled);
                }
                continue;
            };
            let step_small = norm(&delta) <= tol.step * (x_norm + tol.step);
            for i in 0..n {
                trial[i] = x[i] + delta[i];
            }
            problem.residuals(&trial, &mut r_trial);
            let trial_cost = sum_sq(&r_trial);

            if trial_cost.is_finite() && trial_cost <= cost {
                let decrease = cost - trial_cost;
                std::mem::swap(&mut x, &mut trial);
                std::mem::swap(&mut r, &mut r_trial);
                let previous = cost;
                cost = trial_cost;
                if cost == 0.0 {
                    return finish(x, cost, iteration, Termination::ZeroResidual);
                }
                if step_small {
                    return finish(x, cost, iteration, Termination::StepTolerance);
                }
                if decrease <= tol.cost * previous {
                    return finish(x, cost, iteration, Termination::CostTolerance);
                }
                lambda = if lambda < 1e-10 { 0.0 } else { lambda / 10.0 };
                break;
            }
            if step_small {
                // the model step is below tolerance and only rounding is left
                return finish(x, cost, iteration, Termination::StepTolerance);
            }
            lambda = bump(lambda);
            if lambda > MAX_DAMPING {
                return finish(x, cost, iteration, Termination::Stalled);
            }
        }
    }
    finish(x, cost, tol.max_iterations, Termination::MaxIterations)
}

fn bump(lambda: f64) -> f64 {
    if lambda == 0.0 {
        1e-3
    } else {
        lambda * 10.0
    }
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn norm(v: &[f64]) -> f64 {
    sum_sq(v).sqrt()
}

fn evaluate_jacobian<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    r: &[f64],
    jac: &mut [f64],
) {
    if problem.jacobian(x, jac) {
        return;
    }
    let n = x.len();
    let m = r.len();
    let mut shifted = x.to_vec();
    let mut r_shift = vec![0.0; m];
    for j in 0..n {
        let h = f64::EPSILON.sqrt() * x[j].abs().max(1.0);
        shifted[j] = x[j] + h;
        let h = shifted[j] - x[j];
        problem.residuals(&shifted, &mut r_shift);
        for i in 0..m {
            jac[i * n + j] = (r_shift[i] - r[i]) / h;
        }
        shifted[j] = x[j];
    }
}

fn normal_equations(jac: &[f64], r: &[f64], m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jtj = vec![0.0; n * n];
    let mut jtr = vec![0.0; n];
    for i in 0..m {
        let row = &jac[i * n..(i + 1) * n];
        for a in 0..n {
            jtr[a] += row[a] * r[i];
            for b in 0..=a {
                jtj[a * n + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            jtj[b * n + a] = jtj[a * n + b];
        }
    }
    (jtj, jtr)
}

/// In-place Cholesky factorization of a symmetric matrix; `None` unless
/// positive definite.
fn cholesky(a: &mut [f64], n: usize) -> Option<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Some(())
}

fn cholesky_solve(a: &mut [f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    cholesky(a, n)?;
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= a[i * n + k] * y[k];
        }
        y[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= a[k * n + i] * y[k];
        }
        y[i] /= a[i * n + i];
    }
    Some(y)
}

fn covariance<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    cost: f64,
) -> Option<Vec<f64>> {
    let n = problem.num_params();
    let m = problem.num_residuals();
    if m <= n || !cost.is_finite() {
        return None;
    }
    let mut r = vec![0.0; m];
    problem.residuals(x, &mut r);
    let mut jac = vec![0.0; m * n];
    evaluate_jacobian(problem, x, &r, &mut jac);
    let (mut jtj, _) = normal_equations(&jac, &r, m, n);
    cholesky(&mut jtj, n)?;
    let s2 = cost / (m - n) as f64;
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        // forward then backward substitution against the stored factor
        for i in 0..n {
            for k in 0..i {
                e[i] -= jtj[i * n + k] * e[k];
            }
            e[i] /= jtj[i * n + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                e[i] -= jtj[k * n + i] * e[k];
            }
            e[i] /= jtj[i * n + i];
        }
        for row in 0..n {
            inv[row * n + col] = e[row] * s2;
        }
    }
    Some(inv)
}
