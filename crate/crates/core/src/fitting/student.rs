use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::digamma;

use super::lsq::{minimize_damped_lsq, LeastSquaresProblem, Termination, Tolerances};
use crate::diststats::EmpiricalPdf;
use crate::error::{Error, Result};

/// Student density parameters: `alpha` degrees of freedom (the tail
/// exponent), `m` location, `scale` the precision-like `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentParams {
    pub alpha: f64,
    pub m: f64,
    #[serde(rename = "L")]
    pub scale: f64,
}

impl StudentParams {
    pub fn new(alpha: f64, m: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0)
            || !(scale > 0.0)
            || !alpha.is_finite()
            || !scale.is_finite()
            || !m.is_finite()
        {
            return Err(Error::Domain(format!(
                "Student parameters need alpha > 0 and L > 0, got alpha={alpha}, L={scale}, m={m}"
            )));
        }
        Ok(StudentParams { alpha, m, scale })
    }
}

impl Default for StudentParams {
    /// Inverse-cubic prior: alpha 3, unit scale, centred.
    fn default() -> Self {
        StudentParams {
            alpha: 3.0,
            m: 0.0,
            scale: 1.0,
        }
    }
}

/// `ln f(g | α, m, L)`, written to stay accurate for large α.
pub fn ln_student_pdf(g: f64, p: &StudentParams) -> f64 {
    let u = g - p.m;
    0.5 * p.scale.ln()
        - 0.5 * p.alpha.ln()
        - ln_beta(0.5, 0.5 * p.alpha)
        - 0.5 * (p.alpha + 1.0) * (p.scale * u * u / p.alpha).ln_1p()
}

/// `√L α^{α/2} / B(1/2, α/2) · [α + L(g − m)²]^{−(α+1)/2}`.
pub fn student_pdf(g: f64, p: &StudentParams) -> f64 {
    ln_student_pdf(g, p).exp()
}

/// Gradient of `ln f` with respect to `(ln α, ln L, m)`.
fn ln_pdf_gradient(g: f64, p: &StudentParams) -> [f64; 3] {
    let (a, l) = (p.alpha, p.scale);
    let u = g - p.m;
    let lu2 = l * u * u;
    let denom = a + lu2;
    let d_alpha =
        -0.5 / a - 0.5 * (digamma(0.5 * a) - digamma(0.5 * (a + 1.0))) - 0.5 * (lu2 / a).ln_1p()
            + (a + 1.0) * lu2 / (2.0 * a * denom);
    let d_ln_l = 0.5 - (a + 1.0) * lu2 / (2.0 * denom);
    let d_m = (a + 1.0) * l * u / denom;
    [a * d_alpha, d_ln_l, d_m]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentFitOptions {
    /// Hold `m` at 0, as for standardized returns.
    pub fix_m_to_zero: bool,
    pub init: StudentParams,
    /// Bins with fewer counts are left out of the objective. The log of a
    /// small Poisson count is biased low, which drags the fitted tail.
    pub min_count: u64,
    pub tolerances: Tolerances,
}

impl Default for StudentFitOptions {
    fn default() -> Self {
        StudentFitOptions {
            fix_m_to_zero: true,
            init: StudentParams::default(),
            min_count: 10,
            tolerances: Tolerances::default(),
        }
    }
}

/// Minimum number of usable bins for a density fit.
pub const MIN_FIT_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentFit {
    pub params: StudentParams,
    /// `‖ln density − ln f‖` over the used bins.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Regression standard errors (delta method through the log parameters).
    pub alpha_stderr: Option<f64>,
    pub scale_stderr: Option<f64>,
    pub used_bins: usize,
}

struct LogDensityProblem {
    /// (center, ln density), ordered by (|center|, ln density).
    points: Vec<(f64, f64)>,
    fixed_m: Option<f64>,
}

impl LogDensityProblem {
    fn params(&self, x: &[f64]) -> StudentParams {
        StudentParams {
            alpha: x[0].exp(),
            scale: x[1].exp(),
            m: self.fixed_m.unwrap_or_else(|| x[2]),
        }
    }
}

impl LeastSquaresProblem for LogDensityProblem {
    fn num_params(&self) -> usize {
        if self.fixed_m.is_some() {
            2
        } else {
            3
        }
    }

    fn num_residuals(&self) -> usize {
        self.points.len()
    }

    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        let p = self.params(x);
        for (o, &(c, ln_d)) in out.iter_mut().zip(&self.points) {
            *o = ln_d - ln_student_pdf(c, &p);
        }
    }

    fn jacobian(&self, x: &[f64], out: &mut [f64]) -> bool {
        let p = self.params(x);
        let n = self.num_params();
        for (row, &(c, _)) in out.chunks_exact_mut(n).zip(&self.points) {
            let grad = ln_pdf_gradient(c, &p);
            for j in 0..n {
                row[j] = -grad[j];
            }
        }
        true
    }
}

/// Least-squares fit of `ln student_pdf` to the log density of the bins with
/// at least `min_count` samples.
///
/// A fit that exhausts its iterations comes back with `converged == false`
/// rather than as an error.
pub fn fit_student(pdf: &EmpiricalPdf, options: &StudentFitOptions) -> Result<StudentFit> {
    let init = StudentParams::new(options.init.alpha, options.init.m, options.init.scale)?;
    let min_count = options.min_count.max(1);
    let mut points: Vec<(f64, f64)> = pdf
        .centers
        .iter()
        .zip(&pdf.density)
        .zip(&pdf.counts)
        .filter(|(_, &count)| count >= min_count)
        .map(|((&c, &d), _)| (c, d.ln()))
        .collect();
    if points.len() < MIN_FIT_BINS {
        return Err(Error::InsufficientData(format!(
            "density fit needs {MIN_FIT_BINS} bins with at least {min_count} counts, found {}",
            points.len()
        )));
    }
    // Canonical order: a mirrored histogram yields the identical residual vector.
    points.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(a.1.total_cmp(&b.1)));

    let problem = LogDensityProblem {
        points,
        fixed_m: options.fix_m_to_zero.then_some(0.0),
    };
    let mut x0 = vec![init.alpha.ln(), init.scale.ln()];
    if !options.fix_m_to_zero {
        x0.push(init.m);
    }
    let result = minimize_damped_lsq(&problem, &x0, &options.tolerances);
    let params = problem.params(&result.params);
    Ok(StudentFit {
        params,
        residual_norm: result.residual_norm,
        iterations: result.iterations,
        converged: result.converged(),
        termination: result.termination,
        alpha_stderr: result.stderr(0).map(|s| s * params.alpha),
        scale_stderr: result.stderr(1).map(|s| s * params.scale),
        used_bins: problem.points.len(),
    })
}
