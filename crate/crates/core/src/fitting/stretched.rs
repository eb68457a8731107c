use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stretched exponential on `r ≥ 0`: exponential at `c = 1`, approaching a
/// power law as `c → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchedExpParams {
    pub c: f64,
    pub r0: f64,
}

impl StretchedExpParams {
    pub fn new(c: f64, r0: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && r0 > 0.0 && r0.is_finite()) {
            return Err(Error::Domain(format!(
                "stretched exponential needs c > 0 and r0 > 0, got c={c}, r0={r0}"
            )));
        }
        Ok(StretchedExpParams { c, r0 })
    }

    /// Scale at which `c (r/r0)^c = beta`, i.e. the density behaves locally like
    /// `r^{-(beta+1)}` around `r`.
    pub fn power_law_calibrated(c: f64, beta: f64, r: f64) -> Result<Self> {
        if !(beta > 0.0 && r > 0.0) {
            return Err(Error::Domain(format!(
                "need beta > 0 and r > 0, got {beta}, {r}"
            )));
        }
        Self::new(c, r * (c / beta).powf(1.0 / c))
    }
}

/// `(c/r0) (r/r0)^{c−1} exp(−(r/r0)^c)`.
pub fn stretched_exp_pdf(r: f64, p: &StretchedExpParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!(
            "stretched exponential is defined for r >= 0, got {r}"
        )));
    }
    if r == 0.0 {
        return Ok(match p.c.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => 1.0 / p.r0,
            _ => 0.0,
        });
    }
    // log form: r/r0 can be ~1e26 in the near-power-law regime
    let ln_x = (r / p.r0).ln();
    Ok(((p.c / p.r0).ln() + (p.c - 1.0) * ln_x - (p.c * ln_x).exp()).exp())
}

/// Small-`c` limit `β r0^β / r^{β+1}`.
pub fn power_law_limit_pdf(r: f64, beta: f64, r0: f64) -> f64 {
    beta * r0.powf(beta) / r.powf(beta + 1.0)
}
