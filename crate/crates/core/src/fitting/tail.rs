use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diststats::{Sign, TailCcdf};
use crate::error::{Error, Result};

/// Minimum number of CCDF points inside a scaling range.
pub const MIN_RANGE_POINTS: usize = 10;

/// Magnitude interval `[lo, hi]` for the power-law regression; `hi = None`
/// runs to the largest magnitude in the CCDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ScalingRange {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl ScalingRange {
    pub fn new(lo: f64, hi: Option<f64>) -> Result<Self> {
        let ok_lo = lo > 0.0 && lo.is_finite();
        let ok_hi = hi.is_none_or(|h| h.is_finite() && h > lo);
        if !ok_lo || !ok_hi {
            return Err(Error::Config(format!(
                "scaling range needs 0 < lo < hi, got [{lo}, {}]",
                hi.map_or("max".to_string(), |h| h.to_string())
            )));
        }
        Ok(ScalingRange { lo, hi })
    }

    pub fn bounded(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, Some(hi))
    }

    pub fn to_max(lo: f64) -> Result<Self> {
        Self::new(lo, None)
    }
}

impl FromStr for ScalingRange {
    type Err = Error;

    /// `lo,hi` where `hi` may be `max`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "invalid scaling range {s:?}, expected lo,hi or lo,max"
            ))
        };
        let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi = match hi.trim() {
            "max" => None,
            h => Some(h.parse::<f64>().map_err(|_| bad())?),
        };
        ScalingRange::new(lo, hi)
    }
}

impl fmt::Display for ScalingRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "{},{}", self.lo, hi),
            None => write!(f, "{},max", self.lo),
        }
    }
}

impl TryFrom<String> for ScalingRange {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ScalingRange> for String {
    fn from(r: ScalingRange) -> Self {
        r.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub sign: Sign,
    /// Power-law exponent of the CCDF, minus the log-log slope.
    pub exponent: f64,
    /// Regression standard error of the slope.
    pub stderr: f64,
    /// Range actually used, with `max` resolved to the largest magnitude.
    pub scaling_range: (f64, f64),
    pub n_points: usize,
    pub r_squared: f64,
    /// Intercept of `ln ccdf` on `ln magnitude`.
    pub intercept: f64,
}

/// Ordinary least squares of `ln ccdf` on `ln magnitude` over the points
/// inside `range` (inclusive).
pub fn fit_tail(ccdf: &TailCcdf, range: &ScalingRange) -> Result<TailFit> {
    let largest = ccdf.magnitudes.last().copied().unwrap_or(f64::NAN);
    let hi = range.hi.unwrap_or(largest);
    let (xs, ys): (Vec<f64>, Vec<f64>) = ccdf
        .magnitudes
        .iter()
        .zip(&ccdf.ccdf)
        .filter(|(&m, _)| m >= range.lo && m <= hi)
        .map(|(&m, &c)| (m.ln(), c.ln()))
        .unzip();
    let n = xs.len();
    if n < MIN_RANGE_POINTS {
        return Err(Error::InsufficientRange {
            lo: range.lo,
            hi,
            needed: MIN_RANGE_POINTS,
            got: n,
        });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateInput(
            "all in-range magnitudes are equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(TailFit {
        sign: ccdf.sign,
        exponent: -slope,
        stderr,
        scaling_range: (range.lo, hi),
        n_points: n,
        r_squared,
        intercept,
    })
}

/// Picks the lower cutoff from `candidates` that maximizes r² with the range
/// running to the largest magnitude. Candidates leaving fewer than
/// `MIN_RANGE_POINTS` points are skipped.
pub fn search_scaling_range(ccdf: &TailCcdf, candidates: &[f64]) -> Result<TailFit> {
    let mut best: Option<TailFit> = None;
    for &lo in candidates {
        let Ok(range) = ScalingRange::to_max(lo) else {
            continue;
        };
        let Ok(fit) = fit_tail(ccdf, &range) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| fit.r_squared > b.r_squared) {
            best = Some(fit);
        }
    }
    best.ok_or_else(|| {
        Error::InsufficientData("no candidate cutoff leaves enough tail points".into())
    })
}
