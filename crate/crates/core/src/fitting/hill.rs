use serde::{Deserialize, Serialize};

use crate::diststats::{signed_magnitudes, Sign};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillEstimate {
    pub exponent: f64,
    /// Asymptotic standard error `exponent / √k`.
    pub stderr: f64,
    pub k: usize,
    /// The (k+1)-th largest magnitude, the threshold of the estimate.
    pub threshold: f64,
}

/// Hill tail-index estimate from magnitudes sorted in descending order:
/// `k / Σ_{j=1..k} ln(x_(j) / x_(k+1))`.
pub fn hill_estimate(sorted_desc: &[f64], k: usize) -> Result<HillEstimate> {
    let n = sorted_desc.len();
    if k == 0 || k >= n {
        return Err(Error::Contract(format!(
            "Hill estimator needs 1 <= k < n, got k={k}, n={n}"
        )));
    }
    let threshold = sorted_desc[k];
    if !(threshold > 0.0) {
        return Err(Error::Contract(format!(
            "Hill threshold x_(k+1) must be positive, got {threshold}"
        )));
    }
    if sorted_desc[..=k].windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Contract(
            "magnitudes are not sorted in descending order".into(),
        ));
    }
    let sum: f64 = sorted_desc[..k].iter().map(|x| (x / threshold).ln()).sum();
    if !(sum > 0.0) {
        return Err(Error::DegenerateInput(
            "top order statistics all equal the threshold".into(),
        ));
    }
    let exponent = k as f64 / sum;
    Ok(HillEstimate {
        exponent,
        stderr: exponent / (k as f64).sqrt(),
        k,
        threshold,
    })
}

/// Hill estimate on the magnitudes of one sign of a sample.
pub fn hill_from_sample(sample: &[f64], sign: Sign, k: usize) -> Result<HillEstimate> {
    let mut mags = signed_magnitudes(sample, sign);
    mags.sort_by(|a, b| b.total_cmp(a));
    hill_estimate(&mags, k)
}
