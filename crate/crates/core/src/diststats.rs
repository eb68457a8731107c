//! Moments, binned densities and signed tail CCDFs of a pooled sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub mean: f64,
    /// Sample (n − 1) standard deviation.
    pub stdev: f64,
    /// m3 / m2^{3/2}, central moments with the n denominator.
    pub skewness: f64,
    /// Pearson (non-excess) kurtosis m4 / m2²; 3 for a Gaussian.
    pub kurtosis: f64,
}

pub fn moments(sample: &[f64]) -> Result<MomentStats> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::DegenerateInput(format!(
            "moments need at least 4 values, got {n}"
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput(
            "sample contains non-finite values".into(),
        ));
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    for &x in sample {
        let d = x - mean;
        let d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    let m2 = s2 / nf;
    if !(m2 > 0.0) {
        return Err(Error::DegenerateInput("zero variance".into()));
    }
    Ok(MomentStats {
        mean,
        stdev: (s2 / (nf - 1.0)).sqrt(),
        skewness: (s3 / nf) / m2.powf(1.5),
        kurtosis: (s4 / nf) / (m2 * m2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Binning {
    /// Linear bins on `(−g_lo, g_lo)` and `log_bins` logarithmic bins per side
    /// on `[g_lo, g_max]`; `g_max` defaults to the sample's largest magnitude.
    LogLinear {
        g_lo: f64,
        log_bins: usize,
        linear_bins: usize,
        #[serde(default)]
        g_max: Option<f64>,
    },
    /// `bins` equal-width bins on `[lo, hi]`.
    Linear { lo: f64, hi: f64, bins: usize },
}

impl Default for Binning {
    fn default() -> Self {
        Binning::LogLinear {
            g_lo: 0.1,
            log_bins: 50,
            linear_bins: 20,
            g_max: None,
        }
    }
}

/// Histogram density estimate over contiguous bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPdf {
    /// `centers.len() + 1` increasing edges.
    pub edges: Vec<f64>,
    /// Midpoints of linear bins, geometric means (signed) of logarithmic bins.
    pub centers: Vec<f64>,
    /// `counts[k] / (total_n × width[k])`.
    pub density: Vec<f64>,
    pub counts: Vec<u64>,
    /// All samples, including any outside the binned range.
    pub total_n: u64,
}

impl EmpiricalPdf {
    pub fn width(&self, k: usize) -> f64 {
        self.edges[k + 1] - self.edges[k]
    }

    /// ∫ density over all bins: the fraction of samples that were binned.
    pub fn integral(&self) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(k, d)| d * self.width(k))
            .sum()
    }

    /// Bins lying entirely on one side of zero, for per-sign density curves.
    pub fn side(&self, sign: Sign) -> EmpiricalPdf {
        let keep: Vec<usize> = (0..self.centers.len())
            .filter(|&k| match sign {
                Sign::Positive => self.edges[k] >= 0.0,
                Sign::Negative => self.edges[k + 1] <= 0.0,
            })
            .collect();
        let mut edges: Vec<f64> = keep.iter().map(|&k| self.edges[k]).collect();
        if let Some(&last) = keep.last() {
            edges.push(self.edges[last + 1]);
        }
        EmpiricalPdf {
            edges,
            centers: keep.iter().map(|&k| self.centers[k]).collect(),
            density: keep.iter().map(|&k| self.density[k]).collect(),
            counts: keep.iter().map(|&k| self.counts[k]).collect(),
            total_n: self.total_n,
        }
    }

    /// `center,density,count` rows with a header.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
        w.write_record(["center", "density", "count"]).map_err(io)?;
        for k in 0..self.centers.len() {
            w.write_record([
                format!("{:?}", self.centers[k]),
                format!("{:?}", self.density[k]),
                self.counts[k].to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

pub fn empirical_pdf(sample: &[f64], binning: &Binning) -> Result<EmpiricalPdf> {
    if sample.is_empty() {
        return Err(Error::DegenerateInput("empty sample".into()));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput(
            "sample contains non-finite values".into(),
        ));
    }
    if sample.iter().all(|&v| v == sample[0]) {
        return Err(Error::DegenerateInput("all samples identical".into()));
    }
    match *binning {
        Binning::LogLinear {
            g_lo,
            log_bins,
            linear_bins,
            g_max,
        } => log_linear_pdf(sample, g_lo, log_bins, linear_bins, g_max),
        Binning::Linear { lo, hi, bins } => linear_pdf(sample, lo, hi, bins),
    }
}

fn linear_pdf(sample: &[f64], lo: f64, hi: f64, bins: usize) -> Result<EmpiricalPdf> {
    if !(lo < hi) || bins == 0 {
        return Err(Error::Config(format!(
            "invalid linear binning [{lo}, {hi}] x {bins}"
        )));
    }
    let nb = bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|k| lo + (hi - lo) * (k as f64 / nb))
        .collect();
    let mut counts = vec![0u64; bins];
    for &v in sample {
        if v < lo || v > hi {
            continue;
        }
        let k = (((v - lo) / (hi - lo)) * nb).floor() as usize;
        counts[k.min(bins - 1)] += 1;
    }
    Ok(finish(edges, None, counts, sample.len()))
}

/// Bin assignment works on |v| so that mirrored samples land in mirrored bins.
fn log_linear_pdf(
    sample: &[f64],
    g_lo: f64,
    log_bins: usize,
    linear_bins: usize,
    g_max: Option<f64>,
) -> Result<EmpiricalPdf> {
    if !(g_lo > 0.0) || linear_bins == 0 || !linear_bins.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "invalid log-linear binning: g_lo {g_lo}, {linear_bins} linear bins (must be even and positive)"
        )));
    }
    let sample_max = sample.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let g_max = g_max.unwrap_or(sample_max);
    let log_bins = if g_max > g_lo { log_bins } else { 0 };

    let half = linear_bins / 2;
    // magnitude edges: 0 .. g_lo linear, then g_lo .. g_max logarithmic
    let mut mag_edges: Vec<f64> = (0..=half)
        .map(|j| g_lo * ((2 * j) as f64 / linear_bins as f64))
        .collect();
    let log_ratio = (g_max / g_lo).ln();
    for j in 1..=log_bins {
        mag_edges.push(if j == log_bins {
            g_max
        } else {
            g_lo * (log_ratio * j as f64 / log_bins as f64).exp()
        });
    }
    let mag_bins = half + log_bins;
    let mag_center = |j: usize| -> f64 {
        if j < half {
            0.5 * (mag_edges[j] + mag_edges[j + 1])
        } else {
            (mag_edges[j] * mag_edges[j + 1]).sqrt()
        }
    };

    let mut pos = vec![0u64; mag_bins];
    let mut neg = vec![0u64; mag_bins];
    for &v in sample {
        let a = v.abs();
        let j = if a < g_lo {
            (((a / g_lo) * half as f64).floor() as usize).min(half - 1)
        } else if a <= g_max && log_bins > 0 {
            let t = ((a / g_lo).ln() / log_ratio * log_bins as f64).floor() as usize;
            half + t.min(log_bins - 1)
        } else {
            continue;
        };
        if v.is_sign_negative() && v != 0.0 {
            neg[j] += 1;
        } else {
            pos[j] += 1;
        }
    }

    let mut edges = Vec::with_capacity(2 * mag_bins + 1);
    edges.extend(mag_edges.iter().rev().map(|e| -e));
    edges.extend(mag_edges.iter().skip(1).copied());
    edges[mag_bins] = 0.0;
    let centers: Vec<f64> = (0..mag_bins)
        .rev()
        .map(|j| -mag_center(j))
        .chain((0..mag_bins).map(mag_center))
        .collect();
    let counts: Vec<u64> = neg.iter().rev().chain(pos.iter()).copied().collect();
    Ok(finish(edges, Some(centers), counts, sample.len()))
}

fn finish(edges: Vec<f64>, centers: Option<Vec<f64>>, counts: Vec<u64>, n: usize) -> EmpiricalPdf {
    let centers =
        centers.unwrap_or_else(|| edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect());
    let nf = n as f64;
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (nf * (w[1] - w[0])))
        .collect();
    EmpiricalPdf {
        edges,
        centers,
        density,
        counts,
        total_n: n as u64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Positive => "pos",
            Sign::Negative => "neg",
        }
    }
}

/// Minimum number of same-sign samples for [`tail_ccdf`].
pub const MIN_TAIL_SAMPLES: usize = 10;

/// Empirical P(|g| > x) for one sign, evaluated at the distinct sample magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCcdf {
    pub sign: Sign,
    /// Strictly increasing magnitudes; the largest observed magnitude is
    /// omitted because nothing exceeds it.
    pub magnitudes: Vec<f64>,
    /// Strictly decreasing, strictly positive.
    pub ccdf: Vec<f64>,
    /// Number of samples of this sign.
    pub n: usize,
}

impl TailCcdf {
    /// Builds the CCDF from positive magnitudes, without a minimum-size check.
    pub fn from_magnitudes(sign: Sign, mut magnitudes: Vec<f64>) -> Self {
        magnitudes.sort_by(f64::total_cmp);
        let n = magnitudes.len();
        let nf = n as f64;
        let mut mags = Vec::with_capacity(n);
        let mut ccdf = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            let x = magnitudes[i];
            let mut j = i + 1;
            while j < n && magnitudes[j] == x {
                j += 1;
            }
            let above = n - j;
            if above > 0 {
                mags.push(x);
                ccdf.push(above as f64 / nf);
            }
            i = j;
        }
        TailCcdf {
            sign,
            magnitudes: mags,
            ccdf,
            n,
        }
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// `magnitude,ccdf` rows with a header.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
        w.write_record(["magnitude", "ccdf"]).map_err(io)?;
        for (m, c) in self.magnitudes.iter().zip(&self.ccdf) {
            w.write_record([format!("{m:?}"), format!("{c:?}")])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Signed magnitudes of a sample: `g > 0` for positive, `|g|` of `g < 0` for negative.
pub fn signed_magnitudes(sample: &[f64], sign: Sign) -> Vec<f64> {
    sample
        .iter()
        .filter_map(|&g| match sign {
            Sign::Positive if g > 0.0 => Some(g),
            Sign::Negative if g < 0.0 => Some(-g),
            _ => None,
        })
        .collect()
}

pub fn tail_ccdf(sample: &[f64], sign: Sign) -> Result<TailCcdf> {
    let mags = signed_magnitudes(sample, sign);
    if mags.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientTail {
            needed: MIN_TAIL_SAMPLES,
            got: mags.len(),
        });
    }
    if mags.iter().any(|m| !m.is_finite()) {
        return Err(Error::DegenerateInput(
            "sample contains non-finite values".into(),
        ));
    }
    Ok(TailCcdf::from_magnitudes(sign, mags))
}
