//! End-to-end runs: tick input to report tables, curve files and
//! diagnostics.
//!
//! Instruments and timescales are processed in parallel; every collection is
//! merged back in input order, so output files are byte-identical between
//! runs of the same config.

mod config;
mod report;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    default_scaling_range, FitConfig, InputConfig, PipelineConfig, RangeOverride, CONFIG_VERSION,
    OUTPUT_DIR_ENV, REFERENCE_FREQUENCIES,
};
pub use report::{
    emit_report, read_report_json, round_significant, ReportFormat, ReportRow, REPORT_COLUMNS,
};

use crate::diststats::{
    empirical_pdf, moments, tail_ccdf, Binning, EmpiricalPdf, MomentStats, Sign, TailCcdf,
};
use crate::error::{Error, Result};
use crate::fitting::{
    fit_student, fit_tail, hill_from_sample, HillEstimate, ScalingRange, StudentFit,
    StudentFitOptions, TailFit,
};
use crate::returns::{
    clock_returns, event_returns, pool_ensemble, standardize, trading_frequency,
    StandardizedSeries, TimescaleKind, TimescaleSpec,
};
use crate::synth::generate_tick_stream;
use crate::tickdata::{build_midprice_series, parse_ticks, MidpriceSeries, ParseStats, TickEvent};

/// Result of one estimator: either a value or the reason it could not be
/// produced. Failures are reported, never dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FitStatus<T> {
    Fitted(T),
    Failed { reason: String },
}

impl<T> FitStatus<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => FitStatus::Fitted(v),
            Err(e) => FitStatus::Failed {
                reason: e.to_string(),
            },
        }
    }

    pub fn fitted(&self) -> Option<&T> {
        match self {
            FitStatus::Fitted(v) => Some(v),
            FitStatus::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailResult {
    pub sign: Sign,
    /// Range requested for the regression.
    pub range: ScalingRange,
    pub fit: FitStatus<TailFit>,
    pub hill: FitStatus<HillEstimate>,
    #[serde(skip)]
    pub ccdf: Option<TailCcdf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedInstrument {
    pub instrument_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimescaleResult {
    pub timescale: TimescaleSpec,
    pub n_returns: usize,
    pub n_instruments: usize,
    pub skipped: Vec<SkippedInstrument>,
    pub moments: MomentStats,
    pub student: FitStatus<StudentFit>,
    pub positive: TailResult,
    pub negative: TailResult,
    #[serde(skip)]
    pub pdf: Option<EmpiricalPdf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentSummary {
    pub instrument_id: String,
    pub events: usize,
    pub trading_days: usize,
    pub trades_per_minute: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub parse_stats: Option<ParseStats>,
    pub instruments: Vec<InstrumentSummary>,
    pub results: Vec<TimescaleResult>,
    /// Timescales that produced no row, with the reason.
    pub missing: Vec<(TimescaleSpec, String)>,
}

impl PipelineOutput {
    pub fn rows(&self, kind: TimescaleKind) -> Vec<ReportRow> {
        self.results
            .iter()
            .filter(|r| r.timescale.kind() == kind)
            .map(ReportRow::from_result)
            .collect()
    }

    /// Human-readable reasons the run is degraded; empty for a clean run.
    pub fn flags(&self) -> Vec<String> {
        let mut flags = Vec::new();
        if self.instruments.is_empty() {
            flags.push("no accepted tick events".to_owned());
        }
        for (t, reason) in &self.missing {
            flags.push(format!("{t}: no row ({reason})"));
        }
        for r in &self.results {
            let t = r.timescale;
            for s in &r.skipped {
                flags.push(format!("{t}: skipped {} ({})", s.instrument_id, s.reason));
            }
            match &r.student {
                FitStatus::Fitted(f) if !f.converged => flags.push(format!(
                    "{t}: Student fit did not converge ({:?})",
                    f.termination
                )),
                FitStatus::Failed { reason } => {
                    flags.push(format!("{t}: Student fit failed ({reason})"))
                }
                FitStatus::Fitted(_) => {}
            }
            for tail in [&r.positive, &r.negative] {
                if let FitStatus::Failed { reason } = &tail.fit {
                    flags.push(format!(
                        "{t}: {} tail fit failed ({reason})",
                        tail.sign.as_str()
                    ));
                }
            }
        }
        flags
    }

    pub fn is_degraded(&self) -> bool {
        !self.flags().is_empty()
    }
}

/// Events grouped by instrument, and parse counts when read from files.
pub type LoadedEvents = (BTreeMap<String, Vec<TickEvent>>, Option<ParseStats>);

/// Reads or generates the input events, grouped by instrument.
pub fn load_events(config: &PipelineConfig) -> Result<LoadedEvents> {
    match &config.input {
        InputConfig::Files { paths } => {
            let parsed: Vec<Result<_>> = paths
                .par_iter()
                .map(|path| {
                    let file = File::open(path).map_err(|e| Error::io(path, e))?;
                    parse_ticks(BufReader::new(file), &config.calendar)
                        .map_err(|e| e.context(path.display().to_string()))
                })
                .collect();
            let mut all = crate::tickdata::ParsedTicks::default();
            for p in parsed {
                all.merge(p?);
            }
            Ok((all.by_instrument, Some(all.stats)))
        }
        InputConfig::Synthetic { streams } => {
            let generated: Vec<Result<Vec<TickEvent>>> = streams
                .par_iter()
                .map(|s| {
                    let mut s = s.clone();
                    s.calendar = config.calendar.clone();
                    generate_tick_stream(&s)
                        .map_err(|e| e.context(format!("stream {}", s.instrument_id)))
                })
                .collect();
            let mut by_instrument = BTreeMap::new();
            for (spec, events) in streams.iter().zip(generated) {
                let events = events?;
                if !events.is_empty() {
                    by_instrument.insert(spec.instrument_id.clone(), events);
                }
            }
            Ok((by_instrument, None))
        }
    }
}

fn build_all_series(
    events: &BTreeMap<String, Vec<TickEvent>>,
    config: &PipelineConfig,
) -> Result<Vec<MidpriceSeries>> {
    let entries: Vec<(&String, &Vec<TickEvent>)> = events.iter().collect();
    let built: Vec<Result<MidpriceSeries>> = entries
        .par_iter()
        .map(|(id, ev)| {
            build_midprice_series(ev, &config.calendar)
                .map_err(|e| e.context(format!("instrument {id}")))
        })
        .collect();
    built.into_iter().collect()
}

fn standardized_for(
    series: &[MidpriceSeries],
    timescale: TimescaleSpec,
    config: &PipelineConfig,
) -> Result<(Vec<StandardizedSeries>, Vec<SkippedInstrument>)> {
    let mut kept = Vec::with_capacity(series.len());
    let mut skipped = Vec::new();
    for s in series {
        let ctx = |e: Error| {
            e.context(format!(
                "instrument {}, timescale {timescale}",
                s.instrument_id()
            ))
        };
        let returns = match timescale.kind() {
            TimescaleKind::Event => event_returns(s, timescale.delta()),
            TimescaleKind::Clock => clock_returns(s, timescale.delta(), &config.calendar),
        }
        .map_err(ctx)?;
        match standardize(&returns) {
            Ok(z) => kept.push(z),
            Err(Error::TooFewReturns { got, .. }) => skipped.push(SkippedInstrument {
                instrument_id: s.instrument_id().to_owned(),
                reason: format!("only {got} returns"),
            }),
            Err(e) => return Err(ctx(e)),
        }
    }
    Ok((kept, skipped))
}

fn tail_result(sample: &[f64], sign: Sign, range: ScalingRange, hill_k: usize) -> TailResult {
    let ccdf = tail_ccdf(sample, sign);
    let fit = match &ccdf {
        Ok(c) => FitStatus::from_result(fit_tail(c, &range)),
        Err(e) => FitStatus::Failed {
            reason: e.to_string(),
        },
    };
    let available = sample
        .iter()
        .filter(|&&g| match sign {
            Sign::Positive => g > 0.0,
            Sign::Negative => g < 0.0,
        })
        .count();
    let k = hill_k.min(available.saturating_sub(1));
    let hill = FitStatus::from_result(hill_from_sample(sample, sign, k));
    TailResult {
        sign,
        range,
        fit,
        hill,
        ccdf: ccdf.ok(),
    }
}

/// Statistics and fits for one pooled sample of standardized returns.
///
/// `ranges` are the (positive, negative) tail scaling ranges.
pub fn analyze_sample(
    sample: &[f64],
    timescale: TimescaleSpec,
    binning: &Binning,
    fit: &FitConfig,
    ranges: (ScalingRange, ScalingRange),
) -> Result<TimescaleResult> {
    let moments = moments(sample)?;
    let pdf = empirical_pdf(sample, binning)?;
    let options = StudentFitOptions {
        fix_m_to_zero: fit.fix_m_to_zero,
        min_count: fit.min_count,
        ..StudentFitOptions::default()
    };
    let student = FitStatus::from_result(fit_student(&pdf, &options));
    let positive = tail_result(sample, Sign::Positive, ranges.0, fit.hill_k);
    let negative = tail_result(sample, Sign::Negative, ranges.1, fit.hill_k);
    Ok(TimescaleResult {
        timescale,
        n_returns: sample.len(),
        n_instruments: 1,
        skipped: Vec::new(),
        moments,
        student,
        positive,
        negative,
        pdf: Some(pdf),
    })
}

enum Outcome {
    Row(Box<TimescaleResult>),
    Missing(String),
}

fn run_timescale(
    series: &[MidpriceSeries],
    timescale: TimescaleSpec,
    config: &PipelineConfig,
) -> Result<Outcome> {
    let (standardized, skipped) = standardized_for(series, timescale, config)?;
    if standardized.is_empty() {
        return Ok(Outcome::Missing("no instrument has enough returns".into()));
    }
    let ensemble = pool_ensemble(&standardized)?;
    let ranges = (
        config.scaling_range(timescale, Sign::Positive),
        config.scaling_range(timescale, Sign::Negative),
    );
    match analyze_sample(
        &ensemble.values,
        timescale,
        &config.binning,
        &config.fit,
        ranges,
    ) {
        Ok(mut r) => {
            r.n_instruments = standardized.len();
            r.skipped = skipped;
            Ok(Outcome::Row(Box::new(r)))
        }
        Err(e @ Error::DegenerateInput(_)) => Ok(Outcome::Missing(e.to_string())),
        Err(e) => Err(e.context(format!("timescale {timescale}"))),
    }
}

/// Runs every configured timescale over the configured input.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let (events, parse_stats) = load_events(config)?;
    let series = build_all_series(&events, config)?;
    let instruments = series
        .iter()
        .map(|s| {
            Ok(InstrumentSummary {
                instrument_id: s.instrument_id().to_owned(),
                events: s.len(),
                trading_days: s.trading_days(),
                trades_per_minute: trading_frequency(s, &config.calendar)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut output = PipelineOutput {
        parse_stats,
        instruments,
        results: Vec::new(),
        missing: Vec::new(),
    };
    if series.is_empty() {
        return Ok(output);
    }
    let outcomes: Vec<Result<Outcome>> = config
        .timescales
        .par_iter()
        .map(|&t| run_timescale(&series, t, config))
        .collect();
    for (&t, outcome) in config.timescales.iter().zip(outcomes) {
        match outcome? {
            Outcome::Row(r) => output.results.push(*r),
            Outcome::Missing(reason) => output.missing.push((t, reason)),
        }
    }
    Ok(output)
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    degraded: bool,
    flags: Vec<String>,
    #[serde(flatten)]
    output: &'a PipelineOutput,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `report_{event,clock}.{csv,json}`, `diagnostics.json` and the
/// `curves/` directory. Returns the paths written, in order.
pub fn write_outputs(output: &PipelineOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let curves = dir.join("curves");
    fs::create_dir_all(&curves).map_err(|e| Error::io(&curves, e))?;
    let mut written = Vec::new();

    for kind in [TimescaleKind::Event, TimescaleKind::Clock] {
        let rows = output.rows(kind);
        for format in [ReportFormat::Csv, ReportFormat::Json] {
            let path = dir.join(format!("report_{}.{}", kind.as_str(), format.extension()));
            let mut w = create(&path)?;
            emit_report(&rows, format, &mut w)
                .map_err(|e| e.context(path.display().to_string()))?;
            finish(w, &path)?;
            written.push(path);
        }
    }

    let path = dir.join("diagnostics.json");
    let mut w = create(&path)?;
    let diagnostics = Diagnostics {
        degraded: output.is_degraded(),
        flags: output.flags(),
        output,
    };
    serde_json::to_writer_pretty(&mut w, &diagnostics).map_err(|e| Error::io(&path, e.into()))?;
    w.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
    finish(w, &path)?;
    written.push(path);

    for r in &output.results {
        let stem = format!("{}_{}", r.timescale.kind().as_str(), r.timescale.delta());
        if let Some(pdf) = &r.pdf {
            let path = curves.join(format!("{stem}_pdf.csv"));
            let w = create(&path)?;
            pdf.write_csv(w)
                .map_err(|e| e.context(path.display().to_string()))?;
            written.push(path);
        }
        for tail in [&r.positive, &r.negative] {
            if let Some(ccdf) = &tail.ccdf {
                let path = curves.join(format!("{stem}_ccdf_{}.csv", tail.sign.as_str()));
                let w = create(&path)?;
                ccdf.write_csv(w)
                    .map_err(|e| e.context(path.display().to_string()))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::ReturnModel;

    fn small_config() -> PipelineConfig {
        let mut c = PipelineConfig::synthetic_default();
        if let InputConfig::Synthetic { streams } = &mut c.input {
            streams.truncate(3);
            for s in streams.iter_mut() {
                s.end_date = s.start_date;
            }
        }
        c.timescales = TimescaleSpec::parse_list("event:1,4").unwrap();
        c
    }

    #[test]
    fn small_synthetic_run() {
        let out = run_pipeline(&small_config()).unwrap();
        assert_eq!(out.instruments.len(), 3);
        assert_eq!(out.results.len(), 2);
        assert_eq!(out.rows(TimescaleKind::Event).len(), 2);
        assert!(out.rows(TimescaleKind::Clock).is_empty());
        let r = &out.results[0];
        assert_eq!(r.n_instruments, 3);
        assert!(r.student.fitted().is_some());
    }

    #[test]
    fn constant_model_is_degenerate() {
        let mut c = small_config();
        if let InputConfig::Synthetic { streams } = &mut c.input {
            streams[1].return_model = ReturnModel::Constant { value: 0.0 };
        }
        let err = run_pipeline(&c).unwrap_err();
        assert!(
            matches!(err.root(), Error::DegenerateSeries { .. }),
            "{err}"
        );
        assert!(err.to_string().contains("SYN002"), "{err}");
    }

    #[test]
    fn empty_file_gives_empty_degraded_output() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        fs::write(&path, "").unwrap();
        let mut c = small_config();
        c.input = InputConfig::Files { paths: vec![path] };
        let out = run_pipeline(&c).unwrap();
        assert!(out.results.is_empty());
        assert!(out.is_degraded());
        let written = write_outputs(&out, dir.path()).unwrap();
        assert_eq!(written.len(), 5);
    }

    #[test]
    fn missing_file_names_the_path() {
        let mut c = small_config();
        c.input = InputConfig::Files {
            paths: vec![PathBuf::from("/nonexistent/ticks.csv")],
        };
        let err = run_pipeline(&c).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/ticks.csv"));
    }
}
