//! Event-time and clock-time log returns, per-instrument standardization and
//! ensemble pooling.
//!
//! A return is only ever formed between two prices of the same continuous
//! session on the same trade date: the lunch break and overnight gaps never
//! contribute.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tickdata::{MidpriceSeries, SessionCalendar, CENTIS_PER_MINUTE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimescaleKind {
    /// Δt counted in trades.
    Event,
    /// Δt counted in minutes.
    Clock,
}

impl TimescaleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TimescaleKind::Event => "event",
            TimescaleKind::Clock => "clock",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimescaleSpec {
    kind: TimescaleKind,
    delta: u32,
}

impl TimescaleSpec {
    pub fn new(kind: TimescaleKind, delta: u32) -> Result<Self> {
        if delta == 0 {
            return Err(Error::Contract("timescale delta must be at least 1".into()));
        }
        Ok(TimescaleSpec { kind, delta })
    }

    pub fn event(trades: u32) -> Result<Self> {
        Self::new(TimescaleKind::Event, trades)
    }

    pub fn clock(minutes: u32) -> Result<Self> {
        Self::new(TimescaleKind::Clock, minutes)
    }

    pub fn kind(self) -> TimescaleKind {
        self.kind
    }

    pub fn delta(self) -> u32 {
        self.delta
    }

    /// Event-time scales of 1, 2, 4, 8, 16 and 32 trades.
    pub fn default_event() -> Vec<TimescaleSpec> {
        [1, 2, 4, 8, 16, 32]
            .into_iter()
            .map(|d| TimescaleSpec::event(d).expect("positive"))
            .collect()
    }

    /// Clock-time scales of 1 to 5 minutes.
    pub fn default_clock() -> Vec<TimescaleSpec> {
        (1..=5)
            .map(|d| TimescaleSpec::clock(d).expect("positive"))
            .collect()
    }

    /// Parses `event:1,2,4` or `clock:1,5` into one spec per delta.
    pub fn parse_list(s: &str) -> Result<Vec<TimescaleSpec>> {
        let bad = || {
            Error::Config(format!(
                "invalid timescale list {s:?}, expected e.g. event:1,2,4"
            ))
        };
        let (kind, deltas) = s.trim().split_once(':').ok_or_else(bad)?;
        let kind = match kind.trim() {
            "event" => TimescaleKind::Event,
            "clock" => TimescaleKind::Clock,
            _ => return Err(bad()),
        };
        deltas
            .split(',')
            .map(|d| {
                let delta = d.trim().parse::<u32>().map_err(|_| bad())?;
                TimescaleSpec::new(kind, delta).map_err(|_| bad())
            })
            .collect()
    }
}

impl fmt::Display for TimescaleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.as_str(), self.delta)
    }
}

impl FromStr for TimescaleSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match TimescaleSpec::parse_list(s)?.as_slice() {
            [one] => Ok(*one),
            _ => Err(Error::Config(format!(
                "expected a single timescale, got {s:?}"
            ))),
        }
    }
}

impl TryFrom<String> for TimescaleSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TimescaleSpec> for String {
    fn from(t: TimescaleSpec) -> Self {
        t.to_string()
    }
}

/// Log returns of one instrument at one timescale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub instrument_id: String,
    pub timescale: TimescaleSpec,
    pub values: Vec<f64>,
}

/// `ln S(t) − ln S(t−Δt)` over trade counts, within each session.
///
/// A session with `n` prices yields `max(0, n − delta)` overlapping returns.
pub fn event_returns(series: &MidpriceSeries, delta: u32) -> Result<ReturnSeries> {
    let timescale = TimescaleSpec::event(delta)?;
    let lag = delta as usize;
    let mut values = Vec::with_capacity(series.len().saturating_sub(lag));
    for segment in series.segments() {
        let log_prices: Vec<f64> = series
            .segment_points(segment)
            .iter()
            .map(|p| p.midprice.ln())
            .collect();
        values.extend(
            log_prices
                .iter()
                .skip(lag)
                .zip(&log_prices)
                .map(|(now, then)| now - then),
        );
    }
    Ok(ReturnSeries {
        instrument_id: series.instrument_id().to_owned(),
        timescale,
        values,
    })
}

/// Returns between consecutive previous-tick samples on a `delta`-minute grid.
///
/// The grid restarts at every session open (`open`, `open + Δ`, … up to the
/// close inclusive). A grid time takes the last midprice at or before it in
/// the same session; grid times preceding the session's first trade are
/// skipped.
pub fn clock_returns(
    series: &MidpriceSeries,
    delta: u32,
    calendar: &SessionCalendar,
) -> Result<ReturnSeries> {
    let timescale = TimescaleSpec::clock(delta)?;
    let step = delta * CENTIS_PER_MINUTE;
    let windows = calendar.continuous_sessions();
    let mut values = Vec::new();
    for segment in series.segments() {
        let window = windows.get(segment.session).ok_or_else(|| {
            Error::Contract(format!(
                "series session {} not present in calendar",
                segment.session
            ))
        })?;
        let points = series.segment_points(segment);
        let mut next = 0;
        let mut previous_log: Option<f64> = None;
        let mut grid = window.start.centis();
        while grid <= window.end.centis() {
            while next < points.len() && points[next].timestamp.centis() <= grid {
                next += 1;
            }
            if next > 0 {
                let log_price = points[next - 1].midprice.ln();
                if let Some(prev) = previous_log {
                    values.push(log_price - prev);
                }
                previous_log = Some(log_price);
            }
            grid += step;
        }
    }
    Ok(ReturnSeries {
        instrument_id: series.instrument_id().to_owned(),
        timescale,
        values,
    })
}

/// Returns demeaned and scaled by their own sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSeries {
    pub instrument_id: String,
    pub timescale: TimescaleSpec,
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample (n − 1) standard deviation of the raw returns.
    pub stdev: f64,
}

pub fn standardize(series: &ReturnSeries) -> Result<StandardizedSeries> {
    let n = series.values.len();
    if n < 2 {
        return Err(Error::TooFewReturns {
            instrument: series.instrument_id.clone(),
            got: n,
        });
    }
    let mean = series.values.iter().sum::<f64>() / n as f64;
    let ss: f64 = series.values.iter().map(|r| (r - mean).powi(2)).sum();
    let stdev = (ss / (n - 1) as f64).sqrt();
    if !(stdev > 0.0) || !stdev.is_finite() {
        return Err(Error::DegenerateSeries {
            instrument: series.instrument_id.clone(),
        });
    }
    Ok(StandardizedSeries {
        instrument_id: series.instrument_id.clone(),
        timescale: series.timescale,
        values: series.values.iter().map(|r| (r - mean) / stdev).collect(),
        mean,
        stdev,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentStats {
    pub instrument_id: String,
    pub mean: f64,
    pub stdev: f64,
    pub count: usize,
}

/// Standardized returns of many instruments treated as one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedEnsemble {
    pub timescale: TimescaleSpec,
    pub values: Vec<f64>,
    pub per_instrument: Vec<InstrumentStats>,
}

impl StandardizedEnsemble {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn pool_ensemble(series: &[StandardizedSeries]) -> Result<StandardizedEnsemble> {
    let first = series
        .first()
        .ok_or_else(|| Error::InsufficientData("no series to pool".into()))?;
    let mut values = Vec::with_capacity(series.iter().map(|s| s.values.len()).sum());
    let mut per_instrument = Vec::with_capacity(series.len());
    for s in series {
        if s.timescale != first.timescale {
            return Err(Error::MixedTimescales {
                expected: first.timescale,
                found: s.timescale,
            });
        }
        values.extend_from_slice(&s.values);
        per_instrument.push(InstrumentStats {
            instrument_id: s.instrument_id.clone(),
            mean: s.mean,
            stdev: s.stdev,
            count: s.values.len(),
        });
    }
    Ok(StandardizedEnsemble {
        timescale: first.timescale,
        values,
        per_instrument,
    })
}

/// Trades per minute of continuous trading over the days present in the series.
pub fn trading_frequency(series: &MidpriceSeries, calendar: &SessionCalendar) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let minutes = series.trading_days() as f64 * calendar.continuous_minutes();
    Ok(series.len() as f64 / minutes)
}

/// One value per line, shortest round-trip formatting.
pub fn write_values<W: std::io::Write>(mut writer: W, values: &[f64]) -> std::io::Result<()> {
    for v in values {
        writeln!(writer, "{v:?}")?;
    }
    Ok(())
}

/// Reads a one-value-per-line file; blank lines and `#` comments are skipped.
pub fn read_values<R: std::io::BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Malformed {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| Error::Malformed {
            line: idx + 1,
            reason: format!("not a number: {t:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Malformed {
                line: idx + 1,
                reason: "non-finite value".into(),
            });
        }
        out.push(v);
    }
    Ok(out)
}
