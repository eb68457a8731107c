use chrono::{Datelike, NaiveDate, Weekday};
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::{ReturnModel, Sampler};
use crate::error::{Error, Result};
use crate::tickdata::{Price, SessionCalendar, TickEvent, TimeOfDay, CENTIS_PER_MINUTE, TICK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalProcess {
    /// Exponential inter-arrival times.
    #[default]
    Poisson,
    /// Evenly spaced trades, the k-th at `(k + ½)/rate` minutes into each session.
    Regular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticStreamSpec {
    pub instrument_id: String,
    /// First trading date, inclusive.
    pub start_date: NaiveDate,
    /// Last trading date, inclusive. Weekends are skipped.
    pub end_date: NaiveDate,
    pub trades_per_minute: f64,
    #[serde(default)]
    pub arrival: ArrivalProcess,
    pub return_model: ReturnModel,
    pub initial_price: Price,
    pub seed: u64,
    #[serde(default)]
    pub calendar: SessionCalendar,
}

impl SyntheticStreamSpec {
    pub fn validate(&self) -> Result<()> {
        if self.instrument_id.is_empty() || self.instrument_id.contains([',', '\n', '#']) {
            return Err(Error::Config(format!(
                "invalid synthetic instrument id {:?}",
                self.instrument_id
            )));
        }
        if self.end_date < self.start_date {
            return Err(Error::Config(format!(
                "synthetic date range {}..{} is empty",
                self.start_date, self.end_date
            )));
        }
        if !(self.trades_per_minute > 0.0 && self.trades_per_minute.is_finite()) {
            return Err(Error::Config(format!(
                "trades_per_minute must be positive, got {}",
                self.trades_per_minute
            )));
        }
        if self.initial_price <= TICK {
            return Err(Error::Config(format!(
                "initial price {} must exceed one tick",
                self.initial_price
            )));
        }
        self.return_model.validate()
    }
}

/// Monday-to-Friday dates in `[start, end]`.
pub fn weekdays(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    start
        .iter_days()
        .take_while(|d| *d <= end)
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect()
}

/// Tick stream whose log-midprice moves by one i.i.d. draw from the return
/// model per trade.
///
/// The log-midprice restarts from `initial_price` every day. Midprices are
/// rounded to 0.001 and quoted with a half-spread of one tick, so bid and
/// ask are exact prices and the midprice is recovered exactly on parsing.
/// Returns between consecutive trades therefore equal the model draws up to
/// that rounding.
pub fn generate_tick_stream(spec: &SyntheticStreamSpec) -> Result<Vec<TickEvent>> {
    spec.validate()?;
    let mut sampler = Sampler::new(spec.return_model, spec.seed)?;
    let gap = Exp::new(spec.trades_per_minute)
        .map_err(|e| Error::Config(format!("arrival rate: {e}")))?;
    let base = spec.initial_price.millis() as f64;
    let mut events = Vec::new();

    for date in weekdays(spec.start_date, spec.end_date) {
        let mut log_move = 0.0;
        for window in spec.calendar.continuous_sessions() {
            let start = window.start.centis();
            let minutes = window.minutes();
            let mut k = 0u64;
            let mut t = 0.0;
            loop {
                t = match spec.arrival {
                    ArrivalProcess::Poisson => t + gap.sample(sampler.rng()),
                    ArrivalProcess::Regular => (k as f64 + 0.5) / spec.trades_per_minute,
                };
                k += 1;
                if t >= minutes {
                    break;
                }
                let centis = start + (t * CENTIS_PER_MINUTE as f64).floor() as u32;
                if !window.contains(centis) {
                    break;
                }
                log_move += sampler.draw();
                let mid = (base * log_move.exp()).round();
                if !(mid > TICK.millis() as f64 && mid < 1e15) {
                    return Err(Error::Domain(format!(
                        "synthetic midprice for {} left the quotable range on {date}; \
                         reduce the return scale or raise the initial price",
                        spec.instrument_id
                    )));
                }
                let mid = Price::from_millis(mid as i64);
                events.push(TickEvent {
                    instrument_id: spec.instrument_id.clone(),
                    trade_date: date,
                    timestamp: TimeOfDay::from_centis(centis).expect("inside a session window"),
                    best_bid: Price::from_millis(mid.millis() - TICK.millis()),
                    best_ask: Price::from_millis(mid.millis() + TICK.millis()),
                });
            }
        }
    }
    Ok(events)
}
