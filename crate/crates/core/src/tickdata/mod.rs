//! Tick-file ingestion: record parsing, quote validation, session filtering
//! and per-instrument midprice series.
//!
//! The canonical tick file is UTF-8 text with one record per line:
//!
//! ```text
//! # instrument_id,YYYYMMDD,timestamp_centiseconds,best_bid,best_ask
//! 000001,20030102,3420050,9.98,10.00
//! ```
//!
//! Each record is the state of the book right after a transaction.

mod calendar;
mod price;
mod series;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use calendar::{
    SessionCalendar, TimeOfDay, TimeWindow, CENTIS_PER_DAY, CENTIS_PER_MINUTE, CENTIS_PER_SECOND,
};
pub use price::{Midprice, ParsePriceError, Price, PRICE_SCALE, TICK};
pub use series::{build_midprice_series, MidpricePoint, MidpriceSeries, Segment};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickEvent {
    pub instrument_id: String,
    pub trade_date: NaiveDate,
    pub timestamp: TimeOfDay,
    pub best_bid: Price,
    pub best_ask: Price,
}

impl TickEvent {
    pub fn midprice(&self) -> Midprice {
        midprice(self)
    }
}

/// Canonical tick-file line, without the trailing newline.
impl fmt::Display for TickEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            self.instrument_id,
            self.trade_date.format("%Y%m%d"),
            self.timestamp.centis(),
            self.best_bid,
            self.best_ask
        )
    }
}

/// Arithmetic mean of best bid and best ask, exact.
pub fn midprice(event: &TickEvent) -> Midprice {
    Midprice::of(event.best_bid, event.best_ask)
}

/// Record counters for one parse. `records == accepted + crossed + non_positive + out_of_session`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    pub records: u64,
    pub accepted: u64,
    pub crossed: u64,
    pub non_positive: u64,
    pub out_of_session: u64,
}

impl ParseStats {
    pub fn rejected(&self) -> u64 {
        self.crossed + self.non_positive
    }

    pub fn merge(&mut self, other: &ParseStats) {
        self.records += other.records;
        self.accepted += other.accepted;
        self.crossed += other.crossed;
        self.non_positive += other.non_positive;
        self.out_of_session += other.out_of_session;
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedTicks {
    /// Accepted events per instrument, each sorted by (date, timestamp) with
    /// ties kept in input order.
    pub by_instrument: BTreeMap<String, Vec<TickEvent>>,
    pub stats: ParseStats,
}

impl ParsedTicks {
    /// Folds another parse result in, keeping per-instrument ordering.
    pub fn merge(&mut self, other: ParsedTicks) {
        for (id, mut events) in other.by_instrument {
            let slot = self.by_instrument.entry(id).or_default();
            slot.append(&mut events);
            slot.sort_by_key(|e| (e.trade_date, e.timestamp));
        }
        self.stats.merge(&other.stats);
    }

    pub fn event_count(&self) -> usize {
        self.by_instrument.values().map(Vec::len).sum()
    }
}

enum RecordOutcome {
    Accepted(TickEvent),
    Crossed,
    NonPositive,
}

fn parse_record(line: &str, line_no: usize) -> Result<RecordOutcome> {
    let malformed = |reason: String| Error::Malformed {
        line: line_no,
        reason,
    };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(malformed(format!(
            "expected 5 fields, found {}",
            fields.len()
        )));
    }
    let instrument_id = fields[0];
    if instrument_id.is_empty() {
        return Err(malformed("empty instrument id".into()));
    }
    let date_str = fields[1];
    if date_str.len() != 8 || !date_str.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(format!("invalid date {date_str:?}")));
    }
    let trade_date = NaiveDate::parse_from_str(date_str, "%Y%m%d")
        .map_err(|_| malformed(format!("invalid date {date_str:?}")))?;
    let timestamp = fields[2]
        .parse::<u32>()
        .ok()
        .and_then(TimeOfDay::from_centis)
        .ok_or_else(|| malformed(format!("invalid timestamp {:?}", fields[2])))?;
    let best_bid: Price = fields[3]
        .parse()
        .map_err(|e| malformed(format!("bid: {e}")))?;
    let best_ask: Price = fields[4]
        .parse()
        .map_err(|e| malformed(format!("ask: {e}")))?;

    if !best_bid.is_positive() || !best_ask.is_positive() {
        return Ok(RecordOutcome::NonPositive);
    }
    if best_bid > best_ask {
        return Ok(RecordOutcome::Crossed);
    }
    Ok(RecordOutcome::Accepted(TickEvent {
        instrument_id: instrument_id.to_owned(),
        trade_date,
        timestamp,
        best_bid,
        best_ask,
    }))
}

/// Parses a tick stream, rejecting invalid quotes and dropping records that
/// fall outside every continuous session.
///
/// A line that does not match the record grammar aborts the parse with its
/// 1-based line number. Rejected and out-of-session records are only counted.
pub fn parse_ticks<R: BufRead>(mut reader: R, calendar: &SessionCalendar) -> Result<ParsedTicks> {
    let mut out = ParsedTicks::default();
    let mut line = String::new();
    let mut line_no = 0;
    loop {
        line.clear();
        let read = reader.read_line(&mut line).map_err(|e| Error::Malformed {
            line: line_no + 1,
            reason: e.to_string(),
        })?;
        if read == 0 {
            break;
        }
        line_no += 1;
        let record = line.trim_end_matches(['\n', '\r']);
        if record.trim().is_empty() || record.starts_with('#') {
            continue;
        }
        out.stats.records += 1;
        match parse_record(record, line_no)? {
            RecordOutcome::Crossed => out.stats.crossed += 1,
            RecordOutcome::NonPositive => out.stats.non_positive += 1,
            RecordOutcome::Accepted(event) => {
                if calendar.session_of(event.timestamp.centis()).is_none() {
                    out.stats.out_of_session += 1;
                    continue;
                }
                out.stats.accepted += 1;
                match out.by_instrument.get_mut(&event.instrument_id) {
                    Some(events) => events.push(event),
                    None => {
                        out.by_instrument
                            .insert(event.instrument_id.clone(), vec![event]);
                    }
                }
            }
        }
    }
    for events in out.by_instrument.values_mut() {
        // stable: equal timestamps keep feed order
        events.sort_by_key(|e| (e.trade_date, e.timestamp));
    }
    Ok(out)
}

/// Writes events in the canonical tick-file format.
pub fn write_ticks<'a, W, I>(mut writer: W, events: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a TickEvent>,
{
    for event in events {
        writeln!(writer, "{event}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ParsedTicks {
        parse_ticks(text.as_bytes(), &SessionCalendar::default()).unwrap()
    }

    #[test]
    fn maps_fields_directly() {
        let parsed = parse("000001,20030102,3420050,9.98,10.00\n");
        let events = &parsed.by_instrument["000001"];
        assert_eq!(events.len(), 1);
        let e = &events[0];
        assert_eq!(e.trade_date, NaiveDate::from_ymd_opt(2003, 1, 2).unwrap());
        assert_eq!(e.timestamp.centis(), 3_420_050);
        assert_eq!(e.best_bid, Price::from_millis(9_980));
        assert_eq!(e.best_ask, Price::from_millis(10_000));
    }

    #[test]
    fn timestamp_past_midnight_is_malformed() {
        // 34_200_500 cs is 95:00:05, past midnight: not a time of day.
        let err = parse_ticks(
            "000001,20030102,34200500,9.98,10.00\n".as_bytes(),
            &SessionCalendar::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 1, .. }));
    }

    #[test]
    fn crossed_and_non_positive_are_counted() {
        let parsed = parse(
            "# header\n\
             000001,20030102,3420050,10.02,10.00\n\
             000001,20030102,3420050,0.00,10.00\n\
             000001,20030102,3420050,-1.00,10.00\n\
             000001,20030102,3420050,10.00,10.00\n",
        );
        assert_eq!(parsed.stats.crossed, 1);
        assert_eq!(parsed.stats.non_positive, 2);
        assert_eq!(parsed.stats.accepted, 1);
        assert_eq!(parsed.stats.records, 4);
    }

    #[test]
    fn call_auction_events_are_dropped() {
        // 09:20:00 falls in the opening call auction
        let parsed = parse("000001,20030102,3360000,9.98,10.00\n");
        assert_eq!(parsed.stats.out_of_session, 1);
        assert!(parsed.by_instrument.is_empty());
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let cal = SessionCalendar::default();
        for bad in [
            "000001,20030102,3420050,9.98",
            "000001,2003012,3420050,9.98,10.00",
            "000001,20031302,3420050,9.98,10.00",
            "000001,20030102,abc,9.98,10.00",
            "000001,20030102,3420050,9.9812,10.00",
            ",20030102,3420050,9.98,10.00",
        ] {
            let text = format!("# comment\n\n{bad}\n");
            match parse_ticks(text.as_bytes(), &cal) {
                Err(Error::Malformed { line, .. }) => assert_eq!(line, 3, "{bad}"),
                other => panic!("{bad}: {other:?}"),
            }
        }
    }

    #[test]
    fn groups_and_sorts_stably() {
        let parsed = parse(
            "B,20030103,3420000,5.00,5.01\n\
             A,20030102,3420100,1.00,1.02\n\
             A,20030102,3420000,1.00,1.04\n\
             A,20030102,3420000,1.00,1.06\n\
             B,20030102,3420000,5.00,5.02\n",
        );
        let a = &parsed.by_instrument["A"];
        let asks: Vec<_> = a.iter().map(|e| e.best_ask.to_string()).collect();
        assert_eq!(asks, ["1.04", "1.06", "1.02"]);
        let b = &parsed.by_instrument["B"];
        assert_eq!(
            b[0].trade_date,
            NaiveDate::from_ymd_opt(2003, 1, 2).unwrap()
        );
    }

    #[test]
    fn canonical_round_trip() {
        let text =
            "000001,20030102,3420050,9.98,10.00\n000002,20030102,4800000,1000.125,1000.145\n";
        let parsed = parse(text);
        let mut out = Vec::new();
        for events in parsed.by_instrument.values() {
            write_ticks(&mut out, events).unwrap();
        }
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }
}
