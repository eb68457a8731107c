use std::ops::Range;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{midprice, Midprice, SessionCalendar, TickEvent, TimeOfDay};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MidpricePoint {
    pub trade_date: NaiveDate,
    pub timestamp: TimeOfDay,
    pub midprice: Midprice,
    /// Index of the continuous session (within the day) holding this point.
    pub session: usize,
}

/// Maximal run of points sharing one trade date and one continuous session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub trade_date: NaiveDate,
    pub session: usize,
    pub range: Range<usize>,
}

/// Midprices after each transaction of one instrument, in time order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MidpriceSeries {
    instrument_id: String,
    points: Vec<MidpricePoint>,
    segments: Vec<Segment>,
}

impl MidpriceSeries {
    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn points(&self) -> &[MidpricePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Session/day runs in order. Returns are never formed across two segments.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment_points(&self, segment: &Segment) -> &[MidpricePoint] {
        &self.points[segment.range.clone()]
    }

    /// Number of distinct trade dates with at least one point.
    pub fn trading_days(&self) -> usize {
        let mut days = 0;
        let mut last = None;
        for seg in &self.segments {
            if last != Some(seg.trade_date) {
                days += 1;
                last = Some(seg.trade_date);
            }
        }
        days
    }
}

/// One point per event, labelled with its continuous session.
///
/// Events must share one instrument, be sorted by (date, timestamp), and lie
/// inside a continuous session of `calendar`; `parse_ticks` output satisfies
/// all three.
pub fn build_midprice_series(
    events: &[TickEvent],
    calendar: &SessionCalendar,
) -> Result<MidpriceSeries> {
    let Some(first) = events.first() else {
        return Ok(MidpriceSeries::default());
    };
    let mut points = Vec::with_capacity(events.len());
    let mut segments: Vec<Segment> = Vec::new();
    for (index, event) in events.iter().enumerate() {
        if event.instrument_id != first.instrument_id {
            return Err(Error::MixedInstruments {
                first: first.instrument_id.clone(),
                other: event.instrument_id.clone(),
            });
        }
        if let Some(prev) = index.checked_sub(1).map(|i| &events[i]) {
            if (prev.trade_date, prev.timestamp) > (event.trade_date, event.timestamp) {
                return Err(Error::Unsorted { index });
            }
        }
        if event.best_bid > event.best_ask || !event.best_bid.is_positive() {
            return Err(Error::Contract(format!(
                "event {index} violates quote invariants (bid {}, ask {})",
                event.best_bid, event.best_ask
            )));
        }
        let session = calendar
            .session_of(event.timestamp.centis())
            .ok_or(Error::OutOfSession { index })?;
        match segments.last_mut() {
            Some(seg) if seg.trade_date == event.trade_date && seg.session == session => {
                seg.range.end = index + 1;
            }
            _ => segments.push(Segment {
                trade_date: event.trade_date,
                session,
                range: index..index + 1,
            }),
        }
        points.push(MidpricePoint {
            trade_date: event.trade_date,
            timestamp: event.timestamp,
            midprice: midprice(event),
            session,
        });
    }
    Ok(MidpriceSeries {
        instrument_id: first.instrument_id.clone(),
        points,
        segments,
    })
}
