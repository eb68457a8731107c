use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CENTIS_PER_SECOND: u32 = 100;
pub const CENTIS_PER_MINUTE: u32 = 60 * CENTIS_PER_SECOND;
pub const CENTIS_PER_DAY: u32 = 24 * 60 * CENTIS_PER_MINUTE;

/// Time of day in centiseconds since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimeOfDay(u32);

impl TimeOfDay {
    pub fn from_centis(centis: u32) -> Option<Self> {
        (centis < CENTIS_PER_DAY).then_some(TimeOfDay(centis))
    }

    pub fn hms(h: u32, m: u32, s: u32) -> Self {
        let centis = ((h * 60 + m) * 60 + s) * CENTIS_PER_SECOND;
        assert!(centis < CENTIS_PER_DAY, "time of day out of range");
        TimeOfDay(centis)
    }

    pub const fn centis(self) -> u32 {
        self.0
    }
}

impl FromStr for TimeOfDay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Calendar(format!("invalid time of day {s:?}, expected HH:MM:SS"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() != 3 || parts.iter().any(|p| p.len() != 2) {
            return Err(bad());
        }
        let nums: Vec<u32> = parts
            .iter()
            .map(|p| p.parse::<u32>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if nums[0] > 23 || nums[1] > 59 || nums[2] > 59 {
            return Err(bad());
        }
        Ok(TimeOfDay::hms(nums[0], nums[1], nums[2]))
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let secs = self.0 / CENTIS_PER_SECOND;
        write!(
            f,
            "{:02}:{:02}:{:02}",
            secs / 3600,
            secs / 60 % 60,
            secs % 60
        )?;
        match self.0 % CENTIS_PER_SECOND {
            0 => Ok(()),
            cs => write!(f, ".{cs:02}"),
        }
    }
}

impl TryFrom<String> for TimeOfDay {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TimeOfDay> for String {
    fn from(t: TimeOfDay) -> Self {
        t.to_string()
    }
}

/// Half-open window `[start, end)` within one day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimeWindow {
    pub start: TimeOfDay,
    pub end: TimeOfDay,
}

impl TimeWindow {
    pub fn new(start: TimeOfDay, end: TimeOfDay) -> Result<Self> {
        if start >= end {
            return Err(Error::Calendar(format!("empty window {start}-{end}")));
        }
        Ok(TimeWindow { start, end })
    }

    pub fn contains(&self, centis: u32) -> bool {
        self.start.centis() <= centis && centis < self.end.centis()
    }

    pub fn len_centis(&self) -> u32 {
        self.end.centis() - self.start.centis()
    }

    pub fn minutes(&self) -> f64 {
        f64::from(self.len_centis()) / f64::from(CENTIS_PER_MINUTE)
    }
}

impl FromStr for TimeWindow {
    type Err = Error;

    /// `HH:MM:SS-HH:MM:SS`; an en dash is accepted as the separator too.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('-')
            .or_else(|| s.split_once('\u{2013}'))
            .ok_or_else(|| Error::Calendar(format!("invalid window {s:?}")))?;
        TimeWindow::new(a.parse()?, b.parse()?)
    }
}

impl TryFrom<String> for TimeWindow {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TimeWindow> for String {
    fn from(w: TimeWindow) -> Self {
        w.to_string()
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// Daily trading schedule: an optional opening call auction followed by
/// continuous-auction sessions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CalendarRepr")]
pub struct SessionCalendar {
    call_auction: Option<TimeWindow>,
    continuous: Vec<TimeWindow>,
}

#[derive(Deserialize)]
struct CalendarRepr {
    call_auction: Option<TimeWindow>,
    continuous: Vec<TimeWindow>,
}

impl TryFrom<CalendarRepr> for SessionCalendar {
    type Error = Error;
    fn try_from(repr: CalendarRepr) -> Result<Self> {
        SessionCalendar::new(repr.call_auction, repr.continuous)
    }
}

impl Default for SessionCalendar {
    /// Shenzhen, 2003: call auction 09:15-09:30, continuous 09:30-11:30 and 13:00-15:00.
    fn default() -> Self {
        SessionCalendar {
            call_auction: Some(TimeWindow {
                start: TimeOfDay::hms(9, 15, 0),
                end: TimeOfDay::hms(9, 30, 0),
            }),
            continuous: vec![
                TimeWindow {
                    start: TimeOfDay::hms(9, 30, 0),
                    end: TimeOfDay::hms(11, 30, 0),
                },
                TimeWindow {
                    start: TimeOfDay::hms(13, 0, 0),
                    end: TimeOfDay::hms(15, 0, 0),
                },
            ],
        }
    }
}

impl SessionCalendar {
    pub fn new(call_auction: Option<TimeWindow>, continuous: Vec<TimeWindow>) -> Result<Self> {
        if continuous.is_empty() {
            return Err(Error::Calendar(
                "at least one continuous session is required".into(),
            ));
        }
        let mut all: Vec<TimeWindow> = call_auction.iter().copied().collect();
        all.extend(continuous.iter().copied());
        for pair in all.windows(2) {
            if pair[0].end > pair[1].start {
                return Err(Error::Calendar(format!(
                    "windows {} and {} overlap or are out of order",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(SessionCalendar {
            call_auction,
            continuous,
        })
    }

    pub fn call_auction(&self) -> Option<TimeWindow> {
        self.call_auction
    }

    pub fn continuous_sessions(&self) -> &[TimeWindow] {
        &self.continuous
    }

    /// Index of the continuous session containing `centis`, if any.
    pub fn session_of(&self, centis: u32) -> Option<usize> {
        self.continuous.iter().position(|w| w.contains(centis))
    }

    pub fn continuous_minutes(&self) -> f64 {
        self.continuous.iter().map(TimeWindow::minutes).sum()
    }

    /// Parses the calendar description format:
    ///
    /// ```text
    /// # comment
    /// call_auction 09:15:00-09:30:00
    /// continuous   09:30:00-11:30:00
    /// continuous   13:00:00-15:00:00
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut call = None;
        let mut continuous = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once(char::is_whitespace).ok_or_else(|| {
                Error::Calendar(format!("line {}: expected `<kind> <window>`", idx + 1))
            })?;
            let window: TimeWindow = value
                .trim()
                .parse()
                .map_err(|e| Error::Calendar(format!("line {}: {e}", idx + 1)))?;
            match key {
                "call_auction" if call.is_none() => call = Some(window),
                "call_auction" => {
                    return Err(Error::Calendar(format!(
                        "line {}: more than one call auction",
                        idx + 1
                    )))
                }
                "continuous" => continuous.push(window),
                other => {
                    return Err(Error::Calendar(format!(
                        "line {}: unknown window kind {other:?}",
                        idx + 1
                    )))
                }
            }
        }
        SessionCalendar::new(call, continuous)
    }
}

impl fmt::Display for SessionCalendar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(call) = self.call_auction {
            writeln!(f, "call_auction {call}")?;
        }
        for w in &self.continuous {
            writeln!(f, "continuous {w}")?;
        }
        Ok(())
    }
}
