use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Quote price held as an exact count of thousandths of a currency unit.
///
/// A-share quotes move in 0.01 steps; one extra decimal leaves room for
/// synthetic midprices and for feeds that quote to 0.001.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Price(i64);

pub const PRICE_SCALE: i64 = 1000;
/// One exchange tick (0.01) in price units.
pub const TICK: Price = Price(10);

impl Price {
    pub const fn from_millis(millis: i64) -> Self {
        Price(millis)
    }

    pub const fn millis(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / PRICE_SCALE as f64
    }

    /// Nearest representable price; `None` for non-finite input or overflow.
    pub fn from_f64_rounded(value: f64) -> Option<Self> {
        let scaled = (value * PRICE_SCALE as f64).round();
        (scaled.is_finite() && scaled.abs() < i64::MAX as f64 / 4.0).then_some(Price(scaled as i64))
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsePriceError(pub String);

impl fmt::Display for ParsePriceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid price {:?}", self.0)
    }
}

impl std::error::Error for ParsePriceError {}

impl FromStr for Price {
    type Err = ParsePriceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParsePriceError(s.to_owned());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if frac_part.len() > 3
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let int_val: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| err())?
        };
        let mut frac_val: i64 = 0;
        for (i, b) in frac_part.bytes().enumerate() {
            frac_val += i64::from(b - b'0') * 10_i64.pow(2 - i as u32);
        }
        let millis = int_val
            .checked_mul(PRICE_SCALE)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(err)?;
        Ok(Price(if negative { -millis } else { millis }))
    }
}

/// Canonical rendering: at least two decimals, a third only when it is non-zero.
impl TryFrom<String> for Price {
    type Error = ParsePriceError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Price> for String {
    fn from(p: Price) -> Self {
        p.to_string()
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / PRICE_SCALE as u64;
        let frac = abs % PRICE_SCALE as u64;
        if frac.is_multiple_of(10) {
            write!(f, "{sign}{int}.{:02}", frac / 10)
        } else {
            write!(f, "{sign}{int}.{frac:03}")
        }
    }
}

/// Midpoint of two prices, exact: stored as the sum of the two quotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Midprice(i64);

impl Midprice {
    pub fn of(bid: Price, ask: Price) -> Self {
        Midprice(bid.0 + ask.0)
    }

    pub fn from_price(price: Price) -> Self {
        Midprice(2 * price.0)
    }

    /// Sum of the two quotes in thousandths; the midprice is half of it.
    pub const fn doubled_millis(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / (2 * PRICE_SCALE) as f64
    }

    pub fn ln(self) -> f64 {
        self.to_f64().ln()
    }
}

impl fmt::Display for Midprice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            Price(self.0 / 2).fmt(f)
        } else {
            // Half a thousandth: four decimals ending in 5.
            let sign = if self.0 < 0 { "-" } else { "" };
            let abs = (self.0.unsigned_abs() - 1) / 2;
            let scale = PRICE_SCALE as u64;
            write!(f, "{sign}{}.{:03}5", abs / scale, abs % scale)
        }
    }
}
