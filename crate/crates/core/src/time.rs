//! Fixed-point time.
//!
//! Every duration in the crate is an integer count of millitime units, so trip
//! and route accounting is exact. One time unit is 1000 millitime.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use crate::error::Error;

pub const MILLIS_PER_UNIT: i64 = 1000;

/// A time value in millitime units. Signed so that bid values (which may be
/// negative) share the type; durations are never negative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeUnits(i64);

impl TimeUnits {
    pub const ZERO: TimeUnits = TimeUnits(0);

    pub const fn from_millis(millis: i64) -> Self {
        TimeUnits(millis)
    }

    pub const fn from_units(units: i64) -> Self {
        TimeUnits(units * MILLIS_PER_UNIT)
    }

    pub const fn millis(self) -> i64 {
        self.0
    }

    pub fn as_units_f64(self) -> f64 {
        self.0 as f64 / MILLIS_PER_UNIT as f64
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Parses a decimal literal with at most three fractional digits.
    /// Negative values are accepted here; callers that need durations check
    /// the sign themselves.
    pub fn parse_decimal(s: &str) -> Result<Self, Error> {
        let bad = || Error::Time(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if frac_part.len() > 3 {
            return Err(bad());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
        let mut frac: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
        for _ in frac_part.len()..3 {
            frac *= 10;
        }
        let millis = whole.checked_mul(MILLIS_PER_UNIT).and_then(|w| w.checked_add(frac)).ok_or_else(bad)?;
        Ok(TimeUnits(if neg { -millis } else { millis }))
    }
}

impl FromStr for TimeUnits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TimeUnits::parse_decimal(s.trim())
    }
}

/// Shortest decimal form: `6.2`, `11.8`, `7`, `0.001`.
impl fmt::Display for TimeUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / MILLIS_PER_UNIT as u64;
        let frac = abs % MILLIS_PER_UNIT as u64;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:03}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Add for TimeUnits {
    type Output = TimeUnits;
    fn add(self, rhs: TimeUnits) -> TimeUnits {
        TimeUnits(self.0 + rhs.0)
    }
}

impl AddAssign for TimeUnits {
    fn add_assign(&mut self, rhs: TimeUnits) {
        self.0 += rhs.0;
    }
}

impl Sub for TimeUnits {
    type Output = TimeUnits;
    fn sub(self, rhs: TimeUnits) -> TimeUnits {
        TimeUnits(self.0 - rhs.0)
    }
}

impl SubAssign for TimeUnits {
    fn sub_assign(&mut self, rhs: TimeUnits) {
        self.0 -= rhs.0;
    }
}

impl Mul<i64> for TimeUnits {
    type Output = TimeUnits;
    fn mul(self, rhs: i64) -> TimeUnits {
        TimeUnits(self.0 * rhs)
    }
}

impl Neg for TimeUnits {
    type Output = TimeUnits;
    fn neg(self) -> TimeUnits {
        TimeUnits(-self.0)
    }
}

impl Sum for TimeUnits {
    fn sum<I: Iterator<Item = TimeUnits>>(iter: I) -> TimeUnits {
        TimeUnits(iter.map(|t| t.0).sum())
    }
}

impl<'a> Sum<&'a TimeUnits> for TimeUnits {
    fn sum<I: Iterator<Item = &'a TimeUnits>>(iter: I) -> TimeUnits {
        TimeUnits(iter.map(|t| t.0).sum())
    }
}
