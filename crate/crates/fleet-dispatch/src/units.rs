//! Integer-backed scalar units.
//!
//! All arithmetic the solvers perform is exact integer arithmetic so that
//! optima, tie-breaks and cross-mode comparisons are reproducible bit for bit:
//!
//! * [`Distance`] — route length in millimiles (1/1000 mile),
//! * [`TimeDelta`] / [`TimePoint`] — durations and instants in milliseconds,
//! * [`Money`] — amounts in millicents (1/1000 cent).
//!
//! Floats only appear at the file-format boundary (network files carry miles
//! and seconds) and are quantized on load.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

/// Divides `n` by `d` (`d > 0`, `n >= 0`) rounding half up.
pub fn div_round_half_up(n: i64, d: i64) -> i64 {
    debug_assert!(d > 0 && n >= 0);
    (n + d / 2) / d
}

/// A length in millimiles.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Distance(i64);

impl Distance {
    pub const ZERO: Distance = Distance(0);

    pub fn from_millimiles(mm: i64) -> Self {
        Distance(mm)
    }

    pub fn from_miles(miles: f64) -> Self {
        Distance((miles * 1000.0).round() as i64)
    }

    pub fn millimiles(self) -> i64 {
        self.0
    }

    pub fn miles(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// Fuel cost of driving this distance. Exact: millimiles × cents/mile
    /// is millicents.
    pub fn fuel_cost(self, cents_per_mile: i64) -> Money {
        Money::from_millicents(self.0 * cents_per_mile)
    }
}

impl Add for Distance {
    type Output = Distance;
    fn add(self, rhs: Distance) -> Distance {
        Distance(self.0 + rhs.0)
    }
}

impl AddAssign for Distance {
    fn add_assign(&mut self, rhs: Distance) {
        self.0 += rhs.0;
    }
}

impl Sub for Distance {
    type Output = Distance;
    fn sub(self, rhs: Distance) -> Distance {
        Distance(self.0 - rhs.0)
    }
}

impl Sum for Distance {
    fn sum<I: Iterator<Item = Distance>>(iter: I) -> Distance {
        iter.fold(Distance::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}mi", self.miles())
    }
}

/// A span of time in milliseconds.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TimeDelta(i64);

impl TimeDelta {
    pub const ZERO: TimeDelta = TimeDelta(0);

    pub fn from_millis(ms: i64) -> Self {
        TimeDelta(ms)
    }

    pub fn from_seconds(secs: f64) -> Self {
        TimeDelta((secs * 1000.0).round() as i64)
    }

    pub fn millis(self) -> i64 {
        self.0
    }

    pub fn seconds(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl Add for TimeDelta {
    type Output = TimeDelta;
    fn add(self, rhs: TimeDelta) -> TimeDelta {
        TimeDelta(self.0 + rhs.0)
    }
}

impl AddAssign for TimeDelta {
    fn add_assign(&mut self, rhs: TimeDelta) {
        self.0 += rhs.0;
    }
}

impl Sub for TimeDelta {
    type Output = TimeDelta;
    fn sub(self, rhs: TimeDelta) -> TimeDelta {
        TimeDelta(self.0 - rhs.0)
    }
}

impl SubAssign for TimeDelta {
    fn sub_assign(&mut self, rhs: TimeDelta) {
        self.0 -= rhs.0;
    }
}

impl Sum for TimeDelta {
    fn sum<I: Iterator<Item = TimeDelta>>(iter: I) -> TimeDelta {
        iter.fold(TimeDelta::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for TimeDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}s", self.seconds())
    }
}

/// An instant in milliseconds relative to some origin (planning instant for
/// solver output, simulation start for committed schedules).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TimePoint(i64);

impl TimePoint {
    pub const ORIGIN: TimePoint = TimePoint(0);

    pub fn from_millis(ms: i64) -> Self {
        TimePoint(ms)
    }

    pub fn from_seconds(secs: f64) -> Self {
        TimePoint((secs * 1000.0).round() as i64)
    }

    pub fn millis(self) -> i64 {
        self.0
    }

    pub fn seconds(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// Time elapsed since the origin, as a delta.
    pub fn since_origin(self) -> TimeDelta {
        TimeDelta(self.0)
    }
}

impl Add<TimeDelta> for TimePoint {
    type Output = TimePoint;
    fn add(self, rhs: TimeDelta) -> TimePoint {
        TimePoint(self.0 + rhs.0)
    }
}

impl Sub<TimeDelta> for TimePoint {
    type Output = TimePoint;
    fn sub(self, rhs: TimeDelta) -> TimePoint {
        TimePoint(self.0 - rhs.0)
    }
}

impl Sub for TimePoint {
    type Output = TimeDelta;
    fn sub(self, rhs: TimePoint) -> TimeDelta {
        TimeDelta(self.0 - rhs.0)
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}s", self.seconds())
    }
}

/// An amount of money in millicents. Fares and revenues are whole cents
/// (millicents divisible by 1000); route costs are exact millicents.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn from_millicents(mc: i64) -> Self {
        Money(mc)
    }

    pub fn from_cents(cents: i64) -> Self {
        Money(cents * 1000)
    }

    pub fn millicents(self) -> i64 {
        self.0
    }

    /// Whole cents, rounding half up (amounts here are nonnegative).
    pub fn cents_rounded(self) -> i64 {
        if self.0 >= 0 {
            div_round_half_up(self.0, 1000)
        } else {
            -div_round_half_up(-self.0, 1000)
        }
    }

    pub fn dollars(self) -> f64 {
        self.0 as f64 / 100_000.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${:.5}", self.dollars())
    }
}

/// A rate in [0, 1] quantized to thousandths, so counts and thresholds derived
/// from configured rates are exact (e.g. a 0.15 mutation rate over 150 slots
/// is exactly 22.5, rounding to 23).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Rate(u32);

impl Rate {
    pub fn from_f64(x: f64) -> Self {
        Rate((x.clamp(0.0, 1.0) * 1000.0).round() as u32)
    }

    pub const fn from_milli(m: u32) -> Self {
        Rate(if m > 1000 { 1000 } else { m })
    }

    pub fn milli(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// `n × rate`, rounded half up.
    pub fn scale_round(self, n: i64) -> i64 {
        div_round_half_up(n * self.0 as i64, 1000)
    }

    /// `n × rate`, rounded up.
    pub fn scale_ceil(self, n: i64) -> i64 {
        debug_assert!(n >= 0);
        let prod = n * self.0 as i64;
        (prod + 999) / 1000
    }

    /// Complement `1 - rate`.
    pub fn complement(self) -> Rate {
        Rate(1000 - self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_quantizes_miles_to_millimiles() {
        assert_eq!(Distance::from_miles(1.25).millimiles(), 1250);
        assert_eq!(Distance::from_miles(1.2301).millimiles(), 1230);
        assert_eq!(Distance::from_millimiles(500).miles(), 0.5);
    }

    #[test]
    fn fuel_cost_is_exact_millicents() {
        // 1.234 miles at 16 cents/mile = 19.744 cents exactly.
        let cost = Distance::from_millimiles(1234).fuel_cost(16);
        assert_eq!(cost.millicents(), 19_744);
        assert_eq!(cost.cents_rounded(), 20);
    }

    #[test]
    fn money_rounds_half_up_to_cents() {
        assert_eq!(Money::from_millicents(499_500).cents_rounded(), 500);
        assert_eq!(Money::from_millicents(499_499).cents_rounded(), 499);
        assert_eq!(Money::from_cents(7).millicents(), 7000);
    }

    #[test]
    fn rate_counts_match_decimal_arithmetic() {
        // 0.15 × 15 × 10 = 22.5 → 23, which naive f64 multiplication misses.
        let mu = Rate::from_f64(0.15);
        assert_eq!(mu.scale_round(15 * 10), 23);
        let x = Rate::from_f64(0.5);
        assert_eq!(x.scale_ceil(16), 8);
        assert_eq!(x.scale_ceil(5), 3);
    }

    #[test]
    fn time_arithmetic_round_trips() {
        let t = TimePoint::from_seconds(1.5) + TimeDelta::from_seconds(2.25);
        assert_eq!(t.millis(), 3750);
        assert_eq!((t - TimePoint::from_millis(750)).millis(), 3000);
    }
}
