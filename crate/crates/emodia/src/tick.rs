//! Exact time representation.
//!
//! All boundaries, durations, and strides are counts of 100 µs ticks.
//! Interval arithmetic on ticks is integral and overflow-checked, so
//! sweep results carry no floating-point ambiguity. Seconds appear only
//! at I/O boundaries; the 4-decimal second formatting used in files is
//! lossless at this resolution.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Ticks per second (1 tick = 100 µs).
pub const TICKS_PER_SECOND: u64 = 10_000;

/// A non-negative count of 100 µs units.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Tick(u64);

impl Tick {
    pub const ZERO: Tick = Tick(0);

    pub const fn new(value: u64) -> Tick {
        Tick(value)
    }

    pub const fn get(self) -> u64 {
        self.0
    }

    /// Convert seconds to ticks, rounding to the nearest tick.
    ///
    /// Negative, NaN, and out-of-range values are rejected.
    pub fn from_seconds(seconds: f64) -> Option<Tick> {
        if !seconds.is_finite() || seconds < 0.0 {
            return None;
        }
        let ticks = (seconds * TICKS_PER_SECOND as f64).round();
        if ticks > u64::MAX as f64 {
            return None;
        }
        Some(Tick(ticks as u64))
    }

    /// Exact when printed with four decimal places.
    pub fn to_seconds(self) -> f64 {
        self.0 as f64 / TICKS_PER_SECOND as f64
    }

    pub fn from_millis(ms: u64) -> Tick {
        Tick(ms.checked_mul(10).expect("tick overflow"))
    }

    pub fn checked_add(self, rhs: Tick) -> Option<Tick> {
        self.0.checked_add(rhs.0).map(Tick)
    }

    pub fn checked_sub(self, rhs: Tick) -> Option<Tick> {
        self.0.checked_sub(rhs.0).map(Tick)
    }

    pub fn saturating_sub(self, rhs: Tick) -> Tick {
        Tick(self.0.saturating_sub(rhs.0))
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Number of frames of length `stride` needed to cover this span
    /// (the last frame may be partial).
    pub fn frames_at(self, stride: Tick) -> u64 {
        assert!(stride.0 > 0, "stride must be positive");
        self.0.div_ceil(stride.0)
    }
}

impl std::ops::Add for Tick {
    type Output = Tick;
    fn add(self, rhs: Tick) -> Tick {
        self.checked_add(rhs).expect("tick overflow")
    }
}

impl std::ops::Sub for Tick {
    type Output = Tick;
    fn sub(self, rhs: Tick) -> Tick {
        self.checked_sub(rhs).expect("tick underflow")
    }
}

impl std::iter::Sum for Tick {
    fn sum<I: Iterator<Item = Tick>>(iter: I) -> Tick {
        iter.fold(Tick::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Tick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}s", self.to_seconds())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seconds_round_trip_at_four_decimals() {
        for v in [0u64, 1, 9, 10_000, 123_456, 86_400 * TICKS_PER_SECOND] {
            let t = Tick::new(v);
            let s = format!("{:.4}", t.to_seconds());
            let back = Tick::from_seconds(s.parse::<f64>().unwrap()).unwrap();
            assert_eq!(back, t, "tick {v} survives 4-decimal formatting");
        }
    }

    #[test]
    fn from_seconds_rounds_to_nearest() {
        assert_eq!(Tick::from_seconds(0.00004).unwrap(), Tick::new(0));
        assert_eq!(Tick::from_seconds(0.00006).unwrap(), Tick::new(1));
        assert_eq!(Tick::from_seconds(2.0).unwrap(), Tick::new(20_000));
    }

    #[test]
    fn from_seconds_rejects_bad_input() {
        assert!(Tick::from_seconds(-0.1).is_none());
        assert!(Tick::from_seconds(f64::NAN).is_none());
        assert!(Tick::from_seconds(f64::INFINITY).is_none());
    }

    #[test]
    fn checked_arithmetic() {
        assert_eq!(Tick::new(u64::MAX).checked_add(Tick::new(1)), None);
        assert_eq!(Tick::new(0).checked_sub(Tick::new(1)), None);
        assert_eq!(Tick::new(3) + Tick::new(4), Tick::new(7));
    }

    #[test]
    fn frame_counts() {
        let stride = Tick::from_millis(20);
        assert_eq!(Tick::from_millis(80).frames_at(stride), 4);
        assert_eq!(Tick::from_millis(81).frames_at(stride), 5);
        assert_eq!(Tick::from_millis(1).frames_at(stride), 1);
        assert_eq!(Tick::ZERO.frames_at(stride), 0);
    }
}
