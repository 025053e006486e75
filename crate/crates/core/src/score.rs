//! Fixed-point merit scores.
//!
//! Every score the assessment can produce (1, 0.8, 0.5, 0.25, 0, -0.5, -1, -2)
//! is a whole number of thousandths, so scores are stored as integer
//! milli-points. Sums are then exact and the optimizer can compare totals
//! without floating-point drift.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A merit score in thousandths of a point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score(i64);

impl Score {
    pub const ZERO: Score = Score(0);
    /// Merit class A.
    pub const EXCELLENT: Score = Score(1000);
    /// Merit class B.
    pub const GOOD: Score = Score(800);
    /// Merit class C.
    pub const ACCEPTABLE: Score = Score(500);
    /// Merit class D.
    pub const LIMITED: Score = Score(0);
    pub const QUARTER: Score = Score(250);
    pub const HALF: Score = Score(500);
    /// Proven plagiarism or fraud.
    pub const FRAUD: Score = Score(-2000);
    /// Product the panel cannot evaluate.
    pub const INADMISSIBLE: Score = Score(-1000);
    /// Penalty for each slot left empty.
    pub const MISSING: Score = Score(-500);

    pub const fn from_milli(milli: i64) -> Self {
        Score(milli)
    }

    pub const fn milli(self) -> i64 {
        self.0
    }

    /// Converts a decimal value, accepting it only if it is a whole number of
    /// thousandths.
    pub fn from_decimal(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        let scaled = value * 1000.0;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 || rounded.abs() > 1e15 {
            return None;
        }
        Some(Score(rounded as i64))
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// Gain of filling a slot with this score instead of leaving it empty.
    pub fn slot_gain(self) -> i64 {
        self.0 - Score::MISSING.0
    }

    /// One-decimal rendering, rounding half away from zero.
    pub fn format_1dp(self) -> String {
        format_tenths(div_round_half_away(self.0 as i128, 100))
    }
}

impl fmt::Display for Score {
    /// Shortest exact decimal with at least one fractional digit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / 1000;
        let mut frac = format!("{:03}", abs % 1000);
        while frac.len() > 1 && frac.ends_with('0') {
            frac.pop();
        }
        write!(f, "{sign}{whole}.{frac}")
    }
}

impl Add for Score {
    type Output = Score;
    fn add(self, rhs: Score) -> Score {
        Score(self.0 + rhs.0)
    }
}

impl AddAssign for Score {
    fn add_assign(&mut self, rhs: Score) {
        self.0 += rhs.0;
    }
}

impl Sub for Score {
    type Output = Score;
    fn sub(self, rhs: Score) -> Score {
        Score(self.0 - rhs.0)
    }
}

impl Neg for Score {
    type Output = Score;
    fn neg(self) -> Score {
        Score(-self.0)
    }
}

impl Mul<i64> for Score {
    type Output = Score;
    fn mul(self, rhs: i64) -> Score {
        Score(self.0 * rhs)
    }
}

impl Sum for Score {
    fn sum<I: Iterator<Item = Score>>(iter: I) -> Score {
        iter.fold(Score::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Score> for Score {
    fn sum<I: Iterator<Item = &'a Score>>(iter: I) -> Score {
        iter.copied().sum()
    }
}

/// Integer division rounding half away from zero. `den` must be non-zero.
pub(crate) fn div_round_half_away(num: i128, den: i128) -> i128 {
    assert!(den != 0, "division by zero");
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let q = num / den;
    let r = num % den;
    if 2 * r.abs() >= den {
        q + num.signum()
    } else {
        q
    }
}

/// Renders a count of tenths as a one-decimal string ("-0.9", "25.9").
pub(crate) fn format_tenths(tenths: i128) -> String {
    let sign = if tenths < 0 { "-" } else { "" };
    let abs = tenths.unsigned_abs();
    format!("{sign}{}.{}", abs / 10, abs % 10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_trims_trailing_zeros() {
        assert_eq!(Score::EXCELLENT.to_string(), "1.0");
        assert_eq!(Score::GOOD.to_string(), "0.8");
        assert_eq!(Score::QUARTER.to_string(), "0.25");
        assert_eq!(Score::MISSING.to_string(), "-0.5");
        assert_eq!(Score::FRAUD.to_string(), "-2.0");
        assert_eq!(Score::ZERO.to_string(), "0.0");
        assert_eq!(Score::from_milli(1).to_string(), "0.001");
    }

    #[test]
    fn decimal_conversion_is_exact_or_rejected() {
        assert_eq!(Score::from_decimal(0.8), Some(Score::GOOD));
        assert_eq!(Score::from_decimal(0.25), Some(Score::QUARTER));
        assert_eq!(Score::from_decimal(-0.5), Some(Score::MISSING));
        assert_eq!(Score::from_decimal(0.0001), None);
        assert_eq!(Score::from_decimal(f64::NAN), None);
    }

    #[test]
    fn half_away_rounding() {
        assert_eq!(div_round_half_away(25, 10), 3);
        assert_eq!(div_round_half_away(-25, 10), -3);
        assert_eq!(div_round_half_away(24, 10), 2);
        assert_eq!(div_round_half_away(-24, 10), -2);
        assert_eq!(div_round_half_away(5, -10), -1);
        assert_eq!(Score::from_milli(598_950).format_1dp(), "599.0");
        assert_eq!(Score::from_milli(-50).format_1dp(), "-0.1");
        assert_eq!(Score::from_milli(-49).format_1dp(), "0.0");
    }

    #[test]
    fn slot_gain_is_score_plus_half() {
        assert_eq!(Score::INADMISSIBLE.slot_gain(), -500);
        assert_eq!(Score::ZERO.slot_gain(), 500);
        assert_eq!(Score::EXCELLENT.slot_gain(), 1500);
    }
}
