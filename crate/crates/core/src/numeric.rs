//! Scalar types for critical-orbit evaluation and the tolerances shared by
//! every numeric routine.
//!
//! The derivative of `c -> phi_n(c)` grows roughly like `4^n`, so a binary64
//! parameter near a root of `phi_14` cannot get its residual below ~1e-9.
//! Parameters are therefore carried as double-double values
//! ([`TwoFloat`]) throughout; the [`Precision`] setting decides whether the
//! orbit itself is iterated in binary64 or in double-double.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

/// Arithmetic needed to iterate a one-parameter family.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn to_twofloat(self) -> TwoFloat;
    fn is_finite(self) -> bool;

    fn abs(self) -> Self {
        if self < Self::from_f64(0.0) {
            -self
        } else {
            self
        }
    }

    /// Midpoint of `lo` and `hi`; may equal one of them once the bracket can
    /// no longer be split in this precision.
    fn midpoint(lo: Self, hi: Self) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn to_twofloat(self) -> TwoFloat {
        TwoFloat::from(self)
    }

    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }

    fn midpoint(lo: Self, hi: Self) -> Self {
        lo + (hi - lo) * 0.5
    }
}

impl Scalar for TwoFloat {
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }

    fn to_f64(self) -> f64 {
        self.hi()
    }

    fn to_twofloat(self) -> TwoFloat {
        self
    }

    fn is_finite(self) -> bool {
        self.hi().is_finite() && self.lo().is_finite()
    }

    fn midpoint(lo: Self, hi: Self) -> Self {
        lo + (hi - lo) * 0.5
    }
}

/// Strict sign with an explicit zero band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    /// `Zero` iff `|value| <= band`.
    pub fn with_band(value: f64, band: f64) -> Sign {
        if value.abs() <= band {
            Sign::Zero
        } else if value < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn of(value: f64) -> Sign {
        Sign::with_band(value, 0.0)
    }

    pub fn is_opposite(self, other: Sign) -> bool {
        matches!(
            (self, other),
            (Sign::Negative, Sign::Positive) | (Sign::Positive, Sign::Negative)
        )
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Positive => "+",
        })
    }
}

/// Arithmetic used when iterating the critical orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    Binary64,
    DoubleDouble,
    /// Binary64 up to [`Precision::AUTO_BINARY64_MAX_N`], double-double above.
    #[default]
    Auto,
}

impl Precision {
    pub const AUTO_BINARY64_MAX_N: u32 = 10;

    /// Concrete mode used for iterate count `n`.
    pub fn resolve(self, n: u32) -> Precision {
        match self {
            Precision::Auto if n <= Self::AUTO_BINARY64_MAX_N => Precision::Binary64,
            Precision::Auto => Precision::DoubleDouble,
            other => other,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::Binary64 => "binary64",
            Precision::DoubleDouble => "double-double",
            Precision::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Target width of a refined bracket.
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub width: f64,
    /// `|phi_n(c)|` at or below this counts as a root.
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub residual: f64,
    /// `|phi_e(c)|` must reach this before `e` is ruled out as a period.
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub separation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            width: 1e-12,
            residual: 1e-9,
            separation: 1e-4,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.width) && ok(self.residual) && ok(self.separation)) {
            return Err(crate::Error::InvalidInput(format!(
                "tolerances must be positive and finite: {self:?}"
            )));
        }
        if self.residual >= self.separation {
            return Err(crate::Error::InvalidInput(
                "residual tolerance must be below the separation tolerance".into(),
            ));
        }
        Ok(())
    }
}

/// Builds the exact double-double value `hi + lo`.
pub fn twofloat_from_parts(hi: f64, lo: f64) -> TwoFloat {
    TwoFloat::try_from((hi, lo)).unwrap_or_else(|_| TwoFloat::from(hi) + TwoFloat::from(lo))
}

/// Decimal rendering with 17 significant digits; round-trips any f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `serialize_with` helper writing an f64 as a [`fmt17`] string.
pub fn ser17<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt17(*x))
}

/// `deserialize_with` counterpart of [`ser17`]; also accepts plain numbers.
pub fn de17<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        Text(String),
        Float(f64),
    }
    match Num::deserialize(d)? {
        Num::Float(x) => Ok(x),
        Num::Text(t) => t.parse().map_err(serde::de::Error::custom),
    }
}

/// [`ser17`] for optional values.
pub fn ser17_opt<S: serde::Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&fmt17(*v)),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips() {
        for x in [1.0, 1.754_877_666_246_692_7, -0.1, 2.0 - 1e-15, 1e-300] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn auto_precision_switches_above_ten() {
        assert_eq!(Precision::Auto.resolve(10), Precision::Binary64);
        assert_eq!(Precision::Auto.resolve(11), Precision::DoubleDouble);
        assert_eq!(Precision::Binary64.resolve(20), Precision::Binary64);
    }

    #[test]
    fn sign_band() {
        assert_eq!(Sign::with_band(1e-10, 1e-9), Sign::Zero);
        assert_eq!(Sign::with_band(-2e-9, 1e-9), Sign::Negative);
        assert!(Sign::Negative.is_opposite(Sign::Positive));
        assert!(!Sign::Zero.is_opposite(Sign::Positive));
    }

    #[test]
    fn twofloat_parts_are_exact() {
        let v = twofloat_from_parts(1.0, 1e-20);
        assert_eq!(v.hi(), 1.0);
        assert_eq!(v.lo(), 1e-20);
    }

    #[test]
    fn rejects_inverted_tolerances() {
        let t = Tolerances {
            residual: 1e-3,
            separation: 1e-4,
            ..Tolerances::default()
        };
        assert!(t.validate().is_err());
        assert!(Tolerances::default().validate().is_ok());
    }
}
