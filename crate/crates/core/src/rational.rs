//! Exact rational numbers for metrics and indicator thresholds.
//!
//! Maturity fractions and indicator arithmetic must be exact: a mean of
//! decimal observations is compared against a decimal threshold with zero
//! tolerance, which rules floating point out. This wraps
//! [`num_rational::Ratio`] with decimal parsing/rendering and a stable `"n/d"`
//! serialization so stored metrics survive round-trips bit-exactly.

use alloc::string::{String, ToString};
use core::fmt;
use core::iter::Sum;
use core::ops::{Add, Div, Mul, Sub};

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational number over `i64`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i64>);

/// Error produced when a numeric literal cannot be read as a rational.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{literal}`")]
pub struct RationalParseError {
    pub literal: String,
}

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Builds `numer/denom`, reduced. Panics if `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(Ratio::new(numer, denom))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Parses `12`, `-3.25`, `0.6`, or an explicit fraction `3/5`.
    pub fn parse(text: &str) -> Result<Self, RationalParseError> {
        let err = || RationalParseError {
            literal: text.to_string(),
        };
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let numer: i64 = n.trim().parse().map_err(|_| err())?;
            let denom: i64 = d.trim().parse().map_err(|_| err())?;
            if denom == 0 {
                return Err(err());
            }
            return Ok(Rational::new(numer, denom));
        }
        let (sign, digits) = match text.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, text),
        };
        if digits.is_empty() {
            return Err(err());
        }
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty()
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        if frac_part.len() > 18 {
            return Err(err());
        }
        let int_value: i64 = int_part.parse().map_err(|_| err())?;
        let mut numer = int_value;
        let mut denom = 1i64;
        for b in frac_part.bytes() {
            numer = numer
                .checked_mul(10)
                .and_then(|n| n.checked_add((b - b'0') as i64))
                .ok_or_else(err)?;
            denom = denom.checked_mul(10).ok_or_else(err)?;
        }
        Ok(Rational(Ratio::new(sign * numer, denom)))
    }

    /// Canonical text form: integers as `n`, everything else as `n/d`.
    pub fn to_fraction_string(&self) -> String {
        if *self.0.denom() == 1 {
            self.0.numer().to_string()
        } else {
            let mut s = self.0.numer().to_string();
            s.push('/');
            s.push_str(&self.0.denom().to_string());
            s
        }
    }

    /// Exact decimal rendering when the denominator is of the form 2^a·5^b,
    /// otherwise the `n/d` form. Used for human-facing output only.
    pub fn to_display_string(&self) -> String {
        let mut denom = *self.0.denom();
        let mut scale = 0u32;
        while denom % 2 == 0 {
            denom /= 2;
            scale += 1;
        }
        let mut fives = 0u32;
        while denom % 5 == 0 {
            denom /= 5;
            fives += 1;
        }
        if denom != 1 {
            return self.to_fraction_string();
        }
        let digits = scale.max(fives);
        if digits == 0 {
            return self.0.numer().to_string();
        }
        let pow10 = 10i64.pow(digits);
        let scaled = self.0.numer().saturating_mul(pow10 / self.0.denom());
        let negative = scaled < 0;
        let abs = scaled.unsigned_abs();
        let int_part = abs / pow10 as u64;
        let frac = abs % pow10 as u64;
        let mut frac_str = alloc::format!("{:0width$}", frac, width = digits as usize);
        while frac_str.ends_with('0') && frac_str.len() > 1 {
            frac_str.pop();
        }
        let sign = if negative { "-" } else { "" };
        alloc::format!("{sign}{int_part}.{frac_str}")
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_display_string())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_fraction_string())
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + x)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_fraction_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Rational::parse(&text).map_err(D::Error::custom)
    }
}
