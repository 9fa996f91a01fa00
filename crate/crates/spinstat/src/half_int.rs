//! Half-integers stored exactly as twice their value.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use crate::error::Error;

/// A half-integer (spin projection, total spin, ...) stored as `2 * value`.
///
/// `HalfInt::from_twice(1)` is 1/2, `HalfInt::from_twice(-3)` is -3/2.
/// The twice-value is the only field, so ordering and equality are the
/// numeric ones.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    pub fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub fn from_int(value: i64) -> Self {
        HalfInt { twice: 2 * value }
    }

    /// Twice the value; always exact.
    pub fn twice(self) -> i64 {
        self.twice
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// The integer value. Panics if the half-integer is not integral.
    pub fn to_int(self) -> i64 {
        debug_assert!(self.is_integer());
        self.twice / 2
    }

    pub fn is_negative(self) -> bool {
        self.twice < 0
    }

    pub fn abs(self) -> Self {
        HalfInt { twice: self.twice.abs() }
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + rhs.twice }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - rhs.twice }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HalfInt({})", self)
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Inverse of `Display`: an integer, or an odd twice-value over 2
    /// ("3/2", "-1/2").
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("not a half-integer: {s:?}"));
        if let Some(twice) = s.strip_suffix("/2") {
            let twice: i64 = twice.parse().map_err(|_| bad())?;
            if twice % 2 == 0 {
                return Err(bad());
            }
            Ok(HalfInt::from_twice(twice))
        } else {
            Ok(HalfInt::from_int(s.parse().map_err(|_| bad())?))
        }
    }
}
