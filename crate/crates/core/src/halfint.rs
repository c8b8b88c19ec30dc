use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Serialize, Serializer};

/// An exact element of `Z/2`, stored as twice its value.
///
/// Values of `G`, its partial derivatives and the recurrence arguments all
/// live on the half-integer lattice, and the recurrence thresholds sit
/// exactly on it, so nothing here ever touches floating point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt {
    doubled: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { doubled: 0 };
    pub const HALF: HalfInt = HalfInt { doubled: 1 };
    pub const ONE: HalfInt = HalfInt { doubled: 2 };

    pub const fn from_doubled(doubled: i64) -> Self {
        HalfInt { doubled }
    }

    pub const fn from_int(value: i64) -> Self {
        HalfInt { doubled: 2 * value }
    }

    pub const fn doubled(self) -> i64 {
        self.doubled
    }

    pub const fn is_integer(self) -> bool {
        self.doubled % 2 == 0
    }

    /// The integer value, if there is one.
    pub fn to_integer(self) -> Option<i64> {
        self.is_integer().then_some(self.doubled / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.doubled as f64 / 2.0
    }
}

impl From<i64> for HalfInt {
    fn from(value: i64) -> Self {
        HalfInt::from_int(value)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_doubled(self.doubled + rhs.doubled)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_doubled(self.doubled - rhs.doubled)
    }
}

impl AddAssign for HalfInt {
    fn add_assign(&mut self, rhs: HalfInt) {
        self.doubled += rhs.doubled;
    }
}

impl SubAssign for HalfInt {
    fn sub_assign(&mut self, rhs: HalfInt) {
        self.doubled -= rhs.doubled;
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_doubled(-self.doubled)
    }
}

impl Mul<i64> for HalfInt {
    type Output = HalfInt;
    fn mul(self, rhs: i64) -> HalfInt {
        HalfInt::from_doubled(self.doubled * rhs)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.doubled / 2)
        } else {
            write!(f, "{}/2", self.doubled)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_exact() {
        let a = HalfInt::from_doubled(3);
        let b = HalfInt::HALF;
        assert_eq!(a + b, HalfInt::from_int(2));
        assert_eq!(a - b, HalfInt::ONE);
        assert_eq!(-a, HalfInt::from_doubled(-3));
        assert_eq!(a * 3, HalfInt::from_doubled(9));
        assert!(HalfInt::ZERO < HalfInt::HALF && HalfInt::HALF < HalfInt::ONE);
    }

    #[test]
    fn display() {
        assert_eq!(HalfInt::from_doubled(-1).to_string(), "-1/2");
        assert_eq!(HalfInt::from_int(-4).to_string(), "-4");
        assert_eq!(HalfInt::from_doubled(5).to_string(), "5/2");
        assert_eq!(HalfInt::from_doubled(5).to_integer(), None);
        assert_eq!(HalfInt::from_int(7).to_integer(), Some(7));
    }
}
