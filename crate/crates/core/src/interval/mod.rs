//! Closed intervals over machine numbers, with outward-rounded arithmetic.
//!
//! Two layers are provided. The `*_with` methods and the `std::ops` impls
//! saturate: an overflowing bound becomes an infinity and a zero-containing
//! divisor yields the entire line. The `checked_*` methods reject those cases
//! with an [`IntervalError`]. Anything that consumes an interval (masses,
//! envelopes, reports) must go through [`Interval::ensure_finite`] first.

mod ibox;
pub(crate) mod round;
mod std_fn;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ibox::IntervalBox;
pub use std_fn::StdFn;

use round::{add_down, add_up, div_down, div_up, mul_down, mul_up};

/// How aggressively results are rounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RigorPolicy {
    /// Every bound is rounded away from the enclosed set.
    #[default]
    Outward,
    /// Round-to-nearest bounds. No containment guarantee.
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("interval bound overflowed to a non-finite value")]
    Overflow,
    #[error("divisor [{lo}, {hi}] contains zero")]
    DivisorContainsZero { lo: f64, hi: f64 },
    #[error("{function} is undefined on [{lo}, {hi}]")]
    Domain {
        function: &'static str,
        lo: f64,
        hi: f64,
    },
}

/// A closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Builds `[lo, hi]`, rejecting NaN, infinite or reversed bounds.
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(IntervalError::InvalidBounds { lo, hi })
        }
    }

    /// The thin interval `[x, x]`.
    ///
    /// # Panics
    /// If `x` is not finite.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "thin interval from non-finite value {x}");
        Interval { lo: x, hi: x }
    }

    /// Bounds that may be infinite (saturated). NaN bounds are widened to infinities.
    pub(crate) fn saturated(lo: f64, hi: f64) -> Self {
        let lo = if lo.is_nan() { f64::NEG_INFINITY } else { lo };
        let hi = if hi.is_nan() { f64::INFINITY } else { hi };
        debug_assert!(lo <= hi, "saturated interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Smallest interval containing the real number nearest to `x` and its two
    /// neighbours; encloses any real that rounds to `x`.
    pub fn around(x: f64) -> Self {
        assert!(x.is_finite());
        Interval {
            lo: x.next_down(),
            hi: x.next_up(),
        }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn ensure_finite(self) -> Result<Self, IntervalError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(IntervalError::Overflow)
        }
    }

    pub fn is_thin(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `hi - lo`, rounded up.
    pub fn diameter(&self) -> f64 {
        add_up(self.hi, -self.lo, RigorPolicy::Outward)
    }

    /// Diameter rounded according to `policy`.
    pub fn diameter_with(&self, policy: RigorPolicy) -> f64 {
        add_up(self.hi, -self.lo, policy)
    }

    /// A machine number inside the interval, as close to the centre as rounding allows.
    pub fn mid(&self) -> f64 {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Smallest absolute value over the interval.
    pub fn mignitude(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Largest absolute value over the interval.
    pub fn magnitude(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest interval containing both operands.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Set intersection; `None` when the intervals are disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn add_with(self, rhs: Interval, policy: RigorPolicy) -> Interval {
        Interval::saturated(
            add_down(self.lo, rhs.lo, policy),
            add_up(self.hi, rhs.hi, policy),
        )
    }

    pub fn sub_with(self, rhs: Interval, policy: RigorPolicy) -> Interval {
        Interval::saturated(
            add_down(self.lo, -rhs.hi, policy),
            add_up(self.hi, -rhs.lo, policy),
        )
    }

    pub fn mul_with(self, rhs: Interval, policy: RigorPolicy) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        // Sign-case analysis keeps the common positive-by-positive case to two products.
        if a >= 0.0 && c >= 0.0 {
            return Interval::saturated(mul_down(a, c, policy), mul_up(b, d, policy));
        }
        let lo = mul_down(a, c, policy)
            .min(mul_down(a, d, policy))
            .min(mul_down(b, c, policy))
            .min(mul_down(b, d, policy));
        let hi = mul_up(a, c, policy)
            .max(mul_up(a, d, policy))
            .max(mul_up(b, c, policy))
            .max(mul_up(b, d, policy));
        Interval::saturated(lo, hi)
    }

    /// Quotient; saturates to the entire line when `rhs` contains zero.
    pub fn div_with(self, rhs: Interval, policy: RigorPolicy) -> Interval {
        if rhs.contains_zero() {
            return Interval::ENTIRE;
        }
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = div_down(a, c, policy)
            .min(div_down(a, d, policy))
            .min(div_down(b, c, policy))
            .min(div_down(b, d, policy));
        let hi = div_up(a, c, policy)
            .max(div_up(a, d, policy))
            .max(div_up(b, c, policy))
            .max(div_up(b, d, policy));
        Interval::saturated(lo, hi)
    }

    pub fn abs(self) -> Interval {
        Interval {
            lo: self.mignitude(),
            hi: self.magnitude(),
        }
    }

    /// `[max(lo, 0), max(hi, 0)]`, the part of the interval that a nonnegative
    /// quantity can occupy.
    pub fn clamp_nonnegative(self) -> Interval {
        Interval {
            lo: self.lo.max(0.0),
            hi: self.hi.max(0.0),
        }
    }

    fn check_operands(self, rhs: Interval) -> Result<(), IntervalError> {
        self.ensure_finite()?;
        rhs.ensure_finite()?;
        Ok(())
    }

    pub fn checked_add(self, rhs: Interval) -> Result<Interval, IntervalError> {
        self.check_operands(rhs)?;
        self.add_with(rhs, RigorPolicy::Outward).ensure_finite()
    }

    pub fn checked_sub(self, rhs: Interval) -> Result<Interval, IntervalError> {
        self.check_operands(rhs)?;
        self.sub_with(rhs, RigorPolicy::Outward).ensure_finite()
    }

    pub fn checked_mul(self, rhs: Interval) -> Result<Interval, IntervalError> {
        self.check_operands(rhs)?;
        self.mul_with(rhs, RigorPolicy::Outward).ensure_finite()
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        self.check_operands(rhs)?;
        if rhs.contains_zero() {
            return Err(IntervalError::DivisorContainsZero {
                lo: rhs.lo,
                hi: rhs.hi,
            });
        }
        self.div_with(rhs, RigorPolicy::Outward).ensure_finite()
    }

    /// Standard function extension under the outward policy.
    pub fn apply(self, f: StdFn) -> Result<Interval, IntervalError> {
        f.eval_interval(self, RigorPolicy::Outward)
    }

    /// Integer power under the outward policy.
    pub fn powi(self, n: i32) -> Result<Interval, IntervalError> {
        std_fn::powi(self, n, RigorPolicy::Outward)
    }

    /// Integer power under `policy`.
    pub fn powi_with(self, n: i32, policy: RigorPolicy) -> Result<Interval, IntervalError> {
        std_fn::powi(self, n, policy)
    }

    /// Saturating `exp`: never fails, an overflowing upper bound becomes `+inf`.
    pub fn exp_saturating(self) -> Interval {
        std_fn::exp_saturating(self, RigorPolicy::Outward)
    }

    /// Saturating `ln`: the part of the interval at or below zero maps to `-inf`.
    pub fn ln_saturating(self) -> Interval {
        std_fn::ln_saturating(self, RigorPolicy::Outward)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        self.add_with(rhs, RigorPolicy::Outward)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        self.sub_with(rhs, RigorPolicy::Outward)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        self.mul_with(rhs, RigorPolicy::Outward)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        self.div_with(rhs, RigorPolicy::Outward)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn endpoint_formulas() {
        assert_eq!(iv(1.0, 2.0).checked_add(iv(3.0, 4.0)).unwrap(), iv(4.0, 6.0));
        assert_eq!(iv(0.0, 0.0).checked_add(iv(-2.5, 7.0)).unwrap(), iv(-2.5, 7.0));
        assert_eq!(iv(1.0, 2.0).checked_sub(iv(1.0, 2.0)).unwrap(), iv(-1.0, 1.0));
        assert_eq!(iv(-3.0, 5.0).checked_sub(Interval::ZERO).unwrap(), iv(-3.0, 5.0));
        assert_eq!(iv(-1.0, 2.0).checked_mul(iv(3.0, 4.0)).unwrap(), iv(-4.0, 8.0));
        assert_eq!(Interval::ZERO.checked_mul(iv(-9.0, 3.0)).unwrap(), Interval::ZERO);
        assert_eq!(iv(1.0, 2.0).checked_div(iv(2.0, 4.0)).unwrap(), iv(0.25, 1.0));
    }

    #[test]
    fn division_by_zero_containing_interval_is_an_error() {
        assert!(matches!(
            iv(1.0, 2.0).checked_div(iv(-1.0, 1.0)),
            Err(IntervalError::DivisorContainsZero { .. })
        ));
        assert_eq!(iv(1.0, 2.0) / iv(0.0, 1.0), Interval::ENTIRE);
    }

    #[test]
    fn overflow_is_reported() {
        let big = iv(f64::MAX, f64::MAX);
        assert_eq!(big.checked_add(big), Err(IntervalError::Overflow));
        assert!(!(big + big).is_finite());
        assert_eq!(big.checked_mul(iv(2.0, 2.0)), Err(IntervalError::Overflow));
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn geometric_queries() {
        assert_eq!(iv(1.0, 3.0).diameter(), 2.0);
        assert_eq!(iv(0.7, 0.7).diameter(), 0.0);
        assert_eq!(iv(0.0, 1.0).hull(&iv(2.0, 3.0)), iv(0.0, 3.0));
        assert_eq!(iv(0.0, 1.0).hull(&iv(0.0, 1.0)), iv(0.0, 1.0));
        assert_eq!(iv(0.0, 1.0).intersect(&iv(2.0, 3.0)), None);
        assert_eq!(iv(0.0, 2.0).intersect(&iv(1.0, 3.0)), Some(iv(1.0, 2.0)));
        assert_eq!(iv(-2.0, 3.0).mignitude(), 0.0);
        assert_eq!(iv(-2.0, -0.5).mignitude(), 0.5);
        assert_eq!(iv(-2.0, 1.0).magnitude(), 2.0);
        assert_eq!(iv(-4.0, 2.0).mid(), -1.0);
    }

    #[test]
    fn diameter_rounds_up() {
        let x = iv(0.1, 0.7);
        assert!(x.diameter() >= 0.7 - 0.1);
        assert!(x.diameter_with(RigorPolicy::Fast) <= x.diameter());
    }

    #[test]
    fn fast_policy_skips_widening() {
        let a = iv(0.1, 0.1);
        let b = iv(0.2, 0.2);
        assert!(a.add_with(b, RigorPolicy::Fast).is_thin());
        assert!(!a.add_with(b, RigorPolicy::Outward).is_thin());
    }
}
