//! Exact rational arithmetic on machine numbers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};

/// The exact value of a finite double.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite double")
}

/// `lo <= v <= hi` with infinite bounds treated as unbounded.
pub fn encloses(lo: f64, hi: f64, v: &BigRational) -> bool {
    (lo == f64::NEG_INFINITY || (lo.is_finite() && rational(lo) <= *v))
        && (hi == f64::INFINITY || (hi.is_finite() && *v <= rational(hi)))
}

/// Whether `[lo, hi]` contains `sqrt(v)` for `v >= 0`, checked by squaring.
pub fn encloses_sqrt(lo: f64, hi: f64, v: &BigRational) -> bool {
    let below = lo <= 0.0 || (lo.is_finite() && rational(lo) * rational(lo) <= *v);
    let above = hi == f64::INFINITY || (hi >= 0.0 && *v <= rational(hi) * rational(hi));
    below && above
}

pub fn pow(base: &BigRational, n: i32) -> BigRational {
    let mut acc = BigRational::from_integer(BigInt::from(1));
    for _ in 0..n.unsigned_abs() {
        acc *= base;
    }
    if n < 0 {
        acc.recip()
    } else {
        acc
    }
}

pub fn is_zero(v: &BigRational) -> bool {
    v.is_zero()
}

pub fn abs(v: &BigRational) -> BigRational {
    v.abs()
}
