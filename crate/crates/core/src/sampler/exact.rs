//! Exact arithmetic on dyadic rationals `num · 2^exp`, enough to sum piece
//! masses without rounding.

use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Dyadic {
    num: BigInt,
    exp: i64,
}

impl Dyadic {
    pub(crate) fn from_f64(x: f64) -> Dyadic {
        assert!(x.is_finite(), "dyadic from non-finite {x}");
        if x == 0.0 {
            return Dyadic::default();
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let num = BigInt::from(mantissa);
        Dyadic {
            num: if x < 0.0 { -num } else { num },
            exp,
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub(crate) fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic {
            num: &self.num * &other.num,
            exp: self.exp + other.exp,
        }
    }

    fn align(&mut self, exp: i64) {
        if exp < self.exp {
            self.num <<= (self.exp - exp) as usize;
            self.exp = exp;
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Dyadic) {
        if other.is_zero() {
            return;
        }
        if self.is_zero() {
            *self = other.clone();
            return;
        }
        self.align(other.exp);
        self.num += &other.num << (other.exp - self.exp) as usize;
    }

    pub(crate) fn sub_assign(&mut self, other: &Dyadic) {
        self.add_assign(&Dyadic {
            num: -other.num.clone(),
            exp: other.exp,
        });
    }

    pub(crate) fn sub(&self, other: &Dyadic) -> Dyadic {
        let mut out = self.clone();
        out.sub_assign(other);
        out
    }

    /// The nearest double in the direction of `+inf` (`up`) or `-inf`.
    pub(crate) fn to_f64_directed(&self, up: bool) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let negative = self.num.sign() == Sign::Minus;
        let mag = self.num.magnitude();
        let bits = mag.bits() as i64;
        let shift = (bits - 53).max(0);
        let top = (mag >> shift as usize).to_u64().expect("53 bits fit");
        let truncated = shift > 0 && mag.trailing_zeros().unwrap_or(0) < shift as u64;
        let (value, inexact) = scale2(top as f64, self.exp + shift);
        let value = if negative { -value } else { value };
        if inexact {
            // rounded to nearest while scaling: direction unknown
            if up {
                value.next_up()
            } else {
                value.next_down()
            }
        } else if !truncated || up == negative {
            // truncation toward zero already rounds in the requested direction
            value
        } else if up {
            value.next_up()
        } else {
            value.next_down()
        }
    }
}

/// `x · 2^k` and whether the result was rounded (subnormal or overflow).
fn scale2(x: f64, k: i64) -> (f64, bool) {
    let y = scale2_raw(x, k);
    let exact = y.is_finite() && scale2_raw(y, -k) == x;
    (y, !exact)
}

fn scale2_raw(x: f64, mut k: i64) -> f64 {
    let mut y = x;
    while k > 1000 {
        y *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        y *= 2f64.powi(-1000);
        k += 1000;
    }
    y * 2f64.powi(k as i32)
}

/// Exact real volume of a box with machine-number bounds.
pub(crate) fn exact_volume(sides: &[crate::interval::Interval]) -> Dyadic {
    sides.iter().fold(Dyadic::from_f64(1.0), |acc, s| {
        acc.mul(&Dyadic::from_f64(s.hi()).sub(&Dyadic::from_f64(s.lo())))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_are_exact() {
        let mut s = Dyadic::from_f64(0.1);
        s.add_assign(&Dyadic::from_f64(0.2));
        let (lo, hi) = (s.to_f64_directed(false), s.to_f64_directed(true));
        assert!(lo < hi && hi == lo.next_up());
        assert!(lo <= 0.1 + 0.2 && 0.1 + 0.2 <= hi);
        s.sub_assign(&Dyadic::from_f64(0.2));
        assert_eq!(s.to_f64_directed(true), 0.1);
        assert_eq!(s.to_f64_directed(false), 0.1);
    }

    #[test]
    fn products_round_outward() {
        let p = Dyadic::from_f64(0.1).mul(&Dyadic::from_f64(0.3));
        let (lo, hi) = (p.to_f64_directed(false), p.to_f64_directed(true));
        assert!(lo < hi && (lo == 0.1 * 0.3 || hi == 0.1 * 0.3));
        let n = Dyadic::from_f64(-3.0).mul(&Dyadic::from_f64(0.1));
        assert!(n.to_f64_directed(false) < n.to_f64_directed(true));
        assert!(n.to_f64_directed(true) < 0.0);
        assert_eq!(Dyadic::from_f64(5e-324).to_f64_directed(true), 5e-324);
    }
}
