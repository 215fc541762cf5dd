use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::round::{next_up, sqrt_down, sqrt_up, ulps_down, ulps_up};
use super::{Interval, IntervalError, RigorPolicy};

/// Ulps of slack added to each libm result. The platform libm is faithful
/// (< 1 ulp) for these functions; two ulps leaves margin.
const LIBM_ULPS: u32 = 2;

/// Lower and upper machine enclosure of π. `consts::PI` is the nearest double
/// and lies below π.
const PI_LO: f64 = PI;

fn pi_hi() -> f64 {
    PI.next_up()
}

/// Tags for the standard functions with interval extensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdFn {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Atan,
    Abs,
}

impl StdFn {
    pub const ALL: [StdFn; 8] = [
        StdFn::Exp,
        StdFn::Log,
        StdFn::Sqrt,
        StdFn::Sin,
        StdFn::Cos,
        StdFn::Tan,
        StdFn::Atan,
        StdFn::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StdFn::Exp => "exp",
            StdFn::Log => "log",
            StdFn::Sqrt => "sqrt",
            StdFn::Sin => "sin",
            StdFn::Cos => "cos",
            StdFn::Tan => "tan",
            StdFn::Atan => "atan",
            StdFn::Abs => "abs",
        }
    }

    fn domain_error(self, lo: f64, hi: f64) -> IntervalError {
        IntervalError::Domain {
            function: self.name(),
            lo,
            hi,
        }
    }

    /// Point evaluation with the same domain rules as the interval extension.
    pub fn eval_real(self, x: f64) -> Result<f64, IntervalError> {
        let y = match self {
            StdFn::Exp => x.exp(),
            StdFn::Log if x > 0.0 => x.ln(),
            StdFn::Sqrt if x >= 0.0 => x.sqrt(),
            StdFn::Log | StdFn::Sqrt => return Err(self.domain_error(x, x)),
            StdFn::Sin => x.sin(),
            StdFn::Cos => x.cos(),
            StdFn::Tan => x.tan(),
            StdFn::Atan => x.atan(),
            StdFn::Abs => x.abs(),
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(IntervalError::Overflow)
        }
    }

    /// Interval extension. Finite inputs only; the result always encloses
    /// the exact range under [`RigorPolicy::Outward`].
    pub fn eval_interval(self, x: Interval, policy: RigorPolicy) -> Result<Interval, IntervalError> {
        x.ensure_finite()?;
        let y = match self {
            StdFn::Exp => exp_saturating(x, policy),
            StdFn::Log => {
                if x.lo <= 0.0 {
                    return Err(self.domain_error(x.lo, x.hi));
                }
                ln_saturating(x, policy)
            }
            StdFn::Sqrt => {
                if x.lo < 0.0 {
                    return Err(self.domain_error(x.lo, x.hi));
                }
                Interval::saturated(sqrt_down(x.lo, policy), sqrt_up(x.hi, policy))
            }
            StdFn::Sin => {
                let y = trig_range(x, f64::sin, 0.5, 1.5, policy);
                if -PI_LO <= x.lo && x.hi <= PI_LO {
                    keep_sign_of(x, y)
                } else {
                    y
                }
            }
            StdFn::Cos => trig_range(x, f64::cos, 0.0, 1.0, policy),
            StdFn::Tan => {
                let y = tan_range(x, policy).ok_or_else(|| self.domain_error(x.lo, x.hi))?;
                // no pole inside, so an argument within (-1.5, 1.5) lies in (-π/2, π/2)
                if -1.5 < x.lo && x.hi < 1.5 {
                    keep_sign_of(x, y)
                } else {
                    y
                }
            }
            StdFn::Atan => {
                let half_pi = next_up(pi_hi() * 0.5);
                keep_sign_of(
                    x,
                    Interval::saturated(
                        down(x.lo.atan(), x.lo == 0.0, policy).max(-half_pi),
                        up(x.hi.atan(), x.hi == 0.0, policy).min(half_pi),
                    ),
                )
            }
            StdFn::Abs => x.abs(),
        };
        y.ensure_finite()
    }
}

impl fmt::Display for StdFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StdFn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exp" => Ok(StdFn::Exp),
            "log" | "ln" => Ok(StdFn::Log),
            "sqrt" => Ok(StdFn::Sqrt),
            "sin" => Ok(StdFn::Sin),
            "cos" => Ok(StdFn::Cos),
            "tan" => Ok(StdFn::Tan),
            "atan" | "arctan" => Ok(StdFn::Atan),
            "abs" => Ok(StdFn::Abs),
            other => Err(format!("unknown function `{other}`")),
        }
    }
}

#[inline]
fn down(v: f64, exact: bool, policy: RigorPolicy) -> f64 {
    if exact || policy == RigorPolicy::Fast {
        v
    } else {
        ulps_down(v, LIBM_ULPS)
    }
}

#[inline]
fn up(v: f64, exact: bool, policy: RigorPolicy) -> f64 {
    if exact || policy == RigorPolicy::Fast {
        v
    } else {
        ulps_up(v, LIBM_ULPS)
    }
}

/// Restricts `y = f(x)` for a sign-preserving `f` to the sign of `x`. Keeps
/// enclosures isotone near 0, where the bound at an exact endpoint is not widened.
fn keep_sign_of(x: Interval, y: Interval) -> Interval {
    let lo = if x.lo >= 0.0 { y.lo.max(0.0) } else { y.lo };
    let hi = if x.hi <= 0.0 { y.hi.min(0.0) } else { y.hi };
    Interval::saturated(lo, hi)
}

pub(super) fn exp_saturating(x: Interval, policy: RigorPolicy) -> Interval {
    let mut lo = down(x.lo.exp(), x.lo == 0.0, policy).max(0.0);
    let mut hi = up(x.hi.exp(), x.hi == 0.0, policy);
    if x.lo >= 0.0 {
        lo = lo.max(1.0);
    }
    if x.hi <= 0.0 {
        hi = hi.min(1.0);
    }
    // exp(lo) overflowing still bounds the value from below by MAX.
    let lo = if lo.is_infinite() { f64::MAX } else { lo };
    Interval::saturated(lo, hi)
}

pub(super) fn ln_saturating(x: Interval, policy: RigorPolicy) -> Interval {
    let lo = if x.lo <= 0.0 {
        f64::NEG_INFINITY
    } else {
        down(x.lo.ln(), x.lo == 1.0, policy)
    };
    let hi = if x.hi <= 0.0 {
        f64::NEG_INFINITY
    } else {
        up(x.hi.ln(), x.hi == 1.0, policy)
    };
    let lo = if x.lo >= 1.0 { lo.max(0.0) } else { lo };
    let hi = if x.hi <= 1.0 { hi.min(0.0) } else { hi };
    Interval::saturated(lo, hi)
}

/// Enclosure of `c·π` for an exactly representable multiplier `c`.
fn pi_multiple(c: f64) -> Interval {
    Interval::saturated(PI_LO, pi_hi()).mul_with(Interval::saturated(c, c), RigorPolicy::Outward)
}

/// Whether some `π·(phase + 2k)` may lie in `x`. Conservative: a `true` may be spurious.
fn may_contain_phase(x: Interval, phase: f64) -> bool {
    let k_lo = ((x.lo / PI - phase) / 2.0).floor() - 1.0;
    let k_hi = ((x.hi / PI - phase) / 2.0).ceil() + 1.0;
    let mut k = k_lo;
    while k <= k_hi {
        if pi_multiple(phase + 2.0 * k).intersect(&x).is_some() {
            return true;
        }
        k += 1.0;
    }
    false
}

/// Range of a 2π-periodic function whose maxima sit at `π·(max_phase + 2k)`
/// and minima at `π·(min_phase + 2k)`, monotone in between.
fn trig_range(
    x: Interval,
    f: fn(f64) -> f64,
    max_phase: f64,
    min_phase: f64,
    policy: RigorPolicy,
) -> Interval {
    // Beyond this the multiplier 2k is no longer exact, and wide arguments cover a period anyway.
    if x.diameter() >= 2.0 * PI || x.magnitude() > 1e15 {
        return Interval::saturated(-1.0, 1.0);
    }
    // sin(0) and cos(0) are exact
    let is_exact = |v: f64| v == 0.0;
    let (fa, fb) = (f(x.lo), f(x.hi));
    let (min, max) = (fa.min(fb), fa.max(fb));
    // a bound stays unwidened only if every endpoint attaining it is exact
    let exact_at = |target: f64| (fa != target || is_exact(x.lo)) && (fb != target || is_exact(x.hi));
    let mut lo = down(min, exact_at(min), policy).max(-1.0);
    let mut hi = up(max, exact_at(max), policy).min(1.0);
    if may_contain_phase(x, max_phase) {
        hi = 1.0;
    }
    if may_contain_phase(x, min_phase) {
        lo = -1.0;
    }
    Interval::saturated(lo, hi)
}

/// `tan` is increasing between poles at `π·(1/2 + k)`; `None` if a pole may lie in `x`.
fn tan_range(x: Interval, policy: RigorPolicy) -> Option<Interval> {
    if x.diameter() >= PI || x.magnitude() > 1e15 {
        return None;
    }
    // poles at π(0.5 + 2k) and π(1.5 + 2k)
    if may_contain_phase(x, 0.5) || may_contain_phase(x, 1.5) {
        return None;
    }
    Some(Interval::saturated(
        down(x.lo.tan(), x.lo == 0.0, policy),
        up(x.hi.tan(), x.hi == 0.0, policy),
    ))
}

/// Enclosure of `a^n` for `a >= 0`, `n >= 1`, by outward repeated squaring.
fn pow_point_nonneg(a: f64, n: u32, policy: RigorPolicy) -> Interval {
    let mut base = Interval::saturated(a, a);
    let mut acc = Interval::ONE;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul_with(base, policy);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul_with(base, policy);
        }
    }
    acc
}

pub(super) fn powi(x: Interval, n: i32, policy: RigorPolicy) -> Result<Interval, IntervalError> {
    x.ensure_finite()?;
    if n == 0 {
        return Ok(Interval::ONE);
    }
    let base = if n < 0 {
        if x.contains_zero() {
            return Err(IntervalError::Domain {
                function: "powi",
                lo: x.lo,
                hi: x.hi,
            });
        }
        Interval::ONE.div_with(x, policy)
    } else {
        x
    };
    let m = n.unsigned_abs();
    let y = if m % 2 == 1 {
        let lo = if base.lo >= 0.0 {
            pow_point_nonneg(base.lo, m, policy).lo
        } else {
            -pow_point_nonneg(-base.lo, m, policy).hi
        };
        let hi = if base.hi >= 0.0 {
            pow_point_nonneg(base.hi, m, policy).hi
        } else {
            -pow_point_nonneg(-base.hi, m, policy).lo
        };
        Interval::saturated(lo, hi)
    } else {
        Interval::saturated(
            pow_point_nonneg(base.mignitude(), m, policy).lo,
            pow_point_nonneg(base.magnitude(), m, policy).hi,
        )
    };
    y.ensure_finite()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    const OUT: RigorPolicy = RigorPolicy::Outward;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn exp_of_unit_interval() {
        let y = StdFn::Exp.eval_interval(iv(0.0, 1.0), OUT).unwrap();
        assert_eq!(y.lo(), 1.0);
        assert!(y.hi() >= E && y.hi() - E < 1e-15);
    }

    #[test]
    fn even_power_uses_mignitude() {
        assert_eq!(iv(-2.0, 3.0).powi(2).unwrap(), iv(0.0, 9.0));
        assert_eq!(iv(-3.0, -2.0).powi(2).unwrap(), iv(4.0, 9.0));
        assert_eq!(iv(-2.0, 3.0).powi(3).unwrap(), iv(-8.0, 27.0));
        assert_eq!(iv(-2.0, 3.0).powi(0).unwrap(), Interval::ONE);
        assert_eq!(iv(2.0, 4.0).powi(-1).unwrap(), iv(0.25, 0.5));
        assert_eq!(iv(-2.0, -1.0).powi(-2).unwrap(), iv(0.25, 1.0));
        assert!(iv(-1.0, 1.0).powi(-1).is_err());
    }

    #[test]
    fn sine_interior_maximum() {
        let y = StdFn::Sin.eval_interval(iv(0.0, PI), OUT).unwrap();
        assert_eq!(y.hi(), 1.0);
        assert!(y.lo() <= 0.0 && y.lo() > -1e-15);
        let y = StdFn::Cos.eval_interval(iv(-0.5, 0.5), OUT).unwrap();
        assert_eq!(y.hi(), 1.0);
        let y = StdFn::Sin.eval_interval(iv(-10.0, 10.0), OUT).unwrap();
        assert_eq!(y, iv(-1.0, 1.0));
    }

    #[test]
    fn sine_on_monotone_branch_is_tight() {
        let y = StdFn::Sin.eval_interval(iv(0.1, 0.2), OUT).unwrap();
        assert!(y.lo() <= 0.1f64.sin() && y.hi() >= 0.2f64.sin());
        assert!(y.diameter() < 0.2f64.sin() - 0.1f64.sin() + 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(StdFn::Log.eval_interval(iv(0.0, 1.0), OUT).is_err());
        assert!(StdFn::Sqrt.eval_interval(iv(-1.0, 1.0), OUT).is_err());
        assert!(StdFn::Tan.eval_interval(iv(1.0, 2.0), OUT).is_err());
        assert!(StdFn::Exp.eval_interval(iv(0.0, 800.0), OUT).is_err());
        assert!(StdFn::Log.eval_real(-1.0).is_err());
    }

    #[test]
    fn saturating_log() {
        let y = ln_saturating(iv(0.0, 1.0), OUT);
        assert_eq!(y.lo(), f64::NEG_INFINITY);
        assert_eq!(y.hi(), 0.0);
    }

    #[test]
    fn names_round_trip() {
        for f in StdFn::ALL {
            assert_eq!(f.name().parse::<StdFn>().unwrap(), f);
        }
    }
}
