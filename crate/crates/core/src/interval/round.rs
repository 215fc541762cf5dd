//! Directed rounding for the four basic operations and `sqrt`.
//!
//! The hardware computes round-to-nearest; an error-free transformation
//! (TwoSum for addition, FMA residuals for the rest) recovers the sign of the
//! rounding error, and the result is stepped one ulp in the required direction
//! only when it was actually rounded the wrong way. No rounding-mode state is
//! touched, so these helpers are safe to call from any thread.

use super::RigorPolicy;

/// Smallest positive normal f64. Below this the FMA residual is no longer exact.
const MIN_NORMAL: f64 = f64::MIN_POSITIVE;

#[inline]
pub(crate) fn next_down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

#[inline]
pub(crate) fn next_up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

/// Steps `x` down by `n` ulps.
pub(crate) fn ulps_down(mut x: f64, n: u32) -> f64 {
    for _ in 0..n {
        x = next_down(x);
    }
    x
}

/// Steps `x` up by `n` ulps.
pub(crate) fn ulps_up(mut x: f64, n: u32) -> f64 {
    for _ in 0..n {
        x = next_up(x);
    }
    x
}

/// Knuth's TwoSum: `a + b = s + e` exactly (for finite `s`).
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn settle_down(approx: f64, err: f64) -> f64 {
    if err < 0.0 {
        next_down(approx)
    } else {
        approx
    }
}

#[inline]
fn settle_up(approx: f64, err: f64) -> f64 {
    if err > 0.0 {
        next_up(approx)
    } else {
        approx
    }
}

pub(crate) fn add_down(a: f64, b: f64, policy: RigorPolicy) -> f64 {
    let (s, e) = two_sum(a, b);
    match policy {
        RigorPolicy::Fast => s,
        RigorPolicy::Outward if !s.is_finite() => s,
        RigorPolicy::Outward => settle_down(s, e),
    }
}

pub(crate) fn add_up(a: f64, b: f64, policy: RigorPolicy) -> f64 {
    let (s, e) = two_sum(a, b);
    match policy {
        RigorPolicy::Fast => s,
        RigorPolicy::Outward if !s.is_finite() => s,
        RigorPolicy::Outward => settle_up(s, e),
    }
}

/// Product with infinities allowed; `0 * inf` is taken as 0, which is the
/// correct limit for the bounded-times-saturated products seen here.
#[inline]
fn raw_mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

fn mul_residual(a: f64, b: f64, p: f64) -> Option<f64> {
    if !p.is_finite() || !a.is_finite() || !b.is_finite() {
        return Some(0.0);
    }
    if p == 0.0 {
        // a, b nonzero but the product underflowed completely
        return if a == 0.0 || b == 0.0 { Some(0.0) } else { None };
    }
    if p.abs() < MIN_NORMAL * 4.0 {
        return None;
    }
    Some(a.mul_add(b, -p))
}

pub(crate) fn mul_down(a: f64, b: f64, policy: RigorPolicy) -> f64 {
    let p = raw_mul(a, b);
    if policy == RigorPolicy::Fast {
        return p;
    }
    match mul_residual(a, b, p) {
        Some(e) => settle_down(p, e),
        None => next_down(p),
    }
}

pub(crate) fn mul_up(a: f64, b: f64, policy: RigorPolicy) -> f64 {
    let p = raw_mul(a, b);
    if policy == RigorPolicy::Fast {
        return p;
    }
    match mul_residual(a, b, p) {
        Some(e) => settle_up(p, e),
        None => next_up(p),
    }
}

/// Sign of the true quotient's excess over `q`, when it can be recovered exactly.
fn div_residual_sign(a: f64, b: f64, q: f64) -> Option<f64> {
    if !q.is_finite() || !a.is_finite() || !b.is_finite() {
        return Some(0.0);
    }
    if a == 0.0 {
        return Some(0.0);
    }
    if q.abs() < MIN_NORMAL * 4.0 || a.abs() < MIN_NORMAL * 4.0 {
        return None;
    }
    // a = q*b + r exactly; the true quotient is q + r/b.
    let r = (-q).mul_add(b, a);
    Some(if r == 0.0 {
        0.0
    } else if (r > 0.0) == (b > 0.0) {
        1.0
    } else {
        -1.0
    })
}

pub(crate) fn div_down(a: f64, b: f64, policy: RigorPolicy) -> f64 {
    let q = a / b;
    if policy == RigorPolicy::Fast {
        return q;
    }
    match div_residual_sign(a, b, q) {
        Some(e) => settle_down(q, e),
        None => next_down(q),
    }
}

pub(crate) fn div_up(a: f64, b: f64, policy: RigorPolicy) -> f64 {
    let q = a / b;
    if policy == RigorPolicy::Fast {
        return q;
    }
    match div_residual_sign(a, b, q) {
        Some(e) => settle_up(q, e),
        None => next_up(q),
    }
}

/// Residual sign for `sqrt(x)` against the rounded root `s`.
fn sqrt_residual(x: f64, s: f64) -> Option<f64> {
    if x == 0.0 || !x.is_finite() {
        return Some(0.0);
    }
    if x < MIN_NORMAL * 4.0 {
        return None;
    }
    Some((-s).mul_add(s, x))
}

pub(crate) fn sqrt_down(x: f64, policy: RigorPolicy) -> f64 {
    let s = x.sqrt();
    if policy == RigorPolicy::Fast {
        return s;
    }
    match sqrt_residual(x, s) {
        Some(e) => settle_down(s, e).max(0.0),
        None => next_down(s).max(0.0),
    }
}

pub(crate) fn sqrt_up(x: f64, policy: RigorPolicy) -> f64 {
    let s = x.sqrt();
    if policy == RigorPolicy::Fast {
        return s;
    }
    match sqrt_residual(x, s) {
        Some(e) => settle_up(s, e),
        None => next_up(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OUT: RigorPolicy = RigorPolicy::Outward;

    #[test]
    fn exact_sums_are_not_widened() {
        assert_eq!(add_down(1.0, 3.0, OUT), 4.0);
        assert_eq!(add_up(2.0, 4.0, OUT), 6.0);
        assert_eq!(mul_down(-1.0, 4.0, OUT), -4.0);
        assert_eq!(div_up(1.0, 4.0, OUT), 0.25);
        assert_eq!(sqrt_down(9.0, OUT), 3.0);
    }

    #[test]
    fn inexact_results_bracket_the_real_value() {
        // 0.1 + 0.2 is not representable; the bracket must be one ulp wide.
        let lo = add_down(0.1, 0.2, OUT);
        let hi = add_up(0.1, 0.2, OUT);
        assert!(lo < hi);
        assert_eq!(lo.next_up(), hi);

        let lo = div_down(1.0, 3.0, OUT);
        let hi = div_up(1.0, 3.0, OUT);
        assert_eq!(lo.next_up(), hi);
        assert!(mul_down(lo, 3.0, OUT) <= 1.0 && mul_up(hi, 3.0, OUT) >= 1.0);

        let lo = sqrt_down(2.0, OUT);
        let hi = sqrt_up(2.0, OUT);
        assert_eq!(lo.next_up(), hi);
        assert!(lo * lo <= 2.0);
    }

    #[test]
    fn fast_policy_is_nearest() {
        assert_eq!(add_down(0.1, 0.2, RigorPolicy::Fast), 0.1 + 0.2);
        assert_eq!(div_up(1.0, 3.0, RigorPolicy::Fast), 1.0 / 3.0);
    }

    #[test]
    fn underflowing_products_widen() {
        let tiny = 1e-200;
        assert!(mul_down(tiny, tiny, OUT) < 0.0);
        assert!(mul_up(tiny, tiny, OUT) > 0.0);
    }
}
