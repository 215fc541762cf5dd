use std::ops::{Add, Div, Mul, Sub};

use crate::interval::Interval;

/// Number type the likelihood code is generic over: `f64` for point values,
/// [`Interval`] for enclosures.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn exp(self) -> Self;
    /// Natural log; `-inf` at and below zero.
    fn ln(self) -> Self;
    /// Restricts a value known to be a probability to `[0, 1]`.
    fn clamp_probability(self) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }

    fn ln(self) -> Self {
        if self <= 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::ln(self)
        }
    }

    fn clamp_probability(self) -> Self {
        self.clamp(0.0, 1.0)
    }
}

impl Scalar for Interval {
    fn from_f64(x: f64) -> Self {
        Interval::point(x)
    }

    fn exp(self) -> Self {
        self.exp_saturating()
    }

    fn ln(self) -> Self {
        self.ln_saturating()
    }

    fn clamp_probability(self) -> Self {
        self.intersect(&Interval::new(0.0, 1.0).unwrap())
            .unwrap_or(self)
    }
}
