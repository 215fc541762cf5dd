use serde::{Deserialize, Serialize};

use super::round::mul_up;
use super::{Interval, IntervalError, RigorPolicy};

/// An axis-aligned box: the product of `n >= 1` intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox {
    sides: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(sides: Vec<Interval>) -> Result<Self, IntervalError> {
        if sides.is_empty() {
            return Err(IntervalError::InvalidBounds {
                lo: f64::NAN,
                hi: f64::NAN,
            });
        }
        for s in &sides {
            s.ensure_finite()?;
        }
        Ok(IntervalBox { sides })
    }

    /// Box from `(lo, hi)` pairs.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self, IntervalError> {
        let sides = bounds
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(sides)
    }

    /// `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self, IntervalError> {
        Self::new(vec![Interval::new(lo, hi)?; dim])
    }

    /// The degenerate box at a point.
    pub fn thin(point: &[f64]) -> Self {
        IntervalBox {
            sides: point.iter().map(|&x| Interval::point(x)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[Interval] {
        &self.sides
    }

    pub fn side(&self, k: usize) -> Interval {
        self.sides[k]
    }

    /// Product of side diameters, rounded up.
    pub fn volume(&self) -> f64 {
        self.sides
            .iter()
            .fold(1.0, |acc, s| mul_up(acc, s.diameter(), RigorPolicy::Outward))
    }

    /// Rigorous enclosure of the true volume.
    pub fn volume_enclosure(&self) -> Interval {
        self.sides.iter().fold(Interval::ONE, |acc, s| {
            let d = s.sub_with_hi_lo();
            acc.mul_with(d, RigorPolicy::Outward)
        })
    }

    /// Index of the widest side; the lowest index wins ties.
    pub fn max_diam_side(&self) -> usize {
        let mut best = 0;
        let mut best_d = self.sides[0].diameter();
        for (k, s) in self.sides.iter().enumerate().skip(1) {
            let d = s.diameter();
            if d > best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }

    pub fn max_diameter(&self) -> f64 {
        self.sides[self.max_diam_side()].diameter()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.sides.iter().map(Interval::mid).collect()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.sides.iter().zip(x).all(|(s, &v)| s.contains(v))
    }

    pub fn is_subset(&self, other: &IntervalBox) -> bool {
        self.dim() == other.dim()
            && self
                .sides
                .iter()
                .zip(&other.sides)
                .all(|(a, b)| a.is_subset(b))
    }

    /// Splits side `k` at `at`, which must lie strictly inside it.
    pub fn split_at(&self, k: usize, at: f64) -> Option<(IntervalBox, IntervalBox)> {
        let s = self.sides[k];
        if !(s.lo() < at && at < s.hi()) {
            return None;
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.sides[k] = Interval::saturated(s.lo(), at);
        right.sides[k] = Interval::saturated(at, s.hi());
        Some((left, right))
    }

    /// Bisects the widest side at its midpoint. `None` if that side is too
    /// narrow to hold a machine number strictly inside.
    pub fn bisect(&self) -> Option<(IntervalBox, IntervalBox)> {
        let k = self.max_diam_side();
        self.split_at(k, self.sides[k].mid())
    }

    /// Uniform `k`-way subdivision of every side, `k^n` boxes in row-major order.
    ///
    /// Grid points are `lo + (hi - lo) * (i / k)` with the ends pinned, so the
    /// grid for `2k` contains the grid for `k` point for point.
    pub fn subdivide(&self, k: usize) -> Vec<IntervalBox> {
        assert!(k >= 1);
        let grids: Vec<Vec<f64>> = self.sides.iter().map(|s| grid_points(*s, k)).collect();
        let n = self.dim();
        let total = k.pow(n as u32);
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; n];
        for _ in 0..total {
            let sides = idx
                .iter()
                .zip(&grids)
                .map(|(&i, g)| Interval::saturated(g[i], g[i + 1]))
                .collect();
            out.push(IntervalBox { sides });
            for d in (0..n).rev() {
                idx[d] += 1;
                if idx[d] < k {
                    break;
                }
                idx[d] = 0;
            }
        }
        out
    }
}

fn grid_points(s: Interval, k: usize) -> Vec<f64> {
    let w = s.hi() - s.lo();
    let mut pts: Vec<f64> = (0..=k)
        .map(|i| (s.lo() + w * (i as f64 / k as f64)).clamp(s.lo(), s.hi()))
        .collect();
    pts[0] = s.lo();
    pts[k] = s.hi();
    pts
}

impl Interval {
    /// Enclosure of `hi - lo` as an interval.
    fn sub_with_hi_lo(&self) -> Interval {
        Interval::point(self.hi())
            .sub_with(Interval::point(self.lo()), RigorPolicy::Outward)
            .clamp_nonnegative()
    }
}
