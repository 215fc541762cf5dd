//! Walker's alias method: O(n) construction, O(1) draws.

use rand::Rng;

use super::SamplerError;

#[derive(Clone, Debug)]
pub struct AliasTable {
    cutoff: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    /// Builds the table for nonnegative `weights`; at least one must be positive.
    pub fn new(weights: &[f64]) -> Result<Self, SamplerError> {
        let n = weights.len();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(SamplerError::InvalidTarget(
                "alias weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if n == 0 || total <= 0.0 {
            return Err(SamplerError::DegenerateProposal);
        }
        let first_positive = weights.iter().position(|&w| w > 0.0).unwrap();

        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut cutoff = vec![0.0; n];
        let mut alias: Vec<usize> = (0..n).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);

        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            cutoff[s] = scaled[s];
            alias[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for l in large {
            cutoff[l] = 1.0;
        }
        // Leftovers here are rounding residue, except zero weights which must stay unreachable.
        for s in small {
            if weights[s] > 0.0 {
                cutoff[s] = 1.0;
            } else {
                cutoff[s] = 0.0;
                alias[s] = first_positive;
            }
        }
        Ok(AliasTable { cutoff, alias })
    }

    pub fn len(&self) -> usize {
        self.cutoff.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cutoff.is_empty()
    }

    pub fn cutoff(&self, i: usize) -> f64 {
        self.cutoff[i]
    }

    pub fn alias(&self, i: usize) -> usize {
        self.alias[i]
    }

    /// Probability that a draw returns `i`, reconstructed from the table.
    pub fn probability(&self, i: usize) -> f64 {
        let n = self.len() as f64;
        let own = self.cutoff[i];
        let borrowed: f64 = (0..self.len())
            .filter(|&j| j != i && self.alias[j] == i)
            .map(|j| 1.0 - self.cutoff[j])
            .sum();
        let self_alias = if self.alias[i] == i { 1.0 - own } else { 0.0 };
        (own + borrowed + self_alias) / n
    }

    /// Draws an index from two uniforms.
    pub fn draw_with(&self, u_column: f64, u_coin: f64) -> usize {
        let n = self.len();
        let i = ((u_column * n as f64) as usize).min(n - 1);
        if u_coin < self.cutoff[i] {
            i
        } else {
            self.alias[i]
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        self.draw_with(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn single_entry_always_drawn() {
        let t = AliasTable::new(&[1.0]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(t.draw(&mut rng), 0);
        }
    }

    #[test]
    fn two_equal_weights_split_evenly() {
        let t = AliasTable::new(&[1.0, 1.0]).unwrap();
        assert_eq!(t.cutoff(0), 1.0);
        assert_eq!(t.cutoff(1), 1.0);
        assert_eq!(t.probability(0), 0.5);
        assert_eq!(t.probability(1), 0.5);
    }

    #[test]
    fn reconstructed_probabilities_match_weights() {
        let w = [5.0, 1.0, 3.0, 1.0, 0.0, 7.5];
        let total: f64 = w.iter().sum();
        let t = AliasTable::new(&w).unwrap();
        for (i, wi) in w.iter().enumerate() {
            assert!((t.probability(i) - wi / total).abs() < 1e-12, "entry {i}");
        }
    }

    #[test]
    fn zero_weight_is_unreachable() {
        let t = AliasTable::new(&[0.0, 2.0, 0.0]).unwrap();
        for i in 0..3 {
            for j in 0..50 {
                let u = (i as f64 + j as f64 / 50.0) / 3.0;
                for coin in [0.0, 0.3, 0.999_999] {
                    assert_eq!(t.draw_with(u, coin), 1);
                }
            }
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(AliasTable::new(&[]), Err(SamplerError::DegenerateProposal)));
        assert!(matches!(AliasTable::new(&[0.0, 0.0]), Err(SamplerError::DegenerateProposal)));
        assert!(AliasTable::new(&[1.0, -1.0]).is_err());
    }
}
