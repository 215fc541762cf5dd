use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use super::{Nucleotide, PhyloError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Jc,
    Hky,
}

/// A reversible substitution model, rate-normalised to one expected
/// substitution per unit branch length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstModel {
    kind: ModelKind,
    /// Stationary frequencies in `t, c, a, g` order.
    freqs: [f64; 4],
    /// Transition/transversion rate ratio.
    kappa: f64,
}

pub type TransitionMatrix<S> = [[S; 4]; 4];

const T: usize = 0;
const C: usize = 1;
const A: usize = 2;
const G: usize = 3;

impl SubstModel {
    pub fn jc() -> Self {
        SubstModel {
            kind: ModelKind::Jc,
            freqs: [0.25; 4],
            kappa: 1.0,
        }
    }

    /// HKY with frequencies in `t, c, a, g` order. Frequencies are rescaled to
    /// sum to exactly 1 if they are within 1e-6 of it.
    pub fn hky(freqs: [f64; 4], kappa: f64) -> Result<Self, PhyloError> {
        if freqs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(PhyloError::InvalidModel(format!(
                "frequencies must be positive, got {freqs:?}"
            )));
        }
        let sum: f64 = freqs.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(PhyloError::InvalidModel(format!(
                "frequencies sum to {sum}, not 1"
            )));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(PhyloError::InvalidModel(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        Ok(SubstModel {
            kind: ModelKind::Hky,
            freqs: freqs.map(|f| f / sum),
            kappa,
        })
    }

    /// HKY from an expected transition/transversion ratio instead of `kappa`.
    pub fn hky_from_tstv(freqs: [f64; 4], ratio: f64) -> Result<Self, PhyloError> {
        let purines = freqs[A] + freqs[G];
        let pyrimidines = freqs[T] + freqs[C];
        let within = freqs[A] * freqs[G] + freqs[C] * freqs[T];
        if !(within > 0.0 && ratio.is_finite() && ratio > 0.0) {
            return Err(PhyloError::InvalidModel(format!(
                "ts/tv ratio must be positive, got {ratio}"
            )));
        }
        Self::hky(freqs, ratio * purines * pyrimidines / within)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn freqs(&self) -> [f64; 4] {
        self.freqs
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Expected transitions over expected transversions per substitution.
    pub fn tstv_ratio(&self) -> f64 {
        let f = self.freqs;
        self.kappa * (f[A] * f[G] + f[C] * f[T]) / ((f[A] + f[G]) * (f[T] + f[C]))
    }
}

/// `P(t)`, generic over point and interval branch lengths. Entries are
/// clamped to `[0, 1]`. The caller guarantees `t >= 0`.
pub fn transition_matrix<S: Scalar>(model: &SubstModel, t: S) -> TransitionMatrix<S> {
    match model.kind {
        ModelKind::Jc => jc_matrix(t),
        ModelKind::Hky => hky_matrix(model, t),
    }
}

fn jc_matrix<S: Scalar>(t: S) -> TransitionMatrix<S> {
    let c = S::from_f64;
    let decay = (c(0.0) - c(4.0) * t / c(3.0)).exp();
    let same = (c(0.25) + c(0.75) * decay).clamp_probability();
    let diff = (c(0.25) - c(0.25) * decay).clamp_probability();
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { same } else { diff }))
}

fn hky_matrix<S: Scalar>(model: &SubstModel, t: S) -> TransitionMatrix<S> {
    let c = S::from_f64;
    let pi = model.freqs.map(c);
    let kappa = c(model.kappa);
    let purines = pi[A] + pi[G];
    let pyrimidines = pi[T] + pi[C];
    let rate = c(2.0) * kappa * (pi[A] * pi[G] + pi[C] * pi[T]) + c(2.0) * purines * pyrimidines;
    let scaled_t = t / rate;
    let slow = (c(0.0) - scaled_t).exp();

    let mut out = [[c(0.0); 4]; 4];
    for j in 0..4 {
        let (own, other) = if Nucleotide::from_index(j).is_purine() {
            (purines, pyrimidines)
        } else {
            (pyrimidines, purines)
        };
        let fast = (c(0.0) - scaled_t * (c(1.0) + own * (kappa - c(1.0)))).exp();
        let stay = pi[j] * other / own * slow;
        for (i, row) in out.iter_mut().enumerate() {
            let same_class = Nucleotide::from_index(i).is_purine() == Nucleotide::from_index(j).is_purine();
            row[j] = if i == j {
                pi[j] + stay + (own - pi[j]) / own * fast
            } else if same_class {
                pi[j] + stay - pi[j] / own * fast
            } else {
                pi[j] * (c(1.0) - slow)
            }
            .clamp_probability();
        }
    }
    out
}

fn check_time(t: f64) -> Result<(), PhyloError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(PhyloError::Domain(format!("branch length must be nonnegative, got {t}")))
    }
}

pub fn jc_transition(t: f64) -> Result<TransitionMatrix<f64>, PhyloError> {
    check_time(t)?;
    Ok(jc_matrix(t))
}

pub fn hky_transition(t: f64, model: &SubstModel) -> Result<TransitionMatrix<f64>, PhyloError> {
    check_time(t)?;
    Ok(hky_matrix(model, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_is_identity() {
        let hky = SubstModel::hky([0.2588, 0.2571, 0.2916, 0.1925], 2.0).unwrap();
        for p in [jc_transition(0.0).unwrap(), hky_transition(0.0, &hky).unwrap()] {
            for (i, row) in p.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn tstv_round_trip() {
        let f = [0.2588, 0.2571, 0.2916, 0.1925];
        let m = SubstModel::hky_from_tstv(f, 2.0).unwrap();
        assert!((m.tstv_ratio() - 2.0).abs() < 1e-12);
        assert!(m.kappa() > 2.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(jc_transition(-1e-3).is_err());
        assert!(SubstModel::hky([0.5, 0.5, 0.0, 0.0], 2.0).is_err());
        assert!(SubstModel::hky([0.3, 0.3, 0.3, 0.3], 2.0).is_err());
        assert!(SubstModel::hky([0.25; 4], 0.0).is_err());
    }
}
