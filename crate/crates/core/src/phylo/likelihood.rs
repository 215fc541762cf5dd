use serde::{Deserialize, Serialize};

use super::model::{transition_matrix, SubstModel, TransitionMatrix};
use super::scalar::Scalar;
use super::{Nucleotide, PhyloError};

/// The three unrooted bifurcating topologies on four taxa, named by the
/// split of taxa `1..4` across the internal edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuartetTopology {
    #[serde(rename = "12|34")]
    T12_34,
    #[serde(rename = "13|24")]
    T13_24,
    #[serde(rename = "14|23")]
    T14_23,
}

impl QuartetTopology {
    pub const ALL: [QuartetTopology; 3] = [
        QuartetTopology::T12_34,
        QuartetTopology::T13_24,
        QuartetTopology::T14_23,
    ];

    pub fn label(self) -> &'static str {
        match self {
            QuartetTopology::T12_34 => "12|34",
            QuartetTopology::T13_24 => "13|24",
            QuartetTopology::T14_23 => "14|23",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.label() == s)
    }

    /// Zero-based taxon indices on each side of the internal edge.
    pub fn sides(self) -> ([usize; 2], [usize; 2]) {
        match self {
            QuartetTopology::T12_34 => ([0, 1], [2, 3]),
            QuartetTopology::T13_24 => ([0, 2], [1, 3]),
            QuartetTopology::T14_23 => ([0, 3], [1, 2]),
        }
    }
}

pub(crate) fn stationary<S: Scalar>(model: &SubstModel) -> [S; 4] {
    model.freqs().map(S::from_f64)
}

/// Star tree: `Σ_r π_r Π_k P_{r,x_k}(t_k)`.
pub(crate) fn star_likelihood<S: Scalar>(
    pi: &[S; 4],
    mats: &[TransitionMatrix<S>; 3],
    x: &[Nucleotide],
) -> S {
    let (a, b, c) = (x[0].index(), x[1].index(), x[2].index());
    (0..4)
        .map(|r| pi[r] * mats[0][r][a] * mats[1][r][b] * mats[2][r][c])
        .reduce(|s, v| s + v)
        .unwrap()
}

/// Quartet from pendant matrices `mats[0..4]` and the internal one `mats[4]`.
pub(crate) fn quartet_likelihood<S: Scalar>(
    pi: &[S; 4],
    mats: &[TransitionMatrix<S>; 5],
    topology: QuartetTopology,
    x: &[Nucleotide],
) -> S {
    let ([a1, a2], [b1, b2]) = topology.sides();
    let (xa1, xa2, xb1, xb2) = (x[a1].index(), x[a2].index(), x[b1].index(), x[b2].index());
    (0..4)
        .map(|u| {
            let far = (0..4)
                .map(|v| mats[4][u][v] * mats[b1][v][xb1] * mats[b2][v][xb2])
                .reduce(|s, v| s + v)
                .unwrap();
            pi[u] * mats[a1][u][xa1] * mats[a2][u][xa2] * far
        })
        .reduce(|s, v| s + v)
        .unwrap()
}

/// Rooted triplet with matrices for the two ingroup tips, the internal edge and the outgroup:
/// `Σ_r π_r P_{r,x2}(outgroup) Σ_s P_{r,s}(internal) P_{s,x0}(tip0) P_{s,x1}(tip1)`.
pub(crate) fn rooted_likelihood<S: Scalar>(
    pi: &[S; 4],
    mats: &[TransitionMatrix<S>; 4],
    x: &[Nucleotide],
) -> S {
    let (x0, x1, x2) = (x[0].index(), x[1].index(), x[2].index());
    (0..4)
        .map(|r| {
            let below = (0..4)
                .map(|s| mats[2][r][s] * mats[0][s][x0] * mats[1][s][x1])
                .reduce(|a, b| a + b)
                .unwrap();
            pi[r] * mats[3][r][x2] * below
        })
        .reduce(|a, b| a + b)
        .unwrap()
}

/// Site likelihood on the star tree with pendant lengths `branches`.
pub fn triplet_site_likelihood<S: Scalar>(model: &SubstModel, pattern: &[Nucleotide], branches: [S; 3]) -> S {
    let mats = branches.map(|t| transition_matrix(model, t));
    star_likelihood(&stationary(model), &mats, pattern)
}

/// Site likelihood of a quartet; `branches` are the four pendant lengths
/// (taxon order) followed by the internal edge.
pub fn quartet_site_likelihood<S: Scalar>(
    model: &SubstModel,
    pattern: &[Nucleotide],
    topology: QuartetTopology,
    branches: [S; 5],
) -> S {
    let mats = branches.map(|t| transition_matrix(model, t));
    quartet_likelihood(&stationary(model), &mats, topology, pattern)
}

/// Branch lengths of a clocked rooted triplet with ingroup split at `split`
/// and root at `root`: `[tip0, tip1, internal, outgroup]`. With a fossil
/// fraction `γ`, the first ingroup tip is shortened to `γ·split`.
pub fn clocked_triplet_branches(split: f64, root: f64, fossil_fraction: Option<f64>) -> Result<[f64; 4], PhyloError> {
    if !(split >= 0.0 && split <= root && root.is_finite()) {
        return Err(PhyloError::Domain(format!(
            "need 0 <= split <= root, got split {split}, root {root}"
        )));
    }
    let gamma = fossil_fraction.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&gamma) {
        return Err(PhyloError::Domain(format!("fossil fraction {gamma} outside [0, 1]")));
    }
    Ok([gamma * split, split, root - split, root])
}

/// Site likelihood of a rooted triplet; taxa 0 and 1 are the ingroup, taxon 2 the outgroup.
pub fn clocked_triplet_site_likelihood<S: Scalar>(
    model: &SubstModel,
    pattern: &[Nucleotide],
    branches: [S; 4],
) -> S {
    let mats = branches.map(|t| transition_matrix(model, t));
    rooted_likelihood(&stationary(model), &mats, pattern)
}

/// Sum of site likelihoods over all `4^n_taxa` patterns: a star triplet for
/// three taxa (3 branches), the `12|34` quartet for four (5 branches).
pub fn pattern_likelihood_normalization(model: &SubstModel, branches: &[f64], n_taxa: usize) -> f64 {
    let mut total = 0.0;
    let mut pattern = vec![Nucleotide::T; n_taxa];
    for code in 0..4usize.pow(n_taxa as u32) {
        for (k, p) in pattern.iter_mut().enumerate() {
            *p = Nucleotide::from_index((code >> (2 * k)) & 3);
        }
        total += match n_taxa {
            3 => triplet_site_likelihood(model, &pattern, [branches[0], branches[1], branches[2]]),
            4 => quartet_site_likelihood(
                model,
                &pattern,
                QuartetTopology::T12_34,
                [branches[0], branches[1], branches[2], branches[3], branches[4]],
            ),
            _ => panic!("only 3 or 4 taxa are supported, got {n_taxa}"),
        };
    }
    total
}
