//! Nucleotide substitution models and tree likelihoods as sampler targets.
//!
//! Nucleotides are indexed in the order `t, c, a, g`. Branch lengths are in
//! expected substitutions per site for both models.

mod data;
mod likelihood;
mod model;
mod scalar;
mod shape;
mod transform;

use thiserror::Error;

pub use data::{Nucleotide, SitePattern, SitePatternData};
pub use likelihood::{
    clocked_triplet_branches, clocked_triplet_site_likelihood, pattern_likelihood_normalization,
    quartet_site_likelihood, triplet_site_likelihood, QuartetTopology,
};
pub use model::{hky_transition, jc_transition, transition_matrix, ModelKind, SubstModel, TransitionMatrix};
pub use scalar::Scalar;
pub use shape::{dataset_log_scale, dataset_log_shape, DomainBounds, TreeClass, TreeShape};
pub use transform::{divergence_ratio, fossil_date, midpoint_root_ratio};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhyloError {
    #[error("invalid nucleotide `{found}` at line {line}, column {column}")]
    InvalidNucleotide { found: char, line: usize, column: usize },
    #[error("sequences have unequal lengths: `{name}` has {got}, expected {expected}")]
    UnequalLengths { name: String, expected: usize, got: usize },
    #[error("expected {expected} taxa, found {got}")]
    TaxaCount { expected: String, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("pattern `{0}` listed twice")]
    DuplicatePattern(String),
    #[error("{0}")]
    Domain(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}
