//! The Moore rejection sampler.
//!
//! A [`TargetShape`] is partitioned into boxes by [`build_partition`]; the
//! upper enclosure bounds over those boxes give a step envelope, an
//! [`AliasTable`] over the box masses gives the proposal, and
//! [`RejectionSampler`] runs the accept/reject loop.

mod alias;
mod exact;
mod partition;
mod rejection;
mod target;

use thiserror::Error;

use crate::error::EvalError;
use crate::interval::IntervalBox;

pub use alias::AliasTable;
pub use partition::{build_partition, Partition, PartitionPiece, RefineBudget, DEFAULT_SPLIT_RETRIES};
pub use rejection::{rejection_sample, RejectionSampler, RunReport, SampleRecord, SampleRun, DEFAULT_TRIALS_MAX};
pub use target::{DagShape, Shape, TargetPiece, TargetShape};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("no interval enclosure for piece `{label}` on {domain:?}: {source}")]
    EnclosureFailure {
        label: String,
        domain: IntervalBox,
        source: EvalError,
    },
    #[error("point {point:?} lies outside every piece labelled `{label}`")]
    OutOfDomain { label: String, point: Vec<f64> },
    #[error("the envelope has zero mass")]
    DegenerateProposal,
    #[error(
        "trial limit reached after {} of the requested samples",
        .0.samples.len()
    )]
    TrialsExhausted(Box<SampleRun>),
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
