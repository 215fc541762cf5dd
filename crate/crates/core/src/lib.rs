//! Auto-validating rejection sampling.
//!
//! Interval arithmetic encloses the range of an unnormalised target density
//! over every box of an adaptive partition. The upper bounds form a step
//! envelope that provably dominates the target, so von Neumann rejection
//! against it yields exact independent draws. The lower bounds bracket the
//! normalising constant and bound the acceptance probability from below.
//!
//! * [`interval`]: outward-rounded interval and box arithmetic.
//! * [`expr`]: elementary functions as DAGs with real and interval evaluation.
//! * [`sampler`]: partition refinement, alias-table proposal, the rejection loop.
//! * [`phylo`]: Jukes-Cantor and HKY tree likelihoods as target shapes.

pub mod error;
pub mod expr;
pub mod interval;
pub mod phylo;
pub mod sampler;

pub use error::EvalError;
pub use interval::{Interval, IntervalBox, IntervalError, RigorPolicy, StdFn};
