//! Subcommands of the `mrs` binary as plain functions, so tests can drive
//! them without spawning a process.

pub mod demo;
pub mod patterns;
pub mod quantiles;
pub mod sample;

pub use demo::{parse_budgets, run_demo, DemoConfig, DemoOutcome, DemoRow, DemoTarget};
pub use patterns::{load_patterns, run_patterns};
pub use quantiles::{quantile_type7, run_quantiles, QuantileReport, QuantileRow, Transform};
pub use sample::{run_sample, Budget, ModelConfig, SampleConfig, SampleOutcome, SampleReport};

/// Exit status when the trial cap stopped a run early.
pub const EXIT_TRIALS_EXHAUSTED: u8 = 3;
/// Exit status when no enclosure could be computed on part of the domain.
pub const EXIT_ENCLOSURE_FAILURE: u8 = 4;

/// Shortest decimal that reads back to the same `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
