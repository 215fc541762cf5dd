use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::interval::Interval;

use super::alias::AliasTable;
use super::partition::Partition;
use super::target::TargetShape;
use super::SamplerError;

/// Proposals allowed per sample before giving up.
pub const DEFAULT_TRIALS_MAX: u64 = 1_000_000;

/// One accepted draw.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRecord {
    pub label: String,
    /// Index of the target piece.
    pub target: usize,
    pub theta: Vec<f64>,
    /// Proposals consumed, including the accepted one.
    pub trials: u64,
    /// Proposals whose accept test could not be decided.
    pub indeterminate: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub np_enclosure: Interval,
    /// Σ upper_mass: the integral of the envelope.
    pub envelope_integral: f64,
    pub pieces: usize,
    pub samples: usize,
    pub total_trials: u64,
    /// samples / total_trials.
    pub accept_rate: f64,
    pub accept_lower_bound: f64,
    pub indeterminate: u64,
    pub seed: Option<u64>,
    pub rng: &'static str,
    /// Uniform variates consumed.
    pub rng_draws: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRun {
    pub samples: Vec<SampleRecord>,
    pub report: RunReport,
}

/// Uniform source that counts the variates it hands out.
struct Uniforms<'r, R: ?Sized> {
    rng: &'r mut R,
    draws: u64,
}

impl<R: Rng + ?Sized> Uniforms<'_, R> {
    fn next(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random()
    }
}

/// Proposal and accept/reject loop over a finished partition.
#[derive(Debug)]
pub struct RejectionSampler<'a> {
    target: &'a TargetShape,
    partition: &'a Partition,
    alias: AliasTable,
    /// Alias index to partition piece id.
    piece_ids: Vec<usize>,
}

impl<'a> RejectionSampler<'a> {
    pub fn new(target: &'a TargetShape, partition: &'a Partition) -> Result<Self, SamplerError> {
        let (piece_ids, masses): (Vec<usize>, Vec<f64>) =
            partition.pieces().map(|p| (p.id, p.upper_mass)).unzip();
        let alias = AliasTable::new(&masses)?;
        Ok(RejectionSampler {
            target,
            partition,
            alias,
            piece_ids,
        })
    }

    pub fn alias(&self) -> &AliasTable {
        &self.alias
    }

    /// Draws a piece with probability proportional to its upper mass and a
    /// point uniform in its box. Returns the piece id and the point.
    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, Vec<f64>) {
        let mut u = Uniforms { rng, draws: 0 };
        self.propose_counted(&mut u)
    }

    fn propose_counted<R: Rng + ?Sized>(&self, u: &mut Uniforms<'_, R>) -> (usize, Vec<f64>) {
        let (a, b) = (u.next(), u.next());
        let id = self.piece_ids[self.alias.draw_with(a, b)];
        let theta = self
            .partition
            .piece(id)
            .bbox
            .sides()
            .iter()
            .map(|s| (s.lo() + u.next() * (s.hi() - s.lo())).clamp(s.lo(), s.hi()))
            .collect();
        (id, theta)
    }

    /// `n` samples from a ChaCha20 stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64, trials_max: u64) -> Result<SampleRun, SamplerError> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng, Some(seed), trials_max)
    }

    pub fn sample_with<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        seed: Option<u64>,
        trials_max: u64,
    ) -> Result<SampleRun, SamplerError> {
        let mut u = Uniforms { rng, draws: 0 };
        let mut samples = Vec::with_capacity(n);
        let (mut total_trials, mut total_indeterminate) = (0u64, 0u64);
        let mut exhausted = false;

        'outer: for _ in 0..n {
            let (mut trials, mut indeterminate) = (0u64, 0u64);
            loop {
                if trials >= trials_max {
                    exhausted = true;
                    break 'outer;
                }
                trials += 1;
                total_trials += 1;
                let (id, theta) = self.propose_counted(&mut u);
                let piece = self.partition.piece(id);
                let height = u.next() * piece.enclosure.hi();
                let exact = self.target.piece(piece.target).shape.eval_thin(&theta)?;
                debug_assert!(exact.hi() <= piece.enclosure.hi());
                if height <= exact.lo() {
                    samples.push(SampleRecord {
                        label: self.partition.label(piece.target).to_string(),
                        target: piece.target,
                        theta,
                        trials,
                        indeterminate,
                    });
                    break;
                }
                if height <= exact.hi() {
                    indeterminate += 1;
                    total_indeterminate += 1;
                }
            }
        }

        let report = RunReport {
            np_enclosure: self.partition.np_enclosure(),
            envelope_integral: self.partition.np_enclosure().hi(),
            pieces: self.partition.len(),
            samples: samples.len(),
            total_trials,
            accept_rate: if total_trials > 0 {
                samples.len() as f64 / total_trials as f64
            } else {
                0.0
            },
            accept_lower_bound: self.partition.acceptance_lower_bound(),
            indeterminate: total_indeterminate,
            seed,
            rng: "chacha20",
            rng_draws: u.draws,
        };
        let run = SampleRun { samples, report };
        if exhausted {
            Err(SamplerError::TrialsExhausted(Box::new(run)))
        } else {
            Ok(run)
        }
    }
}

/// Builds the proposal for `partition` and draws `n` samples.
pub fn rejection_sample(
    target: &TargetShape,
    partition: &Partition,
    n: usize,
    seed: u64,
    trials_max: u64,
) -> Result<SampleRun, SamplerError> {
    RejectionSampler::new(target, partition)?.sample(n, seed, trials_max)
}
