use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use mrs_core::phylo::{dataset_log_scale, dataset_log_shape, DomainBounds, ModelKind, SubstModel, TreeClass};
use mrs_core::sampler::{build_partition, RefineBudget, RejectionSampler, RunReport, SampleRun, SamplerError};
use mrs_core::RigorPolicy;
use serde::Serialize;

use crate::fmt_f64;
use crate::patterns::load_patterns;

/// Piece cap when refining toward a target acceptance bound.
pub const MAX_BOXES_FOR_ACCEPT: usize = 1 << 20;
/// Transition/transversion rate ratio used when HKY is chosen without one.
pub const DEFAULT_KAPPA: f64 = 2.0;

#[derive(Clone, Debug, Serialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Base frequencies in t, c, a, g order; uniform when absent.
    pub freqs: Option<[f64; 4]>,
    /// Rate ratio of transitions to transversions.
    pub kappa: Option<f64>,
    /// Expected transition/transversion count ratio, an alternative to `kappa`.
    pub tstv: Option<f64>,
}

impl ModelConfig {
    pub fn jc() -> Self {
        ModelConfig {
            kind: ModelKind::Jc,
            freqs: None,
            kappa: None,
            tstv: None,
        }
    }

    pub fn build(&self) -> Result<SubstModel> {
        match self.kind {
            ModelKind::Jc => {
                if self.freqs.is_some() || self.kappa.is_some() || self.tstv.is_some() {
                    log::warn!("JC ignores --freqs, --kappa and --tstv");
                }
                Ok(SubstModel::jc())
            }
            ModelKind::Hky => {
                let freqs = self.freqs.unwrap_or([0.25; 4]);
                let model = match (self.kappa, self.tstv) {
                    (Some(_), Some(_)) => bail!("give either --kappa or --tstv, not both"),
                    (None, Some(r)) => SubstModel::hky_from_tstv(freqs, r)?,
                    (k, None) => SubstModel::hky(freqs, k.unwrap_or(DEFAULT_KAPPA))?,
                };
                Ok(model)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Boxes(usize),
    TargetAccept(f64),
}

impl Budget {
    fn refine_budget(self) -> Result<RefineBudget> {
        match self {
            Budget::Boxes(0) => bail!("--boxes must be at least 1"),
            Budget::Boxes(n) => Ok(RefineBudget::pieces(n)),
            Budget::TargetAccept(a) if (0.0..1.0).contains(&a) => Ok(RefineBudget::accept(a, MAX_BOXES_FOR_ACCEPT)),
            Budget::TargetAccept(a) => bail!("--target-accept must lie in [0, 1), got {a}"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleConfig {
    pub model: ModelConfig,
    pub tree: TreeClass,
    pub data: PathBuf,
    pub samples: usize,
    pub seed: u64,
    pub domain: DomainBounds,
    pub budget: Budget,
    pub trials_max: u64,
    pub rigor: RigorPolicy,
    pub out: PathBuf,
    pub report: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct DataSummary {
    pub taxa: Vec<String>,
    pub patterns: usize,
    pub total_sites: u64,
}

/// Contents of the JSON report.
#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    /// `complete` or `trials_exhausted`.
    pub status: &'static str,
    pub requested_samples: usize,
    #[serde(flatten)]
    pub run: RunReport,
    /// The shape is the likelihood divided by `exp(log_scale)`.
    pub log_scale: f64,
    pub partition_seconds: f64,
    pub sampling_seconds: f64,
    pub wall_time_seconds: f64,
    pub data: DataSummary,
    pub config: SampleConfig,
}

#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub run: SampleRun,
    pub report: SampleReport,
}

impl SampleOutcome {
    pub fn exhausted(&self) -> bool {
        self.report.status == "trials_exhausted"
    }
}

/// Builds the posterior target, refines the partition, samples, and writes the CSV and report.
///
/// A run stopped by the trial cap still writes both files and returns `Ok`;
/// check [`SampleOutcome::exhausted`].
pub fn run_sample(cfg: &SampleConfig) -> Result<SampleOutcome> {
    if cfg.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let start = Instant::now();
    let data = load_patterns(&cfg.data)?;
    let model = cfg.model.build()?;
    let budget = cfg.budget.refine_budget()?;
    if cfg.rigor == RigorPolicy::Fast {
        log::warn!("tree likelihoods are always enclosed with outward rounding; --rigor fast has no effect here");
    }
    let target = dataset_log_shape(&data, cfg.tree, model, cfg.domain)?;
    let log_scale = dataset_log_scale(&data, cfg.tree, model, cfg.domain)?;

    let partition = build_partition(&target, budget)?;
    let partition_seconds = start.elapsed().as_secs_f64();
    log::info!(
        "{} boxes, acceptance bound {:.4}, built in {partition_seconds:.2}s",
        partition.len(),
        partition.acceptance_lower_bound()
    );

    let sampler = RejectionSampler::new(&target, &partition)?;
    let (run, status) = match sampler.sample(cfg.samples, cfg.seed, cfg.trials_max) {
        Ok(run) => (run, "complete"),
        Err(SamplerError::TrialsExhausted(run)) => {
            log::warn!(
                "trial cap {} reached after {} of {} samples",
                cfg.trials_max,
                run.samples.len(),
                cfg.samples
            );
            (*run, "trials_exhausted")
        }
        Err(e) => return Err(e.into()),
    };
    let wall = start.elapsed().as_secs_f64();

    write_samples(&cfg.out, cfg.tree, &run)?;
    let report = SampleReport {
        status,
        requested_samples: cfg.samples,
        run: run.report.clone(),
        log_scale,
        partition_seconds,
        sampling_seconds: wall - partition_seconds,
        wall_time_seconds: wall,
        data: DataSummary {
            taxa: data.taxa().to_vec(),
            patterns: data.patterns().len(),
            total_sites: data.total_sites(),
        },
        config: cfg.clone(),
    };
    let json = serde_json::to_string_pretty(&report)?;
    fs::write(&cfg.report, json + "\n").with_context(|| format!("writing {}", cfg.report.display()))?;
    Ok(SampleOutcome { run, report })
}

/// One row per sample: topology label, output coordinates, trials.
fn write_samples(path: &Path, class: TreeClass, run: &SampleRun) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec!["topology"];
    header.extend_from_slice(class.output_columns());
    header.push("trials");
    w.write_record(&header)?;
    for s in &run.samples {
        let mut row = vec![s.label.clone()];
        row.extend(class.to_output(&s.theta).into_iter().map(fmt_f64));
        row.push(s.trials.to_string());
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| anyhow::anyhow!("flushing {}: {}", path.display(), e.error()))?
        .flush()?;
    Ok(())
}
