use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mrs_cli::{
    parse_budgets, run_demo, run_patterns, run_quantiles, run_sample, Budget, DemoConfig, DemoTarget, ModelConfig,
    SampleConfig, Transform, EXIT_ENCLOSURE_FAILURE, EXIT_TRIALS_EXHAUSTED,
};
use mrs_core::phylo::{DomainBounds, ModelKind, TreeClass};
use mrs_core::sampler::{SamplerError, DEFAULT_TRIALS_MAX};
use mrs_core::RigorPolicy;

/// Exact posterior samples from interval-enclosed target densities.
///
/// Log level comes from RUST_LOG (default `info`).
#[derive(Parser)]
#[command(name = "mrs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count the distinct site patterns of an aligned FASTA file.
    Patterns {
        #[arg(long)]
        fasta: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw posterior samples over a small tree space.
    Sample(SampleArgs),
    /// Empirical quantiles (type 7) of a samples file.
    Quantiles {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        transform: Option<TransformArg>,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.5,0.95")]
        q: Vec<f64>,
        /// Also write the table as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Envelope convergence and samples for a built-in 1-D target.
    Demo {
        #[arg(long, default_value = "fig2")]
        target: String,
        /// Partition sizes: `8..4096` (powers of two) or a comma list.
        #[arg(long, default_value = "8..4096")]
        budgets: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS_MAX)]
        trials_max: u64,
        /// Samples CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Convergence table TSV (also printed).
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Jc,
    Hky,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeArg {
    UnrootedTriplet,
    ClockedTriplet,
    ClockedTripletFossil,
    UnrootedQuartet,
}

#[derive(Clone, Copy, ValueEnum)]
enum RigorArg {
    Outward,
    Fast,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    DivergenceRatio,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// HKY base frequencies in t,c,a,g order (default uniform).
    #[arg(long, value_delimiter = ',')]
    freqs: Option<Vec<f64>>,
    /// HKY transition/transversion rate ratio (default 2).
    #[arg(long, conflicts_with = "tstv")]
    kappa: Option<f64>,
    /// HKY expected transition/transversion ratio, instead of --kappa.
    #[arg(long)]
    tstv: Option<f64>,
    #[arg(long, value_enum)]
    tree: TreeArg,
    /// Pattern TSV or aligned FASTA.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    domain_lo: f64,
    #[arg(long, default_value_t = 10.0)]
    domain_hi: f64,
    /// Refine to this many boxes (default 4096).
    #[arg(long, conflicts_with = "target_accept")]
    boxes: Option<usize>,
    /// Refine until the acceptance lower bound reaches this value.
    #[arg(long)]
    target_accept: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TRIALS_MAX)]
    trials_max: u64,
    #[arg(long, value_enum, default_value = "outward")]
    rigor: RigorArg,
    #[arg(long, default_value = "samples.csv")]
    out: PathBuf,
    #[arg(long, default_value = "report.json")]
    report: PathBuf,
}

impl SampleArgs {
    fn into_config(self) -> Result<SampleConfig> {
        let freqs = match self.freqs {
            None => None,
            Some(f) if f.len() == 4 => Some([f[0], f[1], f[2], f[3]]),
            Some(f) => bail!("--freqs needs 4 values, got {}", f.len()),
        };
        Ok(SampleConfig {
            model: ModelConfig {
                kind: match self.model {
                    ModelArg::Jc => ModelKind::Jc,
                    ModelArg::Hky => ModelKind::Hky,
                },
                freqs,
                kappa: self.kappa,
                tstv: self.tstv,
            },
            tree: match self.tree {
                TreeArg::UnrootedTriplet => TreeClass::UnrootedTriplet,
                TreeArg::ClockedTriplet => TreeClass::ClockedTriplet,
                TreeArg::ClockedTripletFossil => TreeClass::ClockedTripletFossil,
                TreeArg::UnrootedQuartet => TreeClass::UnrootedQuartet,
            },
            data: self.data,
            samples: self.samples,
            seed: self.seed,
            domain: DomainBounds::new(self.domain_lo, self.domain_hi)?,
            budget: match self.target_accept {
                Some(a) => Budget::TargetAccept(a),
                None => Budget::Boxes(self.boxes.unwrap_or(4096)),
            },
            trials_max: self.trials_max,
            rigor: match self.rigor {
                RigorArg::Outward => RigorPolicy::Outward,
                RigorArg::Fast => RigorPolicy::Fast,
            },
            out: self.out,
            report: self.report,
        })
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Patterns { fasta, out } => {
            run_patterns(&fasta, &out)?;
        }
        Command::Sample(args) => {
            let cfg = args.into_config()?;
            let outcome = run_sample(&cfg)?;
            let r = &outcome.report.run;
            println!(
                "{} samples, {} trials, accept rate {:.4} (bound {:.4}), N_p in [{:e}, {:e}] x exp({})",
                r.samples,
                r.total_trials,
                r.accept_rate,
                r.accept_lower_bound,
                r.np_enclosure.lo(),
                r.np_enclosure.hi(),
                outcome.report.log_scale
            );
            if outcome.exhausted() {
                return Ok(ExitCode::from(EXIT_TRIALS_EXHAUSTED));
            }
        }
        Command::Quantiles {
            input,
            transform,
            q,
            json,
        } => {
            let transform = transform.map(|TransformArg::DivergenceRatio| Transform::DivergenceRatio);
            let report = run_quantiles(&input, transform, &q)?;
            print!("{}", report.to_tsv());
            if let Some(path) = json {
                std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
            }
        }
        Command::Demo {
            target,
            budgets,
            samples,
            seed,
            trials_max,
            out,
            table,
        } => {
            let cfg = DemoConfig {
                target: target.parse::<DemoTarget>()?,
                budgets: parse_budgets(&budgets)?,
                samples,
                seed,
                trials_max,
                out,
                table,
            };
            let outcome = run_demo(&cfg)?;
            print!("{}", outcome.table_tsv());
            if let Some(s) = outcome.uniform_slope {
                println!("slope of ln(1 - bound) vs ln(boxes), uniform partitions: {s:.3}");
            }
            if let Some(run) = &outcome.run {
                println!(
                    "{} samples, accept rate {:.4}",
                    run.report.samples, run.report.accept_rate
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<SamplerError>() {
                Some(SamplerError::EnclosureFailure { .. }) => ExitCode::from(EXIT_ENCLOSURE_FAILURE),
                Some(SamplerError::TrialsExhausted(_)) => ExitCode::from(EXIT_TRIALS_EXHAUSTED),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
