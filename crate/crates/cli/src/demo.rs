use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use mrs_core::expr::parse_expr;
use mrs_core::interval::{Interval, IntervalBox};
use mrs_core::sampler::{
    build_partition, DagShape, Partition, RefineBudget, RejectionSampler, SampleRun, SamplerError, TargetShape,
};
use serde::Serialize;

use crate::fmt_f64;

/// Built-in one-dimensional targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoTarget {
    /// `60 - Σ_{k=1..5} k·x·sin(k(x - 3)/3)` on `[-10, 6]`. The sum ranges
    /// over about `[-28.5, 55.6]` there, so the shift keeps the shape positive.
    Fig2,
}

impl DemoTarget {
    pub const FIG2_SHIFT: f64 = 60.0;

    pub fn domain(self) -> (f64, f64) {
        match self {
            DemoTarget::Fig2 => (-10.0, 6.0),
        }
    }

    /// The unshifted sum `-Σ k·x·sin(k(x - 3)/3)`.
    pub fn fig2_expression() -> String {
        let terms: Vec<String> = (1..=5).map(|k| format!("{k}*x0*sin({k}*(x0-3)/3)")).collect();
        format!("0 - ({})", terms.join(" + "))
    }

    pub fn expression(self) -> String {
        match self {
            DemoTarget::Fig2 => format!("{} + {}", Self::FIG2_SHIFT, Self::fig2_expression()),
        }
    }

    /// Real value of the shape at `x`.
    pub fn density(self, x: f64) -> f64 {
        match self {
            DemoTarget::Fig2 => {
                Self::FIG2_SHIFT
                    - (1..=5)
                        .map(|k| {
                            let k = k as f64;
                            k * x * (k * (x - 3.0) / 3.0).sin()
                        })
                        .sum::<f64>()
            }
        }
    }

    pub fn target(self) -> Result<TargetShape> {
        let dag = parse_expr(&self.expression())?.with_arity(1);
        let (lo, hi) = self.domain();
        let domain = IntervalBox::from_bounds(&[(lo, hi)])?;
        Ok(TargetShape::single("fig2", domain, Arc::new(DagShape::new(dag)))?)
    }
}

impl FromStr for DemoTarget {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(DemoTarget::Fig2),
            _ => bail!("unknown demo target `{s}` (known: fig2)"),
        }
    }
}

/// `"8..4096"` (powers of two from 8 to 4096), `"1,4,16"`, or a single count.
pub fn parse_budgets(spec: &str) -> Result<Vec<usize>> {
    let budgets: Vec<usize> = if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if !a.is_power_of_two() || !b.is_power_of_two() || a > b {
            bail!("range `{spec}` needs powers of two with start <= end");
        }
        std::iter::successors(Some(a), |w| Some(w * 2)).take_while(|&w| w <= b).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad budget `{s}`")))
            .collect::<Result<_>>()?
    };
    if budgets.is_empty() || budgets.contains(&0) {
        bail!("budgets must be positive, got `{spec}`");
    }
    Ok(budgets)
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoConfig {
    pub target: DemoTarget,
    pub budgets: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub trials_max: u64,
    /// Samples CSV (`x,trials`).
    pub out: Option<PathBuf>,
    /// Convergence table TSV.
    pub table: Option<PathBuf>,
}

/// Envelope quality for one partition size.
#[derive(Clone, Debug, Serialize)]
pub struct DemoRow {
    pub boxes: usize,
    /// Partition into `boxes` equal intervals.
    pub uniform_np: Interval,
    pub uniform_accept_bound: f64,
    /// Priority-queue refinement to `boxes` pieces.
    pub adaptive_np: Interval,
    pub adaptive_accept_bound: f64,
}

#[derive(Clone, Debug)]
pub struct DemoOutcome {
    pub rows: Vec<DemoRow>,
    /// Least-squares slope of `ln(1 - bound)` against `ln W` over the uniform rows.
    pub uniform_slope: Option<f64>,
    /// Draws from the adaptive partition of the largest budget.
    pub run: Option<SampleRun>,
}

impl DemoOutcome {
    pub fn table_tsv(&self) -> String {
        let mut out =
            String::from("boxes\tuniform_np_lo\tuniform_np_hi\tuniform_accept_bound\tadaptive_np_lo\tadaptive_np_hi\tadaptive_accept_bound\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                r.boxes,
                fmt_f64(r.uniform_np.lo()),
                fmt_f64(r.uniform_np.hi()),
                fmt_f64(r.uniform_accept_bound),
                fmt_f64(r.adaptive_np.lo()),
                fmt_f64(r.adaptive_np.hi()),
                fmt_f64(r.adaptive_accept_bound),
            ));
        }
        out
    }
}

/// Least-squares slope of `y` on `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn run_demo(cfg: &DemoConfig) -> Result<DemoOutcome> {
    if cfg.budgets.is_empty() {
        bail!("no budgets given");
    }
    let target = cfg.target.target()?;
    let mut rows = Vec::with_capacity(cfg.budgets.len());
    let mut largest: Option<Partition> = None;
    let max_budget = *cfg.budgets.iter().max().unwrap();
    for &w in &cfg.budgets {
        let uniform = Partition::uniform(&target, w)?;
        let adaptive = build_partition(&target, RefineBudget::pieces(w))?;
        rows.push(DemoRow {
            boxes: w,
            uniform_np: uniform.np_enclosure(),
            uniform_accept_bound: uniform.acceptance_lower_bound(),
            adaptive_np: adaptive.np_enclosure(),
            adaptive_accept_bound: adaptive.acceptance_lower_bound(),
        });
        if w == max_budget {
            largest = Some(adaptive);
        }
    }
    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.uniform_accept_bound < 1.0)
        .map(|r| ((r.boxes as f64).ln(), (1.0 - r.uniform_accept_bound).ln()))
        .collect();
    let uniform_slope = (fit.len() >= 2).then(|| {
        let (x, y): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
        ls_slope(&x, &y)
    });

    let run = if cfg.samples > 0 {
        let partition = largest.expect("largest budget partition");
        let sampler = RejectionSampler::new(&target, &partition)?;
        let run = match sampler.sample(cfg.samples, cfg.seed, cfg.trials_max) {
            Ok(run) => run,
            Err(SamplerError::TrialsExhausted(run)) => {
                log::warn!("trial cap reached after {} samples", run.samples.len());
                *run
            }
            Err(e) => return Err(e.into()),
        };
        Some(run)
    } else {
        None
    };

    let outcome = DemoOutcome {
        rows,
        uniform_slope,
        run,
    };
    if let Some(path) = &cfg.table {
        fs::write(path, outcome.table_tsv()).with_context(|| format!("writing {}", path.display()))?;
    }
    if let (Some(path), Some(run)) = (&cfg.out, &outcome.run) {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "x,trials")?;
        for s in &run.samples {
            writeln!(w, "{},{}", fmt_f64(s.theta[0]), s.trials)?;
        }
        w.flush()?;
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_ranges() {
        assert_eq!(parse_budgets("8..64").unwrap(), vec![8, 16, 32, 64]);
        assert_eq!(parse_budgets("1,3").unwrap(), vec![1, 3]);
        assert_eq!(parse_budgets("5").unwrap(), vec![5]);
        assert!(parse_budgets("3..8").is_err());
        assert!(parse_budgets("0").is_err());
    }

    #[test]
    fn fig2_vanishes_at_three_before_shift() {
        let dag = parse_expr(&DemoTarget::fig2_expression()).unwrap().with_arity(1);
        assert_eq!(dag.eval_real(&[3.0]).unwrap(), 0.0);
        assert_eq!(DemoTarget::Fig2.density(3.0), DemoTarget::FIG2_SHIFT);
    }

    #[test]
    fn slope_of_a_line() {
        assert!((ls_slope(&[0.0, 1.0, 2.0], &[1.0, -1.0, -3.0]) + 2.0).abs() < 1e-15);
    }
}
