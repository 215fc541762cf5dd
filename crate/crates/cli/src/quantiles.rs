use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use mrs_core::phylo::{divergence_ratio, fossil_date, TreeClass};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// Ingroup split time over root time; midpoint rooting for unrooted
    /// triplets. The fossil class also yields the fossil date.
    DivergenceRatio,
}

impl FromStr for Transform {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "divergence-ratio" => Ok(Transform::DivergenceRatio),
            _ => bail!("unknown transform `{s}` (known: divergence-ratio)"),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::DivergenceRatio => f.write_str("divergence-ratio"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantileRow {
    pub quantity: String,
    pub n: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantileReport {
    pub probabilities: Vec<f64>,
    pub transform: Option<Transform>,
    pub rows: Vec<QuantileRow>,
}

impl QuantileReport {
    pub fn row(&self, quantity: &str) -> Option<&QuantileRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    /// Tab-separated table with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("quantity\tn");
        for p in &self.probabilities {
            out.push_str(&format!("\tq{p}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{}\t{}", r.quantity, r.n));
            for v in &r.values {
                out.push_str(&format!("\t{v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Empirical quantile of sorted data with linear interpolation between order
/// statistics: `h = (n - 1)·p`, `x[⌊h⌋] + (h - ⌊h⌋)·(x[⌊h⌋ + 1] - x[⌊h⌋])`.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(quantity: &str, mut values: Vec<f64>, probabilities: &[f64]) -> QuantileRow {
    values.sort_by(f64::total_cmp);
    QuantileRow {
        quantity: quantity.to_string(),
        n: values.len(),
        values: probabilities.iter().map(|&p| quantile_type7(&values, p)).collect(),
    }
}

/// Quantiles of every coordinate column of a samples CSV, or of the
/// transformed quantities when `transform` is given.
pub fn run_quantiles(input: &Path, transform: Option<Transform>, probabilities: &[f64]) -> Result<QuantileReport> {
    if probabilities.is_empty() {
        bail!("no quantile probabilities given");
    }
    if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        bail!("quantile probability {p} outside [0, 1]");
    }
    let mut reader = csv::Reader::from_path(input).with_context(|| format!("opening {}", input.display()))?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.len() < 3 || header[0] != "topology" || header[header.len() - 1] != "trials" {
        bail!("{}: expected a `topology,...,trials` header", input.display());
    }
    let columns: Vec<&str> = header[1..header.len() - 1].iter().map(String::as_str).collect();

    let mut table: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = columns
            .iter()
            .enumerate()
            .map(|(k, name)| {
                record[k + 1]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| anyhow!("row {}: bad value `{}` in column {name}", i + 2, &record[k + 1]))
            })
            .collect::<Result<Vec<f64>>>()?;
        table.push(row);
    }
    if table.is_empty() {
        bail!("{} has no samples", input.display());
    }

    let rows = match transform {
        None => columns
            .iter()
            .enumerate()
            .map(|(k, name)| summarize(name, table.iter().map(|r| r[k]).collect(), probabilities))
            .collect(),
        Some(Transform::DivergenceRatio) => {
            let class = TreeClass::from_output_columns(&columns)
                .ok_or_else(|| anyhow!("columns {columns:?} do not match any tree class"))?;
            if class == TreeClass::UnrootedQuartet {
                bail!("the divergence-ratio transform needs triplet samples");
            }
            let mut rows = vec![summarize(
                "divergence_ratio",
                table.iter().filter_map(|r| divergence_ratio(class, r)).collect(),
                probabilities,
            )];
            if class == TreeClass::ClockedTripletFossil {
                rows.push(summarize(
                    "fossil_date",
                    table.iter().filter_map(|r| fossil_date(r)).collect(),
                    probabilities,
                ));
            }
            if rows.iter().any(|r| r.n == 0) {
                bail!("no sample has a positive root time");
            }
            rows
        }
    };
    Ok(QuantileReport {
        probabilities: probabilities.to_vec(),
        transform,
        rows,
    })
}
