use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use mrs_core::phylo::SitePatternData;

/// Reads a pattern TSV, or an aligned FASTA if the file starts with `>`.
pub fn load_patterns(path: &Path) -> Result<SitePatternData> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let data = if text.trim_start().starts_with('>') {
        SitePatternData::from_fasta(&text)
    } else {
        SitePatternData::parse_tsv(&text)
    };
    data.with_context(|| format!("parsing {}", path.display()))
}

/// Counts the distinct columns of an aligned FASTA file and writes them as a pattern TSV.
pub fn run_patterns(fasta: &Path, out: &Path) -> Result<SitePatternData> {
    let text = fs::read_to_string(fasta).with_context(|| format!("reading {}", fasta.display()))?;
    let data = SitePatternData::from_fasta(&text).with_context(|| format!("parsing {}", fasta.display()))?;
    fs::write(out, data.to_tsv()).with_context(|| format!("writing {}", out.display()))?;
    log::info!(
        "{} taxa, {} sites, {} distinct patterns",
        data.taxa().len(),
        data.total_sites(),
        data.patterns().len()
    );
    Ok(data)
}
