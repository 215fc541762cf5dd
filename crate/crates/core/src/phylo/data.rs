use std::collections::BTreeMap;
use std::fmt;

use super::PhyloError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Nucleotide {
    T = 0,
    C = 1,
    A = 2,
    G = 3,
}

impl Nucleotide {
    pub const ALL: [Nucleotide; 4] = [Nucleotide::T, Nucleotide::C, Nucleotide::A, Nucleotide::G];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Nucleotide {
        Self::ALL[i]
    }

    /// Case-insensitive `a`, `c`, `g`, `t`; ambiguity codes and gaps are rejected.
    pub fn from_char(c: char) -> Option<Nucleotide> {
        match c.to_ascii_lowercase() {
            't' => Some(Nucleotide::T),
            'c' => Some(Nucleotide::C),
            'a' => Some(Nucleotide::A),
            'g' => Some(Nucleotide::G),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Nucleotide::T => 't',
            Nucleotide::C => 'c',
            Nucleotide::A => 'a',
            Nucleotide::G => 'g',
        }
    }

    pub fn is_purine(self) -> bool {
        matches!(self, Nucleotide::A | Nucleotide::G)
    }
}

/// One alignment column, one nucleotide per taxon.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SitePattern(pub Vec<Nucleotide>);

impl SitePattern {
    pub fn parse(s: &str) -> Option<SitePattern> {
        s.chars().map(Nucleotide::from_char).collect::<Option<Vec<_>>>().map(SitePattern)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> &[Nucleotide] {
        &self.0
    }
}

impl fmt::Display for SitePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|n| write!(f, "{}", n.to_char()))
    }
}

/// Distinct site patterns and their counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SitePatternData {
    taxa: Vec<String>,
    patterns: Vec<(SitePattern, u64)>,
}

impl SitePatternData {
    pub fn new(taxa: Vec<String>, patterns: Vec<(SitePattern, u64)>) -> Result<Self, PhyloError> {
        let mut seen = std::collections::HashSet::new();
        for (i, (p, count)) in patterns.iter().enumerate() {
            if p.len() != taxa.len() {
                return Err(PhyloError::Parse {
                    line: i + 2,
                    message: format!("pattern `{p}` has {} states for {} taxa", p.len(), taxa.len()),
                });
            }
            if *count == 0 {
                return Err(PhyloError::Parse {
                    line: i + 2,
                    message: format!("pattern `{p}` has count 0"),
                });
            }
            if !seen.insert(p.clone()) {
                return Err(PhyloError::DuplicatePattern(p.to_string()));
            }
        }
        Ok(SitePatternData { taxa, patterns })
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn patterns(&self) -> &[(SitePattern, u64)] {
        &self.patterns
    }

    pub fn total_sites(&self) -> u64 {
        self.patterns.iter().map(|(_, c)| c).sum()
    }

    /// Counts the distinct columns of an alignment; rows are sorted by pattern string.
    pub fn from_alignment(taxa: Vec<String>, sequences: &[String]) -> Result<Self, PhyloError> {
        let len = sequences.first().map_or(0, |s| s.chars().count());
        let mut rows = Vec::with_capacity(sequences.len());
        for (i, (name, seq)) in taxa.iter().zip(sequences).enumerate() {
            let states = seq
                .chars()
                .enumerate()
                .map(|(col, c)| {
                    Nucleotide::from_char(c).ok_or(PhyloError::InvalidNucleotide {
                        found: c,
                        line: i + 1,
                        column: col + 1,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if states.len() != len {
                return Err(PhyloError::UnequalLengths {
                    name: name.clone(),
                    expected: len,
                    got: states.len(),
                });
            }
            rows.push(states);
        }
        let mut counts: BTreeMap<String, (SitePattern, u64)> = BTreeMap::new();
        for col in 0..len {
            let p = SitePattern(rows.iter().map(|r| r[col]).collect());
            counts.entry(p.to_string()).or_insert((p, 0)).1 += 1;
        }
        Self::new(taxa, counts.into_values().collect())
    }

    /// Parses FASTA text. Sequence lines are concatenated; whitespace is ignored.
    pub fn from_fasta(text: &str) -> Result<Self, PhyloError> {
        let mut taxa = Vec::new();
        let mut seqs: Vec<String> = Vec::new();
        let mut line_of = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('>') {
                let name = header.split_whitespace().next().unwrap_or("").to_string();
                if name.is_empty() {
                    return Err(PhyloError::Parse {
                        line: i + 1,
                        message: "empty sequence name".into(),
                    });
                }
                taxa.push(name);
                seqs.push(String::new());
                line_of.push(i + 1);
            } else {
                let Some(seq) = seqs.last_mut() else {
                    return Err(PhyloError::Parse {
                        line: i + 1,
                        message: "sequence data before the first `>` header".into(),
                    });
                };
                if let Some((col, c)) = line
                    .chars()
                    .enumerate()
                    .find(|(_, c)| !c.is_whitespace() && Nucleotide::from_char(*c).is_none())
                {
                    return Err(PhyloError::InvalidNucleotide {
                        found: c,
                        line: i + 1,
                        column: col + 1,
                    });
                }
                seq.extend(line.chars().filter(|c| !c.is_whitespace()));
            }
        }
        if !(3..=4).contains(&taxa.len()) {
            return Err(PhyloError::TaxaCount {
                expected: "3 or 4".into(),
                got: taxa.len(),
            });
        }
        Self::from_alignment(taxa, &seqs)
    }

    /// Pattern file: `#taxa:<names>` then `<pattern>\t<count>` rows. Later lines
    /// starting with `#` and blank lines are skipped.
    pub fn parse_tsv(text: &str) -> Result<Self, PhyloError> {
        let mut lines = text.lines().enumerate();
        let taxa: Vec<String> = loop {
            match lines.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((i, l)) => {
                    let names = l.trim().strip_prefix("#taxa:").ok_or(PhyloError::Parse {
                        line: i + 1,
                        message: "expected a `#taxa:` header".into(),
                    })?;
                    break names.split(',').map(|s| s.trim().to_string()).collect();
                }
                None => {
                    return Err(PhyloError::Parse {
                        line: 1,
                        message: "empty pattern file".into(),
                    })
                }
            }
        };
        if taxa.iter().any(String::is_empty) {
            return Err(PhyloError::Parse {
                line: 1,
                message: "empty taxon name".into(),
            });
        }
        let mut patterns = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| PhyloError::Parse { line: i + 1, message };
            let (pat, count) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_err("expected `<pattern>\\t<count>`".into()))?;
            let pattern = SitePattern::parse(pat.trim())
                .ok_or_else(|| parse_err(format!("invalid pattern `{pat}`")))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("invalid count `{}`", count.trim())))?;
            patterns.push((pattern, count));
        }
        Self::new(taxa, patterns)
    }

    /// Writes the pattern file with rows sorted lexicographically.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(String, u64)> = self.patterns.iter().map(|(p, c)| (p.to_string(), *c)).collect();
        rows.sort();
        let mut out = format!("#taxa:{}\n", self.taxa.join(","));
        for (p, c) in rows {
            out.push_str(&format!("{p}\t{c}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sequences_give_one_row() {
        let fasta = ">a\naaaaaaaaaa\n>b\naaaaa\naaaaa\n>c\nAAAAAAAAAA\n";
        let d = SitePatternData::from_fasta(fasta).unwrap();
        assert_eq!(d.to_tsv(), "#taxa:a,b,c\naaa\t10\n");
    }

    #[test]
    fn two_columns_two_rows() {
        let d = SitePatternData::from_fasta(">x\nacac\n>y\nacac\n>z\nagag\n").unwrap();
        assert_eq!(d.patterns().len(), 2);
        assert_eq!(d.total_sites(), 4);
        assert_eq!(d.to_tsv(), "#taxa:x,y,z\naaa\t2\nccg\t2\n");
    }

    #[test]
    fn tsv_round_trip() {
        let d = SitePatternData::from_fasta(">x\nacgtt\n>y\nacgta\n>z\nagttt\n>w\ntttta\n").unwrap();
        assert_eq!(SitePatternData::parse_tsv(&d.to_tsv()).unwrap(), d);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            SitePatternData::from_fasta(">x\nacn\n>y\naca\n>z\naca\n"),
            Err(PhyloError::InvalidNucleotide { found: 'n', .. })
        ));
        assert!(matches!(
            SitePatternData::from_fasta(">x\nac\n>y\naca\n>z\naca\n"),
            Err(PhyloError::UnequalLengths { .. })
        ));
        assert!(matches!(
            SitePatternData::from_fasta(">x\nac\n>y\nac\n"),
            Err(PhyloError::TaxaCount { .. })
        ));
        assert!(SitePatternData::parse_tsv("#taxa:a,b,c\naaa\t1\naaa\t2\n").is_err());
        assert!(SitePatternData::parse_tsv("#taxa:a,b,c\naa\t1\n").is_err());
        assert!(SitePatternData::parse_tsv("aaa\t1\n").is_err());
    }

    #[test]
    fn comments_after_header_are_skipped() {
        let d = SitePatternData::parse_tsv("#taxa:a,b,c\n# reconstructed\naaa\t3\n\nacg 1\n").unwrap();
        assert_eq!(d.total_sites(), 4);
    }
}
