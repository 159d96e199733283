//! Frequency and polysemy ranking baselines over precomputed tables.
//!
//! Both rest on the same heuristic: more frequent adjectives and adjectives
//! with more senses tend to be milder. Tables are two-column TSV files
//! (`surface<TAB>count`), `#` comment lines allowed.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eval::ScalePrediction;
use crate::scale::{normalize_surface, Scale, ScaleDataset};
use crate::{Error, Result};

fn read_tsv<R: Read, T, F>(input: R, mut parse: F) -> Result<BTreeMap<String, T>>
where
    F: FnMut(&str) -> std::result::Result<T, String>,
{
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .comment(Some(b'#'))
        .quoting(false)
        .flexible(true)
        .from_reader(input);
    let mut out = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 tab-separated columns, found {}", rec.len()),
            });
        }
        let surface = normalize_surface(&rec[0]);
        if surface.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty surface".into(),
            });
        }
        let value = parse(rec[1].trim()).map_err(|message| Error::Parse { line, message })?;
        if out.insert(surface.clone(), value).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("`{surface}` listed twice"),
            });
        }
    }
    Ok(out)
}

/// Corpus occurrence counts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub source: String,
    counts: BTreeMap<String, u64>,
}

impl FrequencyTable {
    pub fn new(source: impl Into<String>, counts: BTreeMap<String, u64>) -> Self {
        FrequencyTable {
            source: source.into(),
            counts: counts
                .into_iter()
                .map(|(s, c)| (normalize_surface(&s), c))
                .collect(),
        }
    }

    pub fn from_reader<R: Read>(source: impl Into<String>, input: R) -> Result<Self> {
        let counts = read_tsv(input, |v| {
            v.parse::<u64>()
                .map_err(|_| format!("`{v}` is not a non-negative integer count"))
        })?;
        Ok(FrequencyTable {
            source: source.into(),
            counts,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(path.display().to_string(), file)
    }

    pub fn get(&self, surface: &str) -> Option<u64> {
        self.counts.get(surface).copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(s, c)| (s.as_str(), *c))
    }
}

/// Sense counts from a lexical inventory; every count is at least 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SenseTable {
    pub source: String,
    counts: BTreeMap<String, u32>,
}

impl SenseTable {
    pub fn new(source: impl Into<String>, counts: BTreeMap<String, u32>) -> Result<Self> {
        if let Some((s, _)) = counts.iter().find(|(_, c)| **c == 0) {
            return Err(Error::Data(format!("sense count of `{s}` must be at least 1")));
        }
        Ok(SenseTable {
            source: source.into(),
            counts: counts
                .into_iter()
                .map(|(s, c)| (normalize_surface(&s), c))
                .collect(),
        })
    }

    pub fn from_reader<R: Read>(source: impl Into<String>, input: R) -> Result<Self> {
        let counts = read_tsv(input, |v| match v.parse::<u32>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("`{v}` is not a positive sense count")),
        })?;
        Ok(SenseTable {
            source: source.into(),
            counts,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(path.display().to_string(), file)
    }

    pub fn get(&self, surface: &str) -> Option<u32> {
        self.counts.get(surface).copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// An adjective absent from a lookup table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingEntry {
    pub scale_id: String,
    pub adjective: String,
}

impl fmt::Display for MissingEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` (scale {}) not in table", self.adjective, self.scale_id)
    }
}

/// Score `-frequency`; missing adjectives score `-0` (rarest, so most
/// intense) and are reported back.
pub fn freq_rank(scale: &Scale, table: &FrequencyTable) -> (ScalePrediction, Vec<MissingEntry>) {
    let mut warnings = Vec::new();
    let scores = scale
        .adjectives()
        .map(|a| {
            let s = match table.get(a.surface()) {
                Some(c) => -(c as f64),
                None => {
                    warnings.push(MissingEntry {
                        scale_id: scale.id.clone(),
                        adjective: a.surface().to_string(),
                    });
                    -0.0
                }
            };
            (a.surface().to_string(), s)
        })
        .collect();
    (ScalePrediction::new(scale.id.clone(), scores), warnings)
}

/// Score `-senses`, with `default` for uncovered adjectives.
pub fn sense_rank(scale: &Scale, table: &SenseTable, default: f64) -> ScalePrediction {
    let scores = scale
        .adjectives()
        .map(|a| {
            let s = table.get(a.surface()).map_or(default, f64::from);
            (a.surface().to_string(), -s)
        })
        .collect();
    ScalePrediction::new(scale.id.clone(), scores)
}

/// Mean sense count over the unique adjectives of `ds` found in `table`.
pub fn mean_sense_default(ds: &ScaleDataset, table: &SenseTable) -> Result<f64> {
    let covered: Vec<f64> = ds
        .unique_surfaces()
        .into_iter()
        .filter_map(|s| table.get(s))
        .map(f64::from)
        .collect();
    if covered.is_empty() {
        return Err(Error::Coverage(format!(
            "no adjective of `{}` has a sense count in {}",
            ds.name, table.source
        )));
    }
    Ok(covered.iter().sum::<f64>() / covered.len() as f64)
}

/// How many of a dataset's unique adjectives a table covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub dataset: String,
    pub table: String,
    pub covered: usize,
    pub total: usize,
    pub missing: Vec<String>,
}

impl CoverageReport {
    pub fn fraction(&self) -> Option<f64> {
        (self.total > 0).then(|| self.covered as f64 / self.total as f64)
    }
}

impl fmt::Display for CoverageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}/{} adjectives covered by {}",
            self.dataset, self.covered, self.total, self.table
        )
    }
}

pub fn coverage<F>(ds: &ScaleDataset, table_name: &str, has: F) -> CoverageReport
where
    F: Fn(&str) -> bool,
{
    let surfaces = ds.unique_surfaces();
    let missing: Vec<String> = surfaces
        .iter()
        .filter(|s| !has(s))
        .map(|s| s.to_string())
        .collect();
    CoverageReport {
        dataset: ds.name.clone(),
        table: table_name.to_string(),
        covered: surfaces.len() - missing.len(),
        total: surfaces.len(),
        missing,
    }
}
