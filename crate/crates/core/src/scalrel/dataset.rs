//! SCAL-REL instances, relational subsampling and stratified splits.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::FrequencyTable;
use crate::embedding::EmbeddingStore;
use crate::scale::{Adjective, Language};
use crate::{Error, Result};

/// Sentences per adjective in the assembled dataset.
pub const CONTEXTS_PER_ADJECTIVE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Scalar,
    Relational,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Scalar, Label::Relational];

    /// 1 for scalar, 0 for relational.
    pub fn target(self) -> f64 {
        match self {
            Label::Scalar => 1.0,
            Label::Relational => 0.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Scalar => "scalar",
            Label::Relational => "relational",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scalar" | "scal" => Ok(Label::Scalar),
            "relational" | "rel" => Ok(Label::Relational),
            other => Err(Error::Data(format!("unknown label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "valid" | "validation" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::Data(format!("unknown split `{other}`"))),
        }
    }
}

/// One SCAL-REL instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledAdjective {
    pub adjective: Adjective,
    pub label: Label,
    pub split: Split,
    contexts: Vec<String>,
}

impl LabeledAdjective {
    /// `contexts` are deduplicated and sorted; an empty list means the
    /// contexts are taken from the dump later (see [`resolve_contexts`]).
    pub fn new(adjective: Adjective, label: Label, split: Split, contexts: Vec<String>) -> Self {
        let contexts = contexts
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        LabeledAdjective {
            adjective,
            label,
            split,
            contexts,
        }
    }

    pub fn contexts(&self) -> &[String] {
        &self.contexts
    }

    pub fn surface(&self) -> &str {
        self.adjective.surface()
    }
}

/// Fill in or check the contexts of every item against the dump.
///
/// Items without listed contexts get the first `n` (in sorted id order)
/// the dump holds for them. Every item must end up with exactly `n`.
pub fn resolve_contexts(items: &mut [LabeledAdjective], store: &EmbeddingStore, n: usize) -> Result<()> {
    for item in items.iter_mut() {
        if item.contexts.is_empty() {
            let available = store.contexts_of(item.surface());
            if available.len() < n {
                return Err(Error::MissingData {
                    adjective: item.surface().to_string(),
                    contexts: vec![format!("needs {n} contexts, dump has {}", available.len())],
                });
            }
            item.contexts = available.into_iter().take(n).map(str::to_string).collect();
        } else if item.contexts.len() != n {
            return Err(Error::Data(format!(
                "`{}` lists {} contexts, expected {n}",
                item.surface(),
                item.contexts.len()
            )));
        }
        let missing: Vec<String> = item
            .contexts
            .iter()
            .filter(|c| store.get(item.adjective.surface(), c).is_none())
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingData {
                adjective: item.surface().to_string(),
                contexts: missing,
            });
        }
    }
    Ok(())
}

/// Read the TSV file `surface<TAB>label<TAB>split[<TAB>ctx1,ctx2,...]`.
pub fn read_scalrel<R: Read>(input: R, language: &Language) -> Result<Vec<LabeledAdjective>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .comment(Some(b'#'))
        .quoting(false)
        .flexible(true)
        .from_reader(input);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let parse_err = |message: String| Error::Parse { line, message };
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if !(3..=4).contains(&rec.len()) {
            return Err(parse_err(format!("expected 3 or 4 columns, found {}", rec.len())));
        }
        let adjective = Adjective::new(&rec[0], language.clone())?;
        let label: Label = rec[1].parse().map_err(|e: Error| parse_err(e.to_string()))?;
        let split: Split = rec[2].parse().map_err(|e: Error| parse_err(e.to_string()))?;
        let contexts = match rec.get(3) {
            Some(list) => list
                .split(',')
                .map(str::trim)
                .filter(|c| !c.is_empty())
                .map(str::to_string)
                .collect(),
            None => Vec::new(),
        };
        if !seen.insert(adjective.surface().to_string()) {
            return Err(Error::Duplicate {
                adjective: adjective.surface().to_string(),
                line,
            });
        }
        out.push(LabeledAdjective::new(adjective, label, split, contexts));
    }
    Ok(out)
}

pub fn load_scalrel(path: &Path, language: &Language) -> Result<Vec<LabeledAdjective>> {
    read_scalrel(std::fs::File::open(path)?, language)
}

pub fn write_scalrel<W: Write>(mut out: W, items: &[LabeledAdjective]) -> Result<()> {
    for item in items {
        write!(out, "{}\t{}\t{}", item.surface(), item.label, item.split)?;
        if !item.contexts.is_empty() {
            write!(out, "\t{}", item.contexts.join(","))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Frequency-balanced sample of relational candidates.
///
/// The threshold is the mean frequency over all (deduplicated)
/// candidates; adjectives missing from the table count as frequency 0.
/// `n_freq` are drawn uniformly from those above the threshold and
/// `n_rare` from those at or below it. Output: frequent picks then rare
/// picks, each sorted by surface.
pub fn subsample_relational(
    candidates: &[Adjective],
    freq: &FrequencyTable,
    n_freq: usize,
    n_rare: usize,
    seed: u64,
) -> Result<Vec<Adjective>> {
    let pool: Vec<&Adjective> = {
        let mut seen = BTreeSet::new();
        let mut v: Vec<&Adjective> = candidates
            .iter()
            .filter(|a| seen.insert(a.surface()))
            .collect();
        v.sort_by(|a, b| a.surface().cmp(b.surface()));
        v
    };
    let count = |a: &Adjective| freq.get(a.surface()).unwrap_or(0) as f64;
    let threshold = if pool.is_empty() {
        0.0
    } else {
        pool.iter().map(|a| count(a)).sum::<f64>() / pool.len() as f64
    };
    let (frequent, rare): (Vec<&Adjective>, Vec<&Adjective>) =
        pool.iter().copied().partition(|a| count(a) > threshold);
    if frequent.len() < n_freq || rare.len() < n_rare {
        return Err(Error::Subsample {
            need_frequent: n_freq,
            have_frequent: frequent.len(),
            need_rare: n_rare,
            have_rare: rare.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |side: &[&Adjective], n: usize| {
        let mut picked: Vec<Adjective> = side
            .choose_multiple(&mut rng, n)
            .map(|a| (*a).clone())
            .collect();
        picked.sort_by(|a, b| a.surface().cmp(b.surface()));
        picked
    };
    let mut out = draw(&frequent, n_freq);
    out.extend(draw(&rare, n_rare));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.65,
            dev: 0.10,
            test: 0.25,
        }
    }
}

impl SplitFractions {
    /// Per-class sizes: train and dev are rounded, test takes the rest.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let train = ((self.train * n as f64).round() as usize).min(n);
        let dev = ((self.dev * n as f64).round() as usize).min(n - train);
        (train, dev, n - train - dev)
    }

    fn validate(&self) -> Result<()> {
        let parts = [self.train, self.dev, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) || ((parts.iter().sum::<f64>()) - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!(
                "fractions must be non-negative and sum to 1, got {}/{}/{}",
                self.train, self.dev, self.test
            )));
        }
        Ok(())
    }
}

/// Stratified split assignment, aligned with `items`.
///
/// Within each class, items are ordered by surface, shuffled under
/// `seed`, and cut into train/dev/test by [`SplitFractions::sizes`]. The
/// result does not depend on the input order.
pub fn make_split(
    items: &[(Adjective, Label)],
    fractions: SplitFractions,
    seed: u64,
) -> Result<Vec<Split>> {
    fractions.validate()?;
    let mut assignment = vec![Split::Train; items.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for label in Label::ALL {
        let mut idx: Vec<usize> = (0..items.len()).filter(|&i| items[i].1 == label).collect();
        if idx.is_empty() {
            return Err(Error::Split(format!("no {label} items")));
        }
        idx.sort_by(|&a, &b| items[a].0.surface().cmp(items[b].0.surface()));
        idx.shuffle(&mut rng);
        let (train, dev, _) = fractions.sizes(idx.len());
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = if pos < train {
                Split::Train
            } else if pos < train + dev {
                Split::Dev
            } else {
                Split::Test
            };
        }
    }
    Ok(assignment)
}

/// Assemble labeled items from scalar and relational lists and split them.
pub fn assemble(
    scalar: &[Adjective],
    relational: &[Adjective],
    fractions: SplitFractions,
    seed: u64,
) -> Result<Vec<LabeledAdjective>> {
    let scalar_set: BTreeSet<&str> = scalar.iter().map(Adjective::surface).collect();
    let mut items: Vec<(Adjective, Label)> = scalar.iter().map(|a| (a.clone(), Label::Scalar)).collect();
    // an adjective listed on both sides stays scalar
    items.extend(
        relational
            .iter()
            .filter(|a| !scalar_set.contains(a.surface()))
            .map(|a| (a.clone(), Label::Relational)),
    );
    let mut seen = BTreeSet::new();
    items.retain(|(a, _)| seen.insert(a.surface().to_string()));
    let splits = make_split(&items, fractions, seed)?;
    Ok(items
        .into_iter()
        .zip(splits)
        .map(|((a, l), s)| LabeledAdjective::new(a, l, s, Vec::new()))
        .collect())
}
