//! Half-scale datasets.
//!
//! A scale line lists intensity levels from mild to extreme separated by `<`;
//! adjectives sharing a level (ties) are separated by `||`:
//!
//! ```text
//! # comment
//! dim < gloomy < dark < black
//! flavorful < zesty < hot || spicy
//! w01: bad < awful < terrible < horrible
//! ```
//!
//! An optional `id:` prefix gives the scale an explicit id. Scales without one
//! get an ordinal id when loaded as part of a dataset. Surfaces are lowercased
//! and internal whitespace is collapsed at parse time.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const LEVEL_SEPARATOR: &str = "<";
pub const TIE_SEPARATOR: &str = "||";

/// ISO 639-1 language code, stored lowercase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Language(String);

impl Language {
    pub fn new(code: &str) -> Result<Self> {
        let code = code.trim().to_lowercase();
        if code.len() == 2 && code.chars().all(|c| c.is_ascii_lowercase()) {
            Ok(Language(code))
        } else {
            Err(Error::Config(format!(
                "`{code}` is not a two-letter ISO 639-1 code"
            )))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Language {
    type Error = Error;
    fn try_from(value: String) -> Result<Self> {
        Language::new(&value)
    }
}

impl From<Language> for String {
    fn from(value: Language) -> Self {
        value.0
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A lowercase adjective lemma in a given language.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Adjective {
    surface: String,
    language: Language,
}

impl Adjective {
    pub fn new(surface: &str, language: Language) -> Result<Self> {
        let surface = normalize_surface(surface);
        if surface.is_empty() {
            return Err(Error::InvalidAdjective {
                surface,
                reason: "empty surface",
            });
        }
        if surface.contains(LEVEL_SEPARATOR) || surface.contains(TIE_SEPARATOR) {
            return Err(Error::InvalidAdjective {
                surface,
                reason: "contains a scale separator",
            });
        }
        Ok(Adjective { surface, language })
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn language(&self) -> &Language {
        &self.language
    }
}

impl fmt::Display for Adjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

pub(crate) fn normalize_surface(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum DatasetTag {
    DeMelo,
    Wilkinson,
    Crowd,
    Custom(String),
}

impl From<String> for DatasetTag {
    fn from(value: String) -> Self {
        match value.to_lowercase().as_str() {
            "demelo" => DatasetTag::DeMelo,
            "wilkinson" => DatasetTag::Wilkinson,
            "crowd" => DatasetTag::Crowd,
            _ => DatasetTag::Custom(value),
        }
    }
}

impl From<DatasetTag> for String {
    fn from(value: DatasetTag) -> Self {
        value.to_string()
    }
}

impl fmt::Display for DatasetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetTag::DeMelo => f.write_str("demelo"),
            DatasetTag::Wilkinson => f.write_str("wilkinson"),
            DatasetTag::Crowd => f.write_str("crowd"),
            DatasetTag::Custom(name) => f.write_str(name),
        }
    }
}

/// One half-scale: tie-groups ordered mild to extreme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scale {
    pub id: String,
    pub dataset: DatasetTag,
    pub language: Language,
    levels: Vec<Vec<Adjective>>,
}

impl Scale {
    /// Build a scale from surfaces, validating the level invariants.
    pub fn from_levels<S: AsRef<str>>(
        id: impl Into<String>,
        dataset: DatasetTag,
        language: Language,
        levels: &[Vec<S>],
    ) -> Result<Self> {
        let mut built = Vec::with_capacity(levels.len());
        for group in levels {
            let group = group
                .iter()
                .map(|s| Adjective::new(s.as_ref(), language.clone()))
                .collect::<Result<Vec<_>>>()?;
            built.push(group);
        }
        Self::new(id.into(), dataset, language, built, 0)
    }

    fn new(
        id: String,
        dataset: DatasetTag,
        language: Language,
        levels: Vec<Vec<Adjective>>,
        line: usize,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Parse {
                line,
                message: "scale has no levels".into(),
            });
        }
        let mut seen = BTreeSet::new();
        for group in &levels {
            if group.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty tie-group".into(),
                });
            }
            for adj in group {
                if !seen.insert(adj.surface()) {
                    return Err(Error::Duplicate {
                        adjective: adj.surface().to_string(),
                        line,
                    });
                }
            }
        }
        Ok(Scale {
            id,
            dataset,
            language,
            levels,
        })
    }

    pub fn levels(&self) -> &[Vec<Adjective>] {
        &self.levels
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// All adjectives, mild to extreme, ties in listed order.
    pub fn adjectives(&self) -> impl Iterator<Item = &Adjective> {
        self.levels.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(adjective, level index)` pairs in scale order.
    pub fn ranked(&self) -> impl Iterator<Item = (&Adjective, usize)> {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(level, group)| group.iter().map(move |a| (a, level)))
    }

    pub fn level_of(&self, surface: &str) -> Option<usize> {
        self.ranked()
            .find(|(a, _)| a.surface() == surface)
            .map(|(_, level)| level)
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.level_of(surface).is_some()
    }

    /// Mildest tie-group.
    pub fn first_level(&self) -> &[Adjective] {
        &self.levels[0]
    }

    /// Most extreme tie-group.
    pub fn last_level(&self) -> &[Adjective] {
        &self.levels[self.levels.len() - 1]
    }

    /// Canonical line form: single spaces around separators, no id prefix.
    pub fn to_line(&self) -> String {
        self.levels
            .iter()
            .map(|group| {
                group
                    .iter()
                    .map(Adjective::surface)
                    .collect::<Vec<_>>()
                    .join(" || ")
            })
            .collect::<Vec<_>>()
            .join(" < ")
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    /// `a` is less intense than `b`.
    Less,
    /// `a` and `b` share a level.
    Tie,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GoldPair {
    pub a: Adjective,
    pub b: Adjective,
    pub relation: Relation,
}

/// One pair per unordered adjective pair; `Less` pairs are oriented mild
/// to extreme.
pub fn unordered_pairs(scale: &Scale) -> Vec<GoldPair> {
    let ranked: Vec<_> = scale.ranked().collect();
    let mut pairs = Vec::with_capacity(ranked.len() * ranked.len().saturating_sub(1) / 2);
    for (i, &(a, la)) in ranked.iter().enumerate() {
        for &(b, lb) in &ranked[i + 1..] {
            let relation = if la == lb {
                Relation::Tie
            } else {
                Relation::Less
            };
            pairs.push(GoldPair {
                a: a.clone(),
                b: b.clone(),
                relation,
            });
        }
    }
    pairs
}

/// Parse one scale line. The id is the explicit `id:` prefix when present,
/// otherwise the canonical line.
pub fn parse_scale_line(line: &str, language: &Language) -> Result<Scale> {
    parse_line_at(line, language, &DatasetTag::Custom("custom".into()), 0)
}

fn parse_line_at(
    line: &str,
    language: &Language,
    dataset: &DatasetTag,
    line_no: usize,
) -> Result<Scale> {
    let body = strip_comment(line).trim();
    if body.is_empty() {
        return Err(Error::Parse {
            line: line_no,
            message: "empty scale line".into(),
        });
    }
    let (explicit_id, body) = split_id(body);
    let mut levels = Vec::new();
    for level in body.split(LEVEL_SEPARATOR) {
        let mut group = Vec::new();
        for raw in level.split(TIE_SEPARATOR) {
            if raw.trim().is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty tie-group or adjective".into(),
                });
            }
            group.push(Adjective::new(raw, language.clone()).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?);
        }
        levels.push(group);
    }
    let mut scale = Scale::new(String::new(), dataset.clone(), language.clone(), levels, line_no)?;
    scale.id = explicit_id.map_or_else(|| scale.to_line(), str::to_string);
    Ok(scale)
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(body, _)| body)
}

fn split_id(body: &str) -> (Option<&str>, &str) {
    if let Some((id, rest)) = body.split_once(':') {
        let id = id.trim();
        let valid = !id.is_empty()
            && !id.contains(char::is_whitespace)
            && !id.contains(LEVEL_SEPARATOR)
            && !id.contains('|');
        if valid {
            return (Some(id), rest);
        }
    }
    (None, body)
}

/// Sidecar manifest naming a scale file's dataset and language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleManifest {
    pub name: String,
    #[serde(default = "default_tag")]
    pub dataset: DatasetTag,
    pub language: Language,
}

fn default_tag() -> DatasetTag {
    DatasetTag::Custom("custom".into())
}

impl ScaleManifest {
    /// The sidecar of `scales.txt` is `scales.toml`.
    pub fn sidecar_path(scale_file: &Path) -> PathBuf {
        scale_file.with_extension("toml")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleDataset {
    pub name: String,
    pub tag: DatasetTag,
    pub language: Language,
    scales: Vec<Scale>,
}

impl ScaleDataset {
    pub fn new(
        name: impl Into<String>,
        tag: DatasetTag,
        language: Language,
        scales: Vec<Scale>,
    ) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for scale in &scales {
            if !ids.insert(scale.id.as_str()) {
                return Err(Error::DuplicateScaleId(scale.id.clone()));
            }
        }
        Ok(ScaleDataset {
            name: name.into(),
            tag,
            language,
            scales,
        })
    }

    pub fn empty(name: impl Into<String>, tag: DatasetTag, language: Language) -> Self {
        ScaleDataset {
            name: name.into(),
            tag,
            language,
            scales: Vec::new(),
        }
    }

    /// Parse a whole scale file. Scales without an explicit id are named
    /// `{name}-{ordinal:03}` by their position among scale lines.
    pub fn parse_str(manifest: &ScaleManifest, text: &str) -> Result<Self> {
        let mut scales = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if strip_comment(line).trim().is_empty() {
                continue;
            }
            let mut scale = parse_line_at(line, &manifest.language, &manifest.dataset, idx + 1)?;
            if split_id(strip_comment(line).trim()).0.is_none() {
                scale.id = format!("{}-{:03}", manifest.name, scales.len() + 1);
            }
            scales.push(scale);
        }
        Self::new(
            manifest.name.clone(),
            manifest.dataset.clone(),
            manifest.language.clone(),
            scales,
        )
    }

    /// Load a scale file together with its sidecar manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let manifest = ScaleManifest::load(&ScaleManifest::sidecar_path(path))?;
        Self::load_with(path, &manifest)
    }

    pub fn load_with(path: &Path, manifest: &ScaleManifest) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(manifest, &text)
    }

    pub fn scales(&self) -> &[Scale] {
        &self.scales
    }

    pub fn scale(&self, id: &str) -> Option<&Scale> {
        self.scales.iter().find(|s| s.id == id)
    }

    /// Canonical text form, one scale per line with explicit ids.
    pub fn to_text(&self) -> String {
        self.scales
            .iter()
            .map(|s| format!("{}: {}\n", s.id, s.to_line()))
            .collect()
    }

    /// Unique surfaces across all scales, sorted.
    pub fn unique_surfaces(&self) -> BTreeSet<&str> {
        self.scales
            .iter()
            .flat_map(|s| s.adjectives().map(Adjective::surface))
            .collect()
    }

    /// Unordered surface pairs across all scales, each as `(min, max)`.
    pub fn unique_surface_pairs(&self) -> BTreeSet<(&str, &str)> {
        let mut set = BTreeSet::new();
        for scale in &self.scales {
            let adjs: Vec<_> = scale.adjectives().map(Adjective::surface).collect();
            for (i, a) in adjs.iter().enumerate() {
                for b in &adjs[i + 1..] {
                    set.insert(surface_pair(a, b));
                }
            }
        }
        set
    }
}

/// Order-independent key for a pair of surfaces.
pub fn surface_pair<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DatasetStats {
    pub pairs: usize,
    pub unique_pairs: usize,
    pub adjectives: usize,
    pub unique_adjectives: usize,
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pairs {} ({}), adjectives {} ({})",
            self.pairs, self.unique_pairs, self.adjectives, self.unique_adjectives
        )
    }
}

/// Raw and deduplicated pair and adjective counts.
pub fn dataset_stats(ds: &ScaleDataset) -> DatasetStats {
    let adjectives = ds.scales().iter().map(Scale::len).sum();
    let pairs = ds
        .scales()
        .iter()
        .map(|s| s.len() * s.len().saturating_sub(1) / 2)
        .sum();
    DatasetStats {
        pairs,
        unique_pairs: ds.unique_surface_pairs().len(),
        adjectives,
        unique_adjectives: ds.unique_surfaces().len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn en() -> Language {
        Language::new("en").unwrap()
    }

    #[test]
    fn parses_strict_scale() {
        let s = parse_scale_line("dim < gloomy < dark < black", &en()).unwrap();
        assert_eq!(s.num_levels(), 4);
        assert!(s.levels().iter().all(|l| l.len() == 1));
        assert_eq!(s.first_level()[0].surface(), "dim");
        assert_eq!(s.last_level()[0].surface(), "black");
    }

    #[test]
    fn parses_single_adjective() {
        let s = parse_scale_line("good", &en()).unwrap();
        assert_eq!(s.num_levels(), 1);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn parses_greek_with_tie_and_tabs() {
        let el = Language::new("el").unwrap();
        let s = parse_scale_line("αμυδρός || αχνός <\tμουντός\t< σκοτεινός< μαύρος", &el).unwrap();
        assert_eq!(s.num_levels(), 4);
        assert_eq!(s.levels()[0].len(), 2);
        assert_eq!(s.to_line(), "αμυδρός || αχνός < μουντός < σκοτεινός < μαύρος");
    }

    #[test]
    fn lowercases_and_collapses_whitespace() {
        let s = parse_scale_line("  Warm <   HOT  ", &en()).unwrap();
        assert_eq!(s.to_line(), "warm < hot");
        let s = parse_scale_line("so   So < Great", &en()).unwrap();
        assert_eq!(s.first_level()[0].surface(), "so so");
    }

    #[test]
    fn explicit_id_prefix() {
        let s = parse_scale_line("wk07: bad < awful", &en()).unwrap();
        assert_eq!(s.id, "wk07");
        assert_eq!(s.to_line(), "bad < awful");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_scale_line("   ", &en()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_scale_line("# only a comment", &en()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_scale_line("good < < great", &en()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_scale_line("good || < great", &en()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_scale_line("good < great < Good", &en()),
            Err(Error::Duplicate { .. })
        ));
        assert!(matches!(
            parse_scale_line("good || good", &en()),
            Err(Error::Duplicate { .. })
        ));
    }

    #[test]
    fn pairs_of_strict_scale() {
        let s = parse_scale_line("dim < gloomy < dark < black", &en()).unwrap();
        let pairs = unordered_pairs(&s);
        assert_eq!(pairs.len(), 6);
        assert!(pairs.iter().all(|p| p.relation == Relation::Less));
        assert!(pairs
            .iter()
            .all(|p| s.level_of(p.a.surface()) < s.level_of(p.b.surface())));
    }

    #[test]
    fn pairs_with_tie() {
        let s = parse_scale_line("hot || spicy < scorching", &en()).unwrap();
        let pairs = unordered_pairs(&s);
        assert_eq!(pairs.len(), 3);
        let ties = pairs.iter().filter(|p| p.relation == Relation::Tie).count();
        assert_eq!(ties, 1);
    }

    fn manifest(name: &str) -> ScaleManifest {
        ScaleManifest {
            name: name.into(),
            dataset: DatasetTag::Custom(name.into()),
            language: en(),
        }
    }

    #[test]
    fn stats_count_raw_and_unique() {
        let text = "# two scales sharing `hot`\n\
                    warm < hot\n\
                    flavorful < zesty < hot || spicy\n\
                    warm < hot < scalding\n";
        let ds = ScaleDataset::parse_str(&manifest("t"), text).unwrap();
        let stats = dataset_stats(&ds);
        assert_eq!(stats.pairs, 1 + 6 + 3);
        // (warm, hot) occurs twice
        assert_eq!(stats.unique_pairs, 9);
        assert_eq!(stats.adjectives, 2 + 4 + 3);
        assert_eq!(stats.unique_adjectives, 6);
        assert_eq!(ds.scales()[0].id, "t-001");
        assert_eq!(ds.scales()[2].id, "t-003");
    }

    #[test]
    fn empty_dataset_stats_are_zero() {
        let ds = ScaleDataset::parse_str(&manifest("e"), "# nothing\n\n").unwrap();
        assert_eq!(dataset_stats(&ds), DatasetStats::default());
    }

    #[test]
    fn duplicate_explicit_ids_rejected() {
        let err = ScaleDataset::parse_str(&manifest("d"), "a: x < y\na: z < w\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateScaleId(id) if id == "a"));
    }

    #[test]
    fn dataset_text_round_trip() {
        let text = "good < great || wonderful\nk9: dim < dark\n";
        let ds = ScaleDataset::parse_str(&manifest("r"), text).unwrap();
        let again = ScaleDataset::parse_str(&manifest("r"), &ds.to_text()).unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn manifest_from_toml() {
        let m: ScaleManifest =
            toml::from_str("name = \"wk-en\"\ndataset = \"Wilkinson\"\nlanguage = \"en\"\n").unwrap();
        assert_eq!(m.dataset, DatasetTag::Wilkinson);
        assert_eq!(m.language, en());
    }

    fn scale_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
        // distinct surfaces, then cut into non-empty groups
        prop::collection::btree_set("[a-z]{1,8}", 1..9).prop_flat_map(|set| {
            let words: Vec<String> = set.into_iter().collect();
            let n = words.len();
            prop::collection::vec(any::<bool>(), n).prop_map(move |cuts| {
                let mut levels: Vec<Vec<String>> = vec![vec![]];
                for (i, w) in words.iter().enumerate() {
                    if i > 0 && cuts[i] {
                        levels.push(vec![]);
                    }
                    levels.last_mut().unwrap().push(w.clone());
                }
                levels
            })
        })
    }

    proptest! {
        #[test]
        fn canonical_line_round_trips(levels in scale_strategy()) {
            let s = Scale::from_levels("x", DatasetTag::Crowd, en(), &levels).unwrap();
            let line = s.to_line();
            let back = parse_scale_line(&line, &en()).unwrap();
            prop_assert_eq!(back.to_line(), line);
            prop_assert_eq!(back.levels(), s.levels());
        }

        #[test]
        fn pair_count_and_antisymmetry(levels in scale_strategy()) {
            let s = Scale::from_levels("x", DatasetTag::Crowd, en(), &levels).unwrap();
            let n = s.len();
            let pairs = unordered_pairs(&s);
            prop_assert_eq!(pairs.len(), n * (n - 1) / 2);
            let less: BTreeSet<(String, String)> = pairs
                .iter()
                .filter(|p| p.relation == Relation::Less)
                .map(|p| (p.a.surface().to_string(), p.b.surface().to_string()))
                .collect();
            for (a, b) in &less {
                prop_assert!(!less.contains(&(b.clone(), a.clone())));
            }
        }
    }
}
