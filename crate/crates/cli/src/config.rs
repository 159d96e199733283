//! Declarative run configs: a flat TOML file, `--set key=value` overrides
//! and a handful of convenience flags, deserialized with unknown keys
//! rejected.

use std::path::{Path, PathBuf};

use adjscale::embedding::PoolingMode;
use adjscale::eval::{EvalConfig, GoldTiePolicy, TauVariant};
use adjscale::intensity::ScoreAggregation;
use adjscale::scalrel::Hyperparams;
use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Build a config table from an optional file plus overrides (applied in
/// order). Relative paths in the file resolve against its directory;
/// relative paths given on the command line resolve against the cwd.
pub fn load<T: DeserializeOwned>(
    file: Option<&Path>,
    path_keys: &[&str],
    overrides: &[(String, toml::Value)],
) -> Result<T> {
    let mut table = toml::Table::new();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        table = toml::from_str(&text)
            .map_err(|e| anyhow!(ConfigError(format!("{}: {e}", path.display()))))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for key in path_keys {
            if let Some(toml::Value::String(s)) = table.get_mut(*key) {
                let p = Path::new(s.as_str());
                if p.is_relative() {
                    *s = base.join(p).to_string_lossy().into_owned();
                }
            }
        }
    }
    for (k, v) in overrides {
        table.insert(k.clone(), v.clone());
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| anyhow!(ConfigError(e.to_string())))
}

/// Parse `key=value`; the value is read as a TOML literal, falling back to
/// a bare string.
pub fn parse_override(raw: &str) -> Result<(String, toml::Value)> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| anyhow!(ConfigError(format!("override `{raw}` is not key=value"))))?;
    let key = k.trim().to_string();
    let v = v.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {v}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(v.to_string()));
    Ok((key, value))
}

pub fn path_value(p: &Path) -> toml::Value {
    toml::Value::String(p.to_string_lossy().into_owned())
}

/// sha256 of the resolved config's TOML form.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let text = toml::to_string(config).context("serializing config")?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

/// A bad config value; exits with the validation code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dv1,
    DvDm,
    DvWk,
    Freq,
    Sense,
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PoolingChoice {
    #[default]
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "WP", alias = "wp")]
    Wp,
    #[serde(rename = "WP-1", alias = "wp-1")]
    WpMinus1,
}

impl PoolingChoice {
    pub fn modes(self) -> Vec<PoolingMode> {
        match self {
            PoolingChoice::Both => PoolingMode::ALL.to_vec(),
            PoolingChoice::Wp => vec![PoolingMode::Wp],
            PoolingChoice::WpMinus1 => vec![PoolingMode::WpMinus1],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PoolingChoice::Both => "both",
            PoolingChoice::Wp => "WP",
            PoolingChoice::WpMinus1 => "WP-1",
        }
    }
}

/// `"all"`, one layer, or a list of layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayerSelection {
    Named(String),
    One(usize),
    Many(Vec<usize>),
}

impl Default for LayerSelection {
    fn default() -> Self {
        LayerSelection::Named("all".into())
    }
}

impl LayerSelection {
    /// Concrete sorted layers for a dump with layers `0..=max`.
    pub fn resolve(&self, max: usize) -> Result<Vec<usize>> {
        let mut layers = match self {
            LayerSelection::Named(s) if s == "all" => (0..=max).collect(),
            LayerSelection::Named(s) => bail!(invalid(format!("layers must be \"all\", an integer or a list, got `{s}`"))),
            LayerSelection::One(l) => vec![*l],
            LayerSelection::Many(ls) => ls.clone(),
        };
        layers.sort_unstable();
        layers.dedup();
        if layers.is_empty() {
            bail!(invalid("empty layer list"));
        }
        if let Some(&l) = layers.iter().find(|&&l| l > max) {
            bail!(invalid(format!("layer {l} out of range, dump has layers 0..={max}")));
        }
        Ok(layers)
    }

    pub fn describe(&self) -> String {
        match self {
            LayerSelection::Named(s) => s.clone(),
            LayerSelection::One(l) => l.to_string(),
            LayerSelection::Many(ls) => ls.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    #[default]
    AveragedRepresentation,
    AveragedCosine,
}

impl From<Aggregation> for ScoreAggregation {
    fn from(a: Aggregation) -> Self {
        match a {
            Aggregation::AveragedRepresentation => ScoreAggregation::AveragedRepresentation,
            Aggregation::AveragedCosine => ScoreAggregation::AveragedCosine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoldTies {
    #[default]
    Score,
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tau {
    #[default]
    B,
    A,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankConfig {
    pub dataset: PathBuf,
    /// Defaults to the dataset's `.toml` sidecar.
    pub dataset_manifest: Option<PathBuf>,
    pub method: Method,
    pub output_dir: PathBuf,
    pub dump: Option<PathBuf>,
    #[serde(default)]
    pub pooling: PoolingChoice,
    #[serde(default)]
    pub layers: LayerSelection,
    #[serde(default)]
    pub aggregation: Aggregation,
    /// Source scales of DV-DM / DV-WK pairs.
    pub reference: Option<PathBuf>,
    pub reference_manifest: Option<PathBuf>,
    /// `[extreme, mild]` for dv1/static; the language default otherwise.
    pub pair: Option<Vec<String>>,
    pub freq_table: Option<PathBuf>,
    pub sense_table: Option<PathBuf>,
    #[serde(default)]
    pub tie_eps: f64,
    #[serde(default)]
    pub gold_ties: GoldTies,
    #[serde(default)]
    pub tau: Tau,
}

impl RankConfig {
    pub const PATH_KEYS: &'static [&'static str] = &[
        "dataset",
        "dataset_manifest",
        "output_dir",
        "dump",
        "reference",
        "reference_manifest",
        "freq_table",
        "sense_table",
    ];

    pub fn eval_config(&self) -> Result<EvalConfig> {
        if !self.tie_eps.is_finite() || self.tie_eps < 0.0 {
            bail!(invalid(format!("tie_eps must be a non-negative number, got {}", self.tie_eps)));
        }
        Ok(EvalConfig {
            tie_eps: self.tie_eps,
            gold_ties: match self.gold_ties {
                GoldTies::Score => GoldTiePolicy::Score,
                GoldTies::Skip => GoldTiePolicy::Skip,
            },
            tau: match self.tau {
                Tau::B => TauVariant::B,
                Tau::A => TauVariant::A,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeName {
    AdjRep,
    ProtoSim,
    Dv1,
    Freq,
    Sense,
}

fn default_regimes() -> Vec<RegimeName> {
    vec![
        RegimeName::AdjRep,
        RegimeName::ProtoSim,
        RegimeName::Dv1,
        RegimeName::Freq,
        RegimeName::Sense,
    ]
}

fn default_language() -> String {
    "en".into()
}

fn default_contexts() -> usize {
    adjscale::scalrel::CONTEXTS_PER_ADJECTIVE
}

fn default_l2() -> f64 {
    Hyperparams::default().l2
}

fn default_lr() -> f64 {
    Hyperparams::default().lr
}

fn default_max_iter() -> usize {
    Hyperparams::default().max_iter
}

fn default_tol() -> f64 {
    Hyperparams::default().tol
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Labeled adjective TSV.
    pub scalrel: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_language")]
    pub language: String,
    pub dump: Option<PathBuf>,
    /// Static vectors; adds a layerless ADJ-REP row.
    pub static_dump: Option<PathBuf>,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<RegimeName>,
    #[serde(default)]
    pub pooling: PoolingChoice,
    #[serde(default)]
    pub layers: LayerSelection,
    pub prototype: Option<String>,
    /// `[extreme, mild]` for DV-1.
    pub pair: Option<Vec<String>>,
    pub freq_table: Option<PathBuf>,
    pub sense_table: Option<PathBuf>,
    /// Contexts per adjective when the TSV lists none.
    #[serde(default = "default_contexts")]
    pub contexts: usize,
    /// Reassign splits (65/10/25 stratified) under this seed.
    pub resplit_seed: Option<u64>,
    #[serde(default = "default_l2")]
    pub l2: f64,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl ClassifyConfig {
    pub const PATH_KEYS: &'static [&'static str] = &[
        "scalrel",
        "output_dir",
        "dump",
        "static_dump",
        "freq_table",
        "sense_table",
    ];

    pub fn hyperparams(&self) -> Result<Hyperparams> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("lr", self.lr)?;
        positive("tol", self.tol)?;
        if !self.l2.is_finite() || self.l2 < 0.0 {
            bail!(invalid(format!("l2 must be non-negative, got {}", self.l2)));
        }
        if self.max_iter == 0 {
            bail!(invalid("max_iter must be at least 1"));
        }
        Ok(Hyperparams {
            l2: self.l2,
            lr: self.lr,
            max_iter: self.max_iter,
            tol: self.tol,
        })
    }
}

/// Default DV-1 reference pair `(extreme, mild)` per language.
pub fn default_pair(language: &str) -> Option<(&'static str, &'static str)> {
    match language {
        "en" => Some(("perfect", "good")),
        "fr" => Some(("parfait", "bon")),
        "es" => Some(("perfecto", "bueno")),
        "el" => Some(("τέλειος", "καλός")),
        _ => None,
    }
}

/// `(extreme, mild)` from an explicit pair or the language default.
pub fn resolve_pair(pair: Option<&[String]>, language: &str) -> Result<(String, String)> {
    match pair {
        Some([e, m]) => Ok((e.clone(), m.clone())),
        Some(other) => bail!(invalid(format!(
            "pair must be [extreme, mild], got {} item(s)",
            other.len()
        ))),
        None => default_pair(language)
            .map(|(e, m)| (e.to_string(), m.to_string()))
            .ok_or_else(|| invalid(format!("no default reference pair for language `{language}`; set `pair`"))),
    }
}
