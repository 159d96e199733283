use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::format::{check_against_manifest, read_dump, ContextEmbedding, DumpManifest};
use crate::vector;
use crate::{Error, Result};

/// How a multi-wordpiece token is pooled into one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PoolingMode {
    /// Mean of all wordpieces.
    #[serde(rename = "WP")]
    Wp,
    /// Mean of all wordpieces but the last.
    #[serde(rename = "WP-1")]
    WpMinus1,
}

impl PoolingMode {
    pub const ALL: [PoolingMode; 2] = [PoolingMode::Wp, PoolingMode::WpMinus1];
}

impl fmt::Display for PoolingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolingMode::Wp => "WP",
            PoolingMode::WpMinus1 => "WP-1",
        })
    }
}

impl FromStr for PoolingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wp" => Ok(PoolingMode::Wp),
            "wp-1" | "wp1" | "wp_minus_1" | "wp-minus-1" => Ok(PoolingMode::WpMinus1),
            other => Err(Error::Config(format!("unknown pooling mode `{other}`"))),
        }
    }
}

/// Pool the wordpieces of `rec` at `layer`.
///
/// A single-wordpiece token returns that piece under both modes.
pub fn pool_wordpieces(rec: &ContextEmbedding, layer: usize, mode: PoolingMode) -> Result<Vec<f64>> {
    if layer >= rec.num_layers() {
        return Err(Error::LayerOutOfRange {
            layer,
            max: rec.num_layers() - 1,
        });
    }
    let pieces = rec.num_pieces();
    let used = match mode {
        PoolingMode::Wp => pieces,
        PoolingMode::WpMinus1 if pieces == 1 => 1,
        PoolingMode::WpMinus1 => pieces - 1,
    };
    let mut acc = vec![0.0f64; rec.dim()];
    for p in 0..used {
        for (a, &x) in acc.iter_mut().zip(rec.piece(layer, p)) {
            *a += f64::from(x);
        }
    }
    vector::scale_in_place(&mut acc, 1.0 / used as f64);
    Ok(acc)
}

/// In-memory index of a dump keyed by `(adjective, context_id)`.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    manifest: DumpManifest,
    records: BTreeMap<(String, String), ContextEmbedding>,
}

impl EmbeddingStore {
    pub fn from_records(manifest: DumpManifest, records: Vec<ContextEmbedding>) -> Result<Self> {
        manifest.validate()?;
        let mut map = BTreeMap::new();
        for rec in records {
            check_against_manifest(&manifest, &rec)?;
            let key = (rec.adjective.clone(), rec.context_id.clone());
            if map.insert(key, rec).is_some() {
                return Err(Error::Format("duplicate (adjective, context) record".into()));
            }
        }
        Ok(EmbeddingStore {
            manifest,
            records: map,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (manifest, reader) = read_dump(path)?;
        let records = reader.collect::<Result<Vec<_>>>()?;
        Self::from_records(manifest, records)
    }

    pub fn manifest(&self) -> &DumpManifest {
        &self.manifest
    }

    /// Highest valid layer index, `L`.
    pub fn max_layer(&self) -> usize {
        self.manifest.num_layers
    }

    pub fn dim(&self) -> usize {
        self.manifest.hidden_dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &ContextEmbedding> {
        self.records.values()
    }

    pub fn get(&self, adjective: &str, context_id: &str) -> Option<&ContextEmbedding> {
        self.records
            .get(&(adjective.to_string(), context_id.to_string()))
    }

    pub fn contains_adjective(&self, adjective: &str) -> bool {
        !self.contexts_of(adjective).is_empty()
    }

    /// Context ids of `adjective`, sorted.
    pub fn contexts_of(&self, adjective: &str) -> Vec<&str> {
        let start = (adjective.to_string(), String::new());
        self.records
            .range(start..)
            .take_while(|((a, _), _)| a == adjective)
            .map(|((_, c), _)| c.as_str())
            .collect()
    }

    /// Contexts shared by all `adjectives`, sorted. Empty input gives an
    /// empty set.
    pub fn shared_contexts<'a, I>(&self, adjectives: I) -> Vec<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut shared: Option<BTreeSet<&str>> = None;
        for adj in adjectives {
            let ctx: BTreeSet<&str> = self.contexts_of(adj).into_iter().collect();
            shared = Some(match shared {
                None => ctx,
                Some(prev) => prev.intersection(&ctx).copied().collect(),
            });
        }
        shared
            .unwrap_or_default()
            .into_iter()
            .map(str::to_string)
            .collect()
    }

    pub fn check_layer(&self, layer: usize) -> Result<()> {
        if layer > self.max_layer() {
            Err(Error::LayerOutOfRange {
                layer,
                max: self.max_layer(),
            })
        } else {
            Ok(())
        }
    }

    /// Pooled vector of `adjective` in one context.
    pub fn pooled(
        &self,
        adjective: &str,
        context_id: &str,
        layer: usize,
        mode: PoolingMode,
    ) -> Result<Vec<f64>> {
        self.check_layer(layer)?;
        let rec = self.get(adjective, context_id).ok_or_else(|| Error::MissingData {
            adjective: adjective.to_string(),
            contexts: vec![context_id.to_string()],
        })?;
        pool_wordpieces(rec, layer, mode)
    }

    /// Mean pooled vector over `contexts`.
    ///
    /// Contexts are deduplicated and summed in sorted order, so the result
    /// does not depend on the order they are given in.
    pub fn adjective_representation<S: AsRef<str>>(
        &self,
        adjective: &str,
        contexts: &[S],
        layer: usize,
        mode: PoolingMode,
    ) -> Result<Vec<f64>> {
        self.check_layer(layer)?;
        let ids = sorted_unique(contexts);
        if ids.is_empty() {
            return Err(Error::MissingData {
                adjective: adjective.to_string(),
                contexts: Vec::new(),
            });
        }
        let missing: Vec<String> = ids
            .iter()
            .filter(|c| self.get(adjective, c).is_none())
            .map(|c| c.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingData {
                adjective: adjective.to_string(),
                contexts: missing,
            });
        }
        let mut acc = vec![0.0; self.dim()];
        for c in &ids {
            let v = pool_wordpieces(self.get(adjective, c).expect("checked above"), layer, mode)?;
            vector::add_assign(&mut acc, &v);
        }
        vector::scale_in_place(&mut acc, 1.0 / ids.len() as f64);
        Ok(acc)
    }

    /// Representation over every context the dump holds for `adjective`.
    pub fn representation_all_contexts(
        &self,
        adjective: &str,
        layer: usize,
        mode: PoolingMode,
    ) -> Result<Vec<f64>> {
        let contexts = self.contexts_of(adjective);
        self.adjective_representation(adjective, &contexts, layer, mode)
    }
}

pub(crate) fn sorted_unique<S: AsRef<str>>(items: &[S]) -> Vec<&str> {
    let set: BTreeSet<&str> = items.iter().map(AsRef::as_ref).collect();
    set.into_iter().collect()
}
