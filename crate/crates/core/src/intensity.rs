//! Intensity directions and rank-by-cosine.
//!
//! An intensity direction is the mean, over shared contexts, of the
//! difference between an extreme adjective's pooled vector and a mild
//! adjective's pooled vector. Several reference pairs are combined by an
//! unweighted mean of their per-pair directions. Adjectives of a scale are
//! then scored by cosine similarity to the direction: higher means more
//! intense.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingStore, PoolingMode};
use crate::eval::ScalePrediction;
use crate::par;
use crate::scale::{surface_pair, Adjective, Scale, ScaleDataset};
use crate::vector;
use crate::{Error, Result};

pub use crate::vector::cosine;

/// An (extreme, mild) candidate taken from the endpoints of a source scale.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EndpointPair {
    pub extreme: Adjective,
    pub mild: Adjective,
    pub scale_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferencePair {
    pub mild: Adjective,
    pub extreme: Adjective,
    contexts: Vec<String>,
}

impl ReferencePair {
    pub fn new(mild: Adjective, extreme: Adjective, contexts: Vec<String>) -> Result<Self> {
        if mild.surface() == extreme.surface() {
            return Err(Error::Data(format!(
                "reference pair needs two different adjectives, got `{mild}` twice"
            )));
        }
        let contexts: Vec<String> = contexts
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if contexts.is_empty() {
            return Err(Error::MissingData {
                adjective: format!("{}/{}", extreme.surface(), mild.surface()),
                contexts: Vec::new(),
            });
        }
        Ok(ReferencePair {
            mild,
            extreme,
            contexts,
        })
    }

    /// Use every context the dump holds for both adjectives.
    pub fn bind(mild: Adjective, extreme: Adjective, store: &EmbeddingStore) -> Result<Self> {
        let shared = store.shared_contexts([mild.surface(), extreme.surface()]);
        Self::new(mild, extreme, shared)
    }

    pub fn contexts(&self) -> &[String] {
        &self.contexts
    }

    /// `extreme-mild`, e.g. `perfect-good`.
    pub fn label(&self) -> String {
        format!("{}-{}", self.extreme.surface(), self.mild.surface())
    }

    /// The same pair with the roles of mild and extreme swapped.
    pub fn swapped(&self) -> Self {
        ReferencePair {
            mild: self.extreme.clone(),
            extreme: self.mild.clone(),
            contexts: self.contexts.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodTag {
    Dv1,
    DvDm,
    DvWk,
    Custom(String),
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodTag::Dv1 => f.write_str("DV-1(+)"),
            MethodTag::DvDm => f.write_str("DV-DM"),
            MethodTag::DvWk => f.write_str("DV-WK"),
            MethodTag::Custom(name) => f.write_str(name),
        }
    }
}

/// Per-context differences `pooled(extreme, c) - pooled(mild, c)`, averaged.
pub fn dvec_from_pair(
    pair: &ReferencePair,
    store: &EmbeddingStore,
    layer: usize,
    mode: PoolingMode,
) -> Result<Vec<f64>> {
    let extreme = store.adjective_representation(pair.extreme.surface(), &pair.contexts, layer, mode)?;
    let mild = store.adjective_representation(pair.mild.surface(), &pair.contexts, layer, mode)?;
    // mean of differences == difference of means over the same contexts
    let d: Vec<f64> = extreme.iter().zip(&mild).map(|(e, m)| e - m).collect();
    if vector::is_zero(&d) {
        return Err(Error::DegenerateDirection(format!(
            "pair {} at layer {layer}",
            pair.label()
        )));
    }
    Ok(d)
}

/// Unweighted mean of per-pair directions. Failures are collected for all
/// pairs before returning.
pub fn dvec_from_pairs(
    pairs: &[ReferencePair],
    store: &EmbeddingStore,
    layer: usize,
    mode: PoolingMode,
) -> Result<Vec<f64>> {
    if pairs.is_empty() {
        return Err(Error::EmptyReferenceSet);
    }
    let mut ok = Vec::with_capacity(pairs.len());
    let mut failures = Vec::new();
    for pair in pairs {
        match dvec_from_pair(pair, store, layer, mode) {
            Ok(v) => ok.push(v),
            Err(e) => failures.push((pair.label(), e.to_string())),
        }
    }
    if !failures.is_empty() {
        return Err(Error::ReferencePairs(failures));
    }
    let mean = vector::mean(ok.iter().map(Vec::as_slice), store.dim()).expect("non-empty");
    if vector::is_zero(&mean) {
        return Err(Error::DegenerateDirection(format!(
            "mean of {} pairs at layer {layer}",
            pairs.len()
        )));
    }
    Ok(mean)
}

/// Endpoint pairs of `source` whose surface pair never co-occurs in a scale
/// of `exclude`.
///
/// Each source scale with at least two levels contributes the cross product
/// of its last level (extreme) with its first level (mild). Repeated
/// candidates are kept once.
pub fn select_reference_pairs(source: &ScaleDataset, exclude: &ScaleDataset) -> Result<Vec<EndpointPair>> {
    if source.language != exclude.language {
        return Err(Error::Config(format!(
            "reference dataset is `{}` but exclusion dataset is `{}`",
            source.language, exclude.language
        )));
    }
    let excluded = exclude.unique_surface_pairs();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for scale in source.scales() {
        if scale.num_levels() < 2 {
            continue;
        }
        for extreme in scale.last_level() {
            for mild in scale.first_level() {
                if excluded.contains(&surface_pair(extreme.surface(), mild.surface())) {
                    continue;
                }
                if seen.insert((extreme.surface().to_string(), mild.surface().to_string())) {
                    out.push(EndpointPair {
                        extreme: extreme.clone(),
                        mild: mild.clone(),
                        scale_id: scale.id.clone(),
                    });
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyReferenceSet);
    }
    Ok(out)
}

/// Bind endpoint candidates to their shared contexts in the dump.
pub fn bind_pairs(candidates: &[EndpointPair], store: &EmbeddingStore) -> Result<Vec<ReferencePair>> {
    let mut pairs = Vec::with_capacity(candidates.len());
    let mut failures = Vec::new();
    for c in candidates {
        match ReferencePair::bind(c.mild.clone(), c.extreme.clone(), store) {
            Ok(p) => pairs.push(p),
            Err(e) => failures.push((
                format!("{}-{} ({})", c.extreme, c.mild, c.scale_id),
                e.to_string(),
            )),
        }
    }
    if failures.is_empty() {
        Ok(pairs)
    } else {
        Err(Error::ReferencePairs(failures))
    }
}

/// A per-layer intensity direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityDirection {
    pub method: MethodTag,
    pub mode: PoolingMode,
    pub provenance: Vec<ReferencePair>,
    vectors: BTreeMap<usize, Vec<f64>>,
}

impl IntensityDirection {
    /// Build the direction at each of `layers` from `pairs`.
    pub fn build(
        pairs: Vec<ReferencePair>,
        store: &EmbeddingStore,
        layers: &[usize],
        mode: PoolingMode,
        method: MethodTag,
    ) -> Result<Self> {
        for &layer in layers {
            store.check_layer(layer)?;
        }
        let vecs = par::try_map(layers, |&layer| dvec_from_pairs(&pairs, store, layer, mode))?;
        Ok(IntensityDirection {
            method,
            mode,
            provenance: pairs,
            vectors: layers.iter().copied().zip(vecs).collect(),
        })
    }

    /// Wrap precomputed vectors; every vector must be finite and non-zero.
    pub fn from_vectors(
        method: MethodTag,
        mode: PoolingMode,
        provenance: Vec<ReferencePair>,
        vectors: BTreeMap<usize, Vec<f64>>,
    ) -> Result<Self> {
        for (layer, v) in &vectors {
            if v.iter().any(|x| !x.is_finite()) || vector::norm(v) == 0.0 {
                return Err(Error::DegenerateDirection(format!("layer {layer}")));
            }
        }
        Ok(IntensityDirection {
            method,
            mode,
            provenance,
            vectors,
        })
    }

    pub fn layers(&self) -> impl Iterator<Item = usize> + '_ {
        self.vectors.keys().copied()
    }

    pub fn at(&self, layer: usize) -> Result<&[f64]> {
        self.vectors
            .get(&layer)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::LayerOutOfRange {
                layer,
                max: self.vectors.keys().next_back().copied().unwrap_or(0),
            })
    }

    /// Multiply every layer's vector by `factor` (must be non-zero).
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor != 0.0 && factor.is_finite(), "scale factor must be finite and non-zero");
        let mut out = self.clone();
        for v in out.vectors.values_mut() {
            vector::scale_in_place(v, factor);
        }
        out
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for v in out.vectors.values_mut() {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        out
    }
}

/// How per-context evidence is combined into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ScoreAggregation {
    /// Cosine of the context-averaged representation with the direction.
    #[default]
    AveragedRepresentation,
    /// Mean of per-context cosines.
    AveragedCosine,
}

impl fmt::Display for ScoreAggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreAggregation::AveragedRepresentation => "averaged-representation",
            ScoreAggregation::AveragedCosine => "averaged-cosine",
        })
    }
}

/// Contexts the dump holds for every adjective of `scale`.
pub fn scale_contexts(scale: &Scale, store: &EmbeddingStore) -> Result<Vec<String>> {
    let shared = store.shared_contexts(scale.adjectives().map(Adjective::surface));
    if shared.is_empty() {
        let missing = scale
            .adjectives()
            .filter(|a| !store.contains_adjective(a.surface()))
            .map(|a| a.surface().to_string())
            .collect::<Vec<_>>();
        return Err(Error::MissingData {
            adjective: format!("scale {}", scale.id),
            contexts: if missing.is_empty() {
                vec!["<no context shared by all adjectives>".into()]
            } else {
                missing
            },
        });
    }
    Ok(shared)
}

/// Score each adjective of `scale` by cosine to `direction` at `layer`.
pub fn rank_scale(
    scale: &Scale,
    contexts: &[String],
    direction: &IntensityDirection,
    store: &EmbeddingStore,
    layer: usize,
    aggregation: ScoreAggregation,
) -> Result<ScalePrediction> {
    let dvec = direction.at(layer)?;
    let mode = direction.mode;
    let mut scores = BTreeMap::new();
    for adj in scale.adjectives() {
        let surface = adj.surface();
        let score = match aggregation {
            ScoreAggregation::AveragedRepresentation => {
                let rep = store.adjective_representation(surface, contexts, layer, mode)?;
                vector::cosine_labeled(&rep, dvec, surface)?
            }
            ScoreAggregation::AveragedCosine => {
                let ids = crate::embedding::sorted_unique(contexts);
                if ids.is_empty() {
                    return Err(Error::MissingData {
                        adjective: surface.to_string(),
                        contexts: Vec::new(),
                    });
                }
                let mut sum = 0.0;
                for c in &ids {
                    let v = store.pooled(surface, c, layer, mode)?;
                    sum += vector::cosine_labeled(&v, dvec, surface)?;
                }
                sum / ids.len() as f64
            }
        };
        scores.insert(surface.to_string(), score);
    }
    Ok(ScalePrediction::new(scale.id.clone(), scores))
}

/// Rank every scale of `ds` at `layer`, using each scale's shared contexts.
pub fn rank_dataset(
    ds: &ScaleDataset,
    direction: &IntensityDirection,
    store: &EmbeddingStore,
    layer: usize,
    aggregation: ScoreAggregation,
) -> Result<Vec<ScalePrediction>> {
    par::try_map(ds.scales(), |scale| {
        let contexts = scale_contexts(scale, store)?;
        rank_scale(scale, &contexts, direction, store, layer, aggregation)
    })
}
