//! Feature regimes for scalar/relational classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::dataset::LabeledAdjective;
use crate::baselines::{FrequencyTable, SenseTable};
use crate::embedding::{EmbeddingStore, PoolingMode};
use crate::intensity::{dvec_from_pair, ReferencePair};
use crate::scale::{Adjective, Language};
use crate::vector;
use crate::{Error, Result};

pub const DEFAULT_PROTOTYPE: &str = "good";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeatureRegime {
    /// The d-dimensional context-averaged representation.
    AdjRep,
    /// Cosine to the prototype's representation.
    ProtoSim { prototype: String },
    /// `|cos(rep, dVec)|` for the direction built from one reference pair.
    Dv1Abs { extreme: String, mild: String },
    /// `log10(1 + frequency)`.
    Freq,
    /// Sense count, uncovered adjectives filled with a default.
    Sense,
}

impl FeatureRegime {
    pub fn proto_sim() -> Self {
        FeatureRegime::ProtoSim {
            prototype: DEFAULT_PROTOTYPE.into(),
        }
    }

    pub fn dv1(extreme: &str, mild: &str) -> Self {
        FeatureRegime::Dv1Abs {
            extreme: extreme.into(),
            mild: mild.into(),
        }
    }

    /// Regimes whose features come from the dump, one model per layer.
    pub fn uses_embeddings(&self) -> bool {
        matches!(
            self,
            FeatureRegime::AdjRep | FeatureRegime::ProtoSim { .. } | FeatureRegime::Dv1Abs { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeatureRegime::AdjRep => "ADJ-REP",
            FeatureRegime::ProtoSim { .. } => "PROTO-SIM",
            FeatureRegime::Dv1Abs { .. } => "DV-1(+)",
            FeatureRegime::Freq => "FREQ",
            FeatureRegime::Sense => "SENSE",
        }
    }

    /// How raw values are turned into the feature, recorded with the model.
    pub fn transform(&self) -> &'static str {
        match self {
            FeatureRegime::AdjRep => "raw",
            FeatureRegime::ProtoSim { .. } => "cosine",
            FeatureRegime::Dv1Abs { .. } => "abs-cosine",
            FeatureRegime::Freq => "log10(1+count)",
            FeatureRegime::Sense => "count, mean-filled",
        }
    }
}

impl fmt::Display for FeatureRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureRegime::ProtoSim { prototype } if prototype != DEFAULT_PROTOTYPE => {
                write!(f, "PROTO-SIM[{prototype}]")
            }
            FeatureRegime::Dv1Abs { extreme, mild } => write!(f, "DV-1(+)[{extreme}-{mild}]"),
            other => f.write_str(other.name()),
        }
    }
}

/// Lookup tables available to the non-embedding regimes.
#[derive(Debug, Clone, Copy, Default)]
pub struct Tables<'a> {
    pub freq: Option<&'a FrequencyTable>,
    pub senses: Option<&'a SenseTable>,
    /// Fill value for adjectives without a sense count.
    pub sense_default: f64,
}

/// A regime bound to one layer and pooling mode, with any reference
/// vector (prototype representation or dVec) precomputed.
#[derive(Debug, Clone)]
pub struct Featurizer<'a> {
    regime: FeatureRegime,
    store: Option<&'a EmbeddingStore>,
    tables: Tables<'a>,
    layer: usize,
    mode: PoolingMode,
    reference: Option<Vec<f64>>,
}

impl<'a> Featurizer<'a> {
    pub fn new(
        regime: &FeatureRegime,
        store: Option<&'a EmbeddingStore>,
        tables: Tables<'a>,
        language: &Language,
        layer: usize,
        mode: PoolingMode,
    ) -> Result<Self> {
        let need_store = || {
            store.ok_or_else(|| Error::MissingData {
                adjective: format!("{} features", regime.name()),
                contexts: vec!["<no embedding dump>".into()],
            })
        };
        let reference = match regime {
            FeatureRegime::AdjRep => {
                need_store()?.check_layer(layer)?;
                None
            }
            FeatureRegime::ProtoSim { prototype } => {
                let s = need_store()?;
                s.check_layer(layer)?;
                Some(s.representation_all_contexts(prototype, layer, mode)?)
            }
            FeatureRegime::Dv1Abs { extreme, mild } => {
                let s = need_store()?;
                s.check_layer(layer)?;
                let pair = ReferencePair::bind(
                    Adjective::new(mild, language.clone())?,
                    Adjective::new(extreme, language.clone())?,
                    s,
                )?;
                Some(dvec_from_pair(&pair, s, layer, mode)?)
            }
            FeatureRegime::Freq => {
                if tables.freq.is_none() {
                    return Err(Error::MissingData {
                        adjective: "FREQ features".into(),
                        contexts: vec!["<no frequency table>".into()],
                    });
                }
                None
            }
            FeatureRegime::Sense => {
                if tables.senses.is_none() {
                    return Err(Error::MissingData {
                        adjective: "SENSE features".into(),
                        contexts: vec!["<no sense table>".into()],
                    });
                }
                None
            }
        };
        Ok(Featurizer {
            regime: regime.clone(),
            store,
            tables,
            layer,
            mode,
            reference,
        })
    }

    pub fn regime(&self) -> &FeatureRegime {
        &self.regime
    }

    fn representation(&self, item: &LabeledAdjective) -> Result<Vec<f64>> {
        let store = self.store.expect("checked at construction");
        if item.contexts().is_empty() {
            return Err(Error::MissingData {
                adjective: item.surface().to_string(),
                contexts: vec!["<no contexts assigned>".into()],
            });
        }
        store.adjective_representation(item.surface(), item.contexts(), self.layer, self.mode)
    }

    pub fn features(&self, item: &LabeledAdjective) -> Result<Vec<f64>> {
        match &self.regime {
            FeatureRegime::AdjRep => self.representation(item),
            FeatureRegime::ProtoSim { .. } => {
                let rep = self.representation(item)?;
                let proto = self.reference.as_deref().expect("prototype precomputed");
                Ok(vec![vector::cosine_labeled(&rep, proto, item.surface())?])
            }
            FeatureRegime::Dv1Abs { .. } => {
                let rep = self.representation(item)?;
                let dvec = self.reference.as_deref().expect("direction precomputed");
                Ok(vec![dv1_abs(&rep, dvec, item.surface())?])
            }
            FeatureRegime::Freq => {
                let table = self.tables.freq.expect("checked at construction");
                let count = table.get(item.surface()).unwrap_or(0) as f64;
                Ok(vec![count.ln_1p() / std::f64::consts::LN_10])
            }
            FeatureRegime::Sense => {
                let table = self.tables.senses.expect("checked at construction");
                Ok(vec![table
                    .get(item.surface())
                    .map_or(self.tables.sense_default, f64::from)])
            }
        }
    }
}

/// `|cos(rep, dvec)|`.
pub fn dv1_abs(rep: &[f64], dvec: &[f64], label: &str) -> Result<f64> {
    Ok(vector::cosine_labeled(rep, dvec, label)?.abs())
}

/// One-off feature vector for `item`; prefer [`Featurizer`] in loops.
pub fn build_features(
    item: &LabeledAdjective,
    regime: &FeatureRegime,
    store: Option<&EmbeddingStore>,
    layer: usize,
    mode: PoolingMode,
    tables: Tables<'_>,
) -> Result<Vec<f64>> {
    Featurizer::new(regime, store, tables, item.adjective.language(), layer, mode)?.features(item)
}
