//! Per-layer training, dev-set layer selection and test accuracy.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dataset::{Label, LabeledAdjective, Split};
use super::features::{FeatureRegime, Featurizer, Tables};
use super::logreg::{train_logreg, Hyperparams, LogisticModel};
use crate::baselines::SenseTable;
use crate::embedding::{EmbeddingStore, PoolingMode};
use crate::par;
use crate::scale::Language;
use crate::{Error, Result};

/// A trained classifier together with what it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub regime: FeatureRegime,
    pub layer: Option<usize>,
    pub mode: Option<PoolingMode>,
    pub feature_transform: String,
    #[serde(flatten)]
    pub model: LogisticModel,
}

/// Everything features may be drawn from.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyInputs<'a> {
    pub store: Option<&'a EmbeddingStore>,
    pub tables: Tables<'a>,
    pub language: &'a Language,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub layer: Option<usize>,
    pub train_acc: f64,
    pub dev_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeResult {
    pub label: String,
    pub mode: Option<PoolingMode>,
    pub best_layer: Option<usize>,
    pub dev_acc: f64,
    pub test_acc: f64,
    pub per_layer: Vec<LayerSummary>,
    pub model: ClassifierModel,
}

type SplitData = (Vec<Vec<f64>>, Vec<f64>);

fn featurize(featurizer: &Featurizer<'_>, items: &[LabeledAdjective]) -> Result<BTreeMap<Split, SplitData>> {
    let mut out: BTreeMap<Split, SplitData> = BTreeMap::new();
    for item in items {
        let x = featurizer.features(item)?;
        let entry = out.entry(item.split).or_default();
        entry.0.push(x);
        entry.1.push(item.label.target());
    }
    Ok(out)
}

fn accuracy(model: &LogisticModel, data: &BTreeMap<Split, SplitData>, split: Split) -> f64 {
    let (xs, ys) = &data[&split];
    model.accuracy(xs, ys).expect("split checked non-empty")
}

fn check_splits(items: &[LabeledAdjective]) -> Result<()> {
    for split in [Split::Train, Split::Dev, Split::Test] {
        if !items.iter().any(|i| i.split == split) {
            return Err(Error::Split(format!("no items in the {split} split")));
        }
    }
    Ok(())
}

/// Train one model per layer on the train split, pick the layer with the
/// best dev accuracy (ties go to the lowest layer) and report its test
/// accuracy. Regimes that do not use embeddings train a single model and
/// ignore `layers` and `mode`.
pub fn select_layer_and_evaluate(
    regime: &FeatureRegime,
    items: &[LabeledAdjective],
    inputs: ClassifyInputs<'_>,
    layers: &[usize],
    mode: PoolingMode,
    hyper: Hyperparams,
) -> Result<RegimeResult> {
    check_splits(items)?;
    let layered = regime.uses_embeddings();
    let candidates: Vec<Option<usize>> = if layered {
        let mut ls = layers.to_vec();
        ls.sort_unstable();
        ls.dedup();
        if ls.is_empty() {
            return Err(Error::Config("no layers requested".into()));
        }
        ls.into_iter().map(Some).collect()
    } else {
        vec![None]
    };
    let trained = par::try_map(&candidates, |&layer| {
        let featurizer = Featurizer::new(
            regime,
            inputs.store,
            inputs.tables,
            inputs.language,
            layer.unwrap_or(0),
            mode,
        )?;
        let data = featurize(&featurizer, items)?;
        let (xs, ys) = &data[&Split::Train];
        let model = train_logreg(xs, ys, hyper)?;
        let summary = LayerSummary {
            layer,
            train_acc: accuracy(&model, &data, Split::Train),
            dev_acc: accuracy(&model, &data, Split::Dev),
        };
        Ok::<_, Error>((summary, model, data))
    })?;
    let best = trained
        .iter()
        .enumerate()
        .fold(0, |best, (i, t)| if t.0.dev_acc > trained[best].0.dev_acc { i } else { best });
    let (summary, model, data) = &trained[best];
    let test_acc = accuracy(model, data, Split::Test);
    Ok(RegimeResult {
        label: regime.to_string(),
        mode: layered.then_some(mode),
        best_layer: summary.layer,
        dev_acc: summary.dev_acc,
        test_acc,
        per_layer: trained.iter().map(|t| t.0.clone()).collect(),
        model: ClassifierModel {
            regime: regime.clone(),
            layer: summary.layer,
            mode: layered.then_some(mode),
            feature_transform: regime.transform().to_string(),
            model: model.clone(),
        },
    })
}

/// Mean sense count per label over covered items, optionally for one split.
pub fn mean_senses_by_label(
    items: &[LabeledAdjective],
    senses: &SenseTable,
    split: Option<Split>,
) -> BTreeMap<Label, Option<f64>> {
    Label::ALL
        .iter()
        .map(|&label| {
            let counts: Vec<f64> = items
                .iter()
                .filter(|i| i.label == label && split.is_none_or(|s| i.split == s))
                .filter_map(|i| senses.get(i.surface()))
                .map(f64::from)
                .collect();
            let mean = (!counts.is_empty()).then(|| counts.iter().sum::<f64>() / counts.len() as f64);
            (label, mean)
        })
        .collect()
}

/// Classification results for several regimes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub flags: BTreeMap<String, String>,
    pub results: Vec<RegimeResult>,
}

fn fmt_acc(v: f64) -> String {
    format!("{v:.3}")
}

impl ClassificationReport {
    pub fn flag(&mut self, key: impl Into<String>, value: impl ToString) {
        self.flags.insert(key.into(), value.to_string());
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "mode", "best_layer", "train_acc", "dev_acc", "test_acc"])?;
        for r in &self.results {
            let train = r
                .per_layer
                .iter()
                .find(|l| l.layer == r.best_layer)
                .map_or(String::new(), |l| l.train_acc.to_string());
            w.write_record([
                r.label.clone(),
                r.mode.map(|m| m.to_string()).unwrap_or_default(),
                r.best_layer.map(|l| l.to_string()).unwrap_or_default(),
                train,
                r.dev_acc.to_string(),
                r.test_acc.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-layer dev accuracies for every result.
    pub fn write_layers_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "mode", "layer", "train_acc", "dev_acc"])?;
        for r in &self.results {
            for l in &r.per_layer {
                w.write_record([
                    r.label.clone(),
                    r.mode.map(|m| m.to_string()).unwrap_or_default(),
                    l.layer.map(|x| x.to_string()).unwrap_or_default(),
                    l.train_acc.to_string(),
                    l.dev_acc.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Methods as rows, WP and WP-1 test accuracy as columns, with the
    /// dev-selected layer as a subscript. Results without a pooling mode
    /// fill both columns.
    pub fn to_markdown(&self) -> String {
        let mut labels: Vec<&str> = Vec::new();
        for r in &self.results {
            if !labels.contains(&r.label.as_str()) {
                labels.push(&r.label);
            }
        }
        let best = self
            .results
            .iter()
            .map(|r| r.test_acc)
            .fold(f64::NEG_INFINITY, f64::max);
        let cell = |r: &RegimeResult| {
            let mut t = fmt_acc(r.test_acc);
            if let (Some(l), Some(_)) = (r.best_layer, r.mode) {
                let _ = write!(t, "<sub>{l}</sub>");
            }
            if r.test_acc == best {
                t = format!("**{t}**");
            }
            t
        };
        let mut md = String::new();
        for (k, v) in &self.flags {
            let _ = writeln!(md, "- {k}: `{v}`");
        }
        if !self.flags.is_empty() {
            md.push('\n');
        }
        md.push_str("| method | WP | WP-1 |\n|---|---|---|\n");
        for label in labels {
            let find = |mode: Option<PoolingMode>| {
                self.results
                    .iter()
                    .find(|r| r.label == label && (r.mode == mode || r.mode.is_none()))
            };
            let wp = find(Some(PoolingMode::Wp)).map_or("-".to_string(), cell);
            let wp1 = find(Some(PoolingMode::WpMinus1)).map_or("-".to_string(), cell);
            let _ = writeln!(md, "| {label} | {wp} | {wp1} |");
        }
        md
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::FrequencyTable;
    use crate::scale::Adjective;

    fn en() -> Language {
        Language::new("en").unwrap()
    }

    fn item(s: &str, label: Label, split: Split) -> LabeledAdjective {
        LabeledAdjective::new(Adjective::new(s, en()).unwrap(), label, split, Vec::new())
    }

    /// Scalars are frequent, relationals rare; one dev item is mislabeled
    /// with respect to that rule.
    fn data() -> (Vec<LabeledAdjective>, FrequencyTable) {
        let mut items = Vec::new();
        let mut freq = BTreeMap::new();
        for i in 0..8 {
            let split = match i {
                0..=4 => Split::Train,
                5 => Split::Dev,
                _ => Split::Test,
            };
            items.push(item(&format!("s{i}"), Label::Scalar, split));
            freq.insert(format!("s{i}"), 1000 + i as u64);
            items.push(item(&format!("r{i}"), Label::Relational, split));
            freq.insert(format!("r{i}"), 5 + i as u64);
        }
        (items, FrequencyTable::new("t", freq))
    }

    #[test]
    fn freq_regime_separates() {
        let (items, freq) = data();
        let lang = en();
        let inputs = ClassifyInputs {
            store: None,
            tables: Tables { freq: Some(&freq), senses: None, sense_default: 0.0 },
            language: &lang,
        };
        let r = select_layer_and_evaluate(&FeatureRegime::Freq, &items, inputs, &[3, 1], PoolingMode::Wp, Hyperparams::default()).unwrap();
        assert_eq!(r.best_layer, None);
        assert_eq!(r.mode, None);
        assert_eq!(r.test_acc, 1.0);
        assert_eq!(r.dev_acc, 1.0);
        assert_eq!(r.per_layer.len(), 1);
        assert_eq!(r.model.feature_transform, "log10(1+count)");
        let again = select_layer_and_evaluate(&FeatureRegime::Freq, &items, inputs, &[], PoolingMode::Wp, Hyperparams::default()).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn empty_split_is_an_error() {
        let (mut items, freq) = data();
        items.retain(|i| i.split != Split::Dev);
        let lang = en();
        let inputs = ClassifyInputs {
            store: None,
            tables: Tables { freq: Some(&freq), senses: None, sense_default: 0.0 },
            language: &lang,
        };
        let err = select_layer_and_evaluate(&FeatureRegime::Freq, &items, inputs, &[], PoolingMode::Wp, Hyperparams::default());
        assert!(matches!(err, Err(Error::Split(_))));
    }

    #[test]
    fn sense_means() {
        let items = vec![
            item("a", Label::Scalar, Split::Train),
            item("b", Label::Scalar, Split::Test),
            item("c", Label::Relational, Split::Train),
        ];
        let t = SenseTable::new("s", [("a".to_string(), 6), ("b".to_string(), 4), ("c".to_string(), 2)].into()).unwrap();
        let all = mean_senses_by_label(&items, &t, None);
        assert_eq!(all[&Label::Scalar], Some(5.0));
        assert_eq!(all[&Label::Relational], Some(2.0));
        let train = mean_senses_by_label(&items, &t, Some(Split::Train));
        assert_eq!(train[&Label::Scalar], Some(6.0));
    }

    #[test]
    fn markdown_table_shape() {
        let (items, freq) = data();
        let lang = en();
        let inputs = ClassifyInputs {
            store: None,
            tables: Tables { freq: Some(&freq), senses: None, sense_default: 0.0 },
            language: &lang,
        };
        let r = select_layer_and_evaluate(&FeatureRegime::Freq, &items, inputs, &[], PoolingMode::Wp, Hyperparams::default()).unwrap();
        let mut rep = ClassificationReport::default();
        rep.results.push(r);
        let md = rep.to_markdown();
        assert!(md.contains("| FREQ | **1.000** | **1.000** |"), "{md}");
    }
}
