//! Scoring predicted intensity rankings against gold scales.
//!
//! Pairwise accuracy and tau are micro-averaged over gold pairs; rho is the
//! mean of per-scale values. Scales where a metric is undefined (all tied,
//! zero variance) are excluded from that metric and counted.

mod metrics;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::par;
use crate::scale::ScaleDataset;
use crate::{Error, Result};

pub use metrics::{
    align, average_ranks, kendall_counts, kendall_tau, kendall_tau_b, pairwise_accuracy,
    pairwise_counts, pearson, scale_metrics, spearman, spearman_rho, EvalConfig, GoldTiePolicy,
    KendallCounts, PairCounts, ScaleMetrics, TauVariant,
};
pub use report::{
    best_layer, format_metric, write_scores_csv, BestLayer, Metric, RankingReport, ReportRow,
    ScoreRecord,
};

/// Predicted scores for the adjectives of one scale; higher is more intense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePrediction {
    pub scale_id: String,
    scores: BTreeMap<String, f64>,
}

impl ScalePrediction {
    pub fn new(scale_id: impl Into<String>, scores: BTreeMap<String, f64>) -> Self {
        ScalePrediction {
            scale_id: scale_id.into(),
            scores,
        }
    }

    pub fn score(&self, surface: &str) -> Option<f64> {
        self.scores.get(surface).copied()
    }

    pub fn scores(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scores.iter().map(|(a, s)| (a.as_str(), *s))
    }

    /// Adjectives sorted from most to least intense; ties keep surface order.
    pub fn ranking(&self) -> Vec<&str> {
        let mut items: Vec<(&str, f64)> = self.scores().collect();
        items.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
        items.into_iter().map(|(a, _)| a).collect()
    }

    pub fn negated(&self) -> Self {
        ScalePrediction {
            scale_id: self.scale_id.clone(),
            scores: self.scores.iter().map(|(a, s)| (a.clone(), -s)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetrics {
    /// Micro-averaged over all scorable gold pairs.
    pub p_acc: Option<f64>,
    /// Pair-weighted mean of per-scale tau over defined scales.
    pub tau: Option<f64>,
    /// Unweighted mean of per-scale tau over defined scales.
    pub tau_macro: Option<f64>,
    /// Mean of per-scale rho over defined scales.
    pub rho_avg: Option<f64>,
    pub pairs: PairCounts,
    pub undefined_tau: usize,
    pub undefined_rho: usize,
    pub per_scale: Vec<ScaleMetrics>,
}

/// Aggregate per-scale metrics over a dataset; `preds` must hold one
/// prediction per scale (matched by id, order irrelevant).
pub fn aggregate(ds: &ScaleDataset, preds: &[ScalePrediction], config: &EvalConfig) -> Result<DatasetMetrics> {
    let by_id: BTreeMap<&str, &ScalePrediction> =
        preds.iter().map(|p| (p.scale_id.as_str(), p)).collect();
    if by_id.len() != preds.len() {
        return Err(Error::Data("more than one prediction for a scale".into()));
    }
    for p in preds {
        if ds.scale(&p.scale_id).is_none() {
            return Err(Error::Data(format!(
                "prediction for unknown scale `{}`",
                p.scale_id
            )));
        }
    }
    let per_scale = par::try_map(ds.scales(), |scale| {
        let pred = by_id.get(scale.id.as_str()).ok_or_else(|| {
            Error::Data(format!("no prediction for scale `{}`", scale.id))
        })?;
        metrics::scale_metrics(scale, pred, config)
    })?;
    Ok(combine(per_scale))
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn combine(per_scale: Vec<ScaleMetrics>) -> DatasetMetrics {
    let mut pairs = PairCounts::default();
    let mut taus = Vec::new();
    let mut rhos = Vec::new();
    let (mut weighted, mut weight) = (0.0, 0usize);
    for m in &per_scale {
        pairs += m.pairs;
        if let Some(t) = m.tau {
            taus.push(t);
            weighted += t * m.kendall.pairs as f64;
            weight += m.kendall.pairs;
        }
        if let Some(r) = m.rho {
            rhos.push(r);
        }
    }
    DatasetMetrics {
        p_acc: pairs.accuracy(),
        tau: (weight > 0).then(|| weighted / weight as f64),
        tau_macro: mean(&taus),
        rho_avg: mean(&rhos),
        pairs,
        undefined_tau: per_scale.len() - taus.len(),
        undefined_rho: per_scale.len() - rhos.len(),
        per_scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::{DatasetTag, Language, ScaleManifest};

    fn ds(text: &str) -> ScaleDataset {
        let m = ScaleManifest {
            name: "t".into(),
            dataset: DatasetTag::Custom("t".into()),
            language: Language::new("en").unwrap(),
        };
        ScaleDataset::parse_str(&m, text).unwrap()
    }

    fn pred(id: &str, pairs: &[(&str, f64)]) -> ScalePrediction {
        ScalePrediction::new(id, pairs.iter().map(|(a, s)| (a.to_string(), *s)).collect())
    }

    #[test]
    fn single_scale_aggregate_equals_scale_metric() {
        let d = ds("a || b < c\n");
        let p = pred("t-001", &[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        let m = aggregate(&d, std::slice::from_ref(&p), &EvalConfig::default()).unwrap();
        let s = &d.scales()[0];
        assert_eq!(m.p_acc.unwrap(), pairwise_accuracy(s, &p, 0.0).unwrap());
        assert_eq!(m.tau.unwrap(), kendall_tau(s, &p).unwrap());
        assert_eq!(m.rho_avg.unwrap(), spearman_rho(s, &p).unwrap());
    }

    #[test]
    fn rho_avg_is_mean_of_scales() {
        let d = ds("a < b\nc < d < e\n");
        let preds = vec![
            pred("t-001", &[("a", 0.0), ("b", 1.0)]),
            // ranks (2.5, 1, 2.5) against (1, 2, 3): zero correlation
            pred("t-002", &[("c", 2.0), ("d", 1.0), ("e", 2.0)]),
        ];
        let m = aggregate(&d, &preds, &EvalConfig::default()).unwrap();
        assert_eq!(m.per_scale[0].rho, Some(1.0));
        assert!(m.per_scale[1].rho.unwrap().abs() < 1e-15);
        assert!((m.rho_avg.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn undefined_scales_are_excluded_and_counted() {
        let d = ds("a < b < c\nx || y\n");
        let preds = vec![
            pred("t-001", &[("a", 1.0), ("b", 2.0), ("c", 3.0)]),
            pred("t-002", &[("x", 1.0), ("y", 1.0)]),
        ];
        let m = aggregate(&d, &preds, &EvalConfig::default()).unwrap();
        assert_eq!(m.undefined_tau, 1);
        assert_eq!(m.undefined_rho, 1);
        assert_eq!(m.tau, Some(1.0));
        assert_eq!(m.rho_avg, Some(1.0));
        // the tie pair x=y is scored correct (equal scores)
        assert_eq!(m.pairs, PairCounts { correct: 4, total: 4 });
    }

    #[test]
    fn tau_is_pair_weighted() {
        let d = ds("a < b\nc < d < e\n");
        let preds = vec![
            pred("t-001", &[("a", 1.0), ("b", 0.0)]),
            pred("t-002", &[("c", 1.0), ("d", 2.0), ("e", 3.0)]),
        ];
        let m = aggregate(&d, &preds, &EvalConfig::default()).unwrap();
        assert!((m.tau.unwrap() - (-1.0 + 3.0) / 4.0).abs() < 1e-15);
        assert_eq!(m.tau_macro, Some(0.0));
        assert_eq!(m.p_acc, Some(0.75));
    }

    #[test]
    fn missing_or_unknown_predictions() {
        let d = ds("a < b\nc < d\n");
        let err = aggregate(&d, &[pred("t-001", &[("a", 1.0), ("b", 2.0)])], &EvalConfig::default());
        assert!(matches!(err, Err(Error::Data(_))));
        let err = aggregate(
            &d,
            &[
                pred("t-001", &[("a", 1.0), ("b", 2.0)]),
                pred("t-002", &[("c", 1.0), ("d", 2.0)]),
                pred("zzz", &[]),
            ],
            &EvalConfig::default(),
        );
        assert!(matches!(err, Err(Error::Data(_))));
    }

    #[test]
    fn empty_dataset_has_no_metrics() {
        let d = ds("");
        let m = aggregate(&d, &[], &EvalConfig::default()).unwrap();
        assert_eq!(m.p_acc, None);
        assert_eq!(m.tau, None);
        assert_eq!(m.rho_avg, None);
    }

    #[test]
    fn ranking_orders_by_score() {
        let p = pred("s", &[("a", 0.1), ("b", 0.9), ("c", 0.5)]);
        assert_eq!(p.ranking(), vec!["b", "c", "a"]);
        assert_eq!(p.negated().ranking(), vec!["a", "c", "b"]);
    }
}
