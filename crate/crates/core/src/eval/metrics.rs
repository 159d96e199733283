//! Ranking metrics on gold level indices against predicted scores.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::ScalePrediction;
use crate::scale::Scale;
use crate::{Error, Result};

/// How gold ties count toward pairwise accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GoldTiePolicy {
    /// A tied gold pair is correct iff its scores differ by at most `tie_eps`.
    #[default]
    Score,
    /// Tied gold pairs are left out of pairwise accuracy.
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TauVariant {
    /// `(C - D) / sqrt((n0 - n1)(n0 - n2))`.
    #[default]
    B,
    /// `(C - D) / n0`.
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub tie_eps: f64,
    pub gold_ties: GoldTiePolicy,
    pub tau: TauVariant,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tie_eps: 0.0,
            gold_ties: GoldTiePolicy::Score,
            tau: TauVariant::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairCounts {
    pub correct: usize,
    pub total: usize,
}

impl PairCounts {
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

impl std::ops::AddAssign for PairCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.correct += rhs.correct;
        self.total += rhs.total;
    }
}

/// Pair counts for pairwise accuracy. `gold[i] < gold[j]` requires
/// `scores[i] < scores[j]`.
pub fn pairwise_counts(gold: &[usize], scores: &[f64], config: &EvalConfig) -> PairCounts {
    assert_eq!(gold.len(), scores.len());
    let mut counts = PairCounts::default();
    for i in 0..gold.len() {
        for j in i + 1..gold.len() {
            let correct = match gold[i].cmp(&gold[j]) {
                Ordering::Less => scores[i] < scores[j],
                Ordering::Greater => scores[j] < scores[i],
                Ordering::Equal => match config.gold_ties {
                    GoldTiePolicy::Skip => continue,
                    GoldTiePolicy::Score => (scores[i] - scores[j]).abs() <= config.tie_eps,
                },
            };
            counts.total += 1;
            counts.correct += usize::from(correct);
        }
    }
    counts
}

/// Pair classification counts for Kendall's tau.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KendallCounts {
    pub concordant: usize,
    pub discordant: usize,
    /// All unordered pairs, `n(n-1)/2`.
    pub pairs: usize,
    /// Pairs tied in the first variable (including joint ties).
    pub ties_x: usize,
    /// Pairs tied in the second variable (including joint ties).
    pub ties_y: usize,
}

impl KendallCounts {
    pub fn tau(&self, variant: TauVariant) -> Option<f64> {
        let num = self.concordant as f64 - self.discordant as f64;
        match variant {
            TauVariant::A => (self.pairs > 0).then(|| num / self.pairs as f64),
            TauVariant::B => {
                let dx = (self.pairs - self.ties_x) as f64;
                let dy = (self.pairs - self.ties_y) as f64;
                if dx == 0.0 || dy == 0.0 {
                    None
                } else {
                    Some(num / (dx * dy).sqrt())
                }
            }
        }
    }
}

pub fn kendall_counts(x: &[f64], y: &[f64]) -> KendallCounts {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let mut k = KendallCounts {
        pairs: n * n.saturating_sub(1) / 2,
        ..Default::default()
    };
    for i in 0..n {
        for j in i + 1..n {
            let ox = x[i].partial_cmp(&x[j]).unwrap_or(Ordering::Equal);
            let oy = y[i].partial_cmp(&y[j]).unwrap_or(Ordering::Equal);
            match (ox, oy) {
                (Ordering::Equal, Ordering::Equal) => {
                    k.ties_x += 1;
                    k.ties_y += 1;
                }
                (Ordering::Equal, _) => k.ties_x += 1,
                (_, Ordering::Equal) => k.ties_y += 1,
                (a, b) if a == b => k.concordant += 1,
                _ => k.discordant += 1,
            }
        }
    }
    k
}

/// Kendall's tau-b; `None` when either side is entirely tied.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    kendall_counts(x, y).tau(TauVariant::B)
}

/// 1-based ranks; tied values share the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = shared;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation; `None` on zero variance or fewer than two points.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Gold level indices and predicted scores in scale order.
pub fn align(gold: &Scale, pred: &ScalePrediction) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut levels = Vec::with_capacity(gold.len());
    let mut scores = Vec::with_capacity(gold.len());
    for (adj, level) in gold.ranked() {
        let score = pred.score(adj.surface()).ok_or_else(|| Error::MissingScore {
            scale_id: gold.id.clone(),
            adjective: adj.surface().to_string(),
        })?;
        levels.push(level);
        scores.push(score);
    }
    Ok((levels, scores))
}

fn as_f64(levels: &[usize]) -> Vec<f64> {
    levels.iter().map(|&l| l as f64).collect()
}

/// Fraction of gold pairs whose predicted order agrees with gold.
///
/// Returns [`Error::UndefinedMetric`] for a scale with no scorable pairs.
pub fn pairwise_accuracy(gold: &Scale, pred: &ScalePrediction, tie_eps: f64) -> Result<f64> {
    if tie_eps < 0.0 {
        return Err(Error::Config("tie_eps must be >= 0".into()));
    }
    let (levels, scores) = align(gold, pred)?;
    let config = EvalConfig {
        tie_eps,
        ..EvalConfig::default()
    };
    pairwise_counts(&levels, &scores, &config)
        .accuracy()
        .ok_or_else(|| Error::UndefinedMetric(format!("p-acc on scale `{}` with no pairs", gold.id)))
}

/// Kendall's tau-b between gold levels and predicted scores.
pub fn kendall_tau(gold: &Scale, pred: &ScalePrediction) -> Result<f64> {
    let (levels, scores) = align(gold, pred)?;
    kendall_tau_b(&as_f64(&levels), &scores)
        .ok_or_else(|| Error::UndefinedMetric(format!("tau on scale `{}` (all tied)", gold.id)))
}

/// Spearman's rho between gold levels and predicted scores.
pub fn spearman_rho(gold: &Scale, pred: &ScalePrediction) -> Result<f64> {
    let (levels, scores) = align(gold, pred)?;
    spearman(&as_f64(&levels), &scores)
        .ok_or_else(|| Error::UndefinedMetric(format!("rho on scale `{}` (zero variance)", gold.id)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleMetrics {
    pub scale_id: String,
    pub size: usize,
    pub pairs: PairCounts,
    pub kendall: KendallCounts,
    pub p_acc: Option<f64>,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
}

pub fn scale_metrics(gold: &Scale, pred: &ScalePrediction, config: &EvalConfig) -> Result<ScaleMetrics> {
    let (levels, scores) = align(gold, pred)?;
    let pairs = pairwise_counts(&levels, &scores, config);
    let x = as_f64(&levels);
    let kendall = kendall_counts(&x, &scores);
    Ok(ScaleMetrics {
        scale_id: gold.id.clone(),
        size: gold.len(),
        pairs,
        kendall,
        p_acc: pairs.accuracy(),
        tau: kendall.tau(config.tau),
        rho: spearman(&x, &scores),
    })
}
