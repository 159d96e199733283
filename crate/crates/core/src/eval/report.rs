//! Per-layer ranking reports: CSV rows, best-layer selection and a
//! Markdown table with best-layer subscripts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::DatasetMetrics;
use crate::embedding::PoolingMode;
use crate::Result;

/// One scored adjective, as written to the scores file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub scale_id: String,
    pub adjective: String,
    pub layer: Option<usize>,
    pub mode: Option<PoolingMode>,
    pub method: String,
    pub score: f64,
}

pub fn write_scores_csv<W: Write>(out: W, records: &[ScoreRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scale_id", "adjective", "layer", "mode", "method", "score"])?;
    for r in records {
        w.write_record([
            r.scale_id.clone(),
            r.adjective.clone(),
            opt(r.layer),
            opt(r.mode),
            r.method.clone(),
            r.score.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Metrics for one (method, pooling mode, layer) configuration.
/// Baselines have neither mode nor layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub mode: Option<PoolingMode>,
    pub layer: Option<usize>,
    pub metrics: DatasetMetrics,
}

impl ReportRow {
    /// Layer 0 is the input embedding layer, not a hidden layer.
    pub fn is_embedding_layer(&self) -> bool {
        self.layer == Some(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    PAcc,
    Tau,
    RhoAvg,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::PAcc, Metric::Tau, Metric::RhoAvg];

    pub fn of(self, m: &DatasetMetrics) -> Option<f64> {
        match self {
            Metric::PAcc => m.p_acc,
            Metric::Tau => m.tau,
            Metric::RhoAvg => m.rho_avg,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::PAcc => "p-acc",
            Metric::Tau => "tau",
            Metric::RhoAvg => "rho_avg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestLayer {
    pub layer: Option<usize>,
    pub value: f64,
}

/// Best row by `metric` among rows of one configuration.
///
/// Hidden layers (1 and up) compete; layer 0 is considered only when no
/// hidden layer has a defined value. Ties go to the lowest layer.
pub fn best_layer<'a, I>(rows: I, metric: Metric) -> Option<BestLayer>
where
    I: IntoIterator<Item = &'a ReportRow>,
{
    let scored: Vec<(Option<usize>, f64)> = rows
        .into_iter()
        .filter_map(|r| metric.of(&r.metrics).map(|v| (r.layer, v)))
        .collect();
    let hidden: Vec<_> = scored.iter().copied().filter(|(l, _)| *l != Some(0)).collect();
    let pool = if hidden.is_empty() { scored } else { hidden };
    pool.into_iter()
        .fold(None, |best: Option<(Option<usize>, f64)>, (l, v)| match best {
            Some((bl, bv)) if bv > v || (bv == v && bl <= l) => Some((bl, bv)),
            _ => Some((l, v)),
        })
        .map(|(layer, value)| BestLayer { layer, value })
}

/// Three decimals with the leading zero dropped: `.651`, `-.120`, `1.000`.
pub fn format_metric(v: Option<f64>) -> String {
    match v {
        None => "n/a".into(),
        Some(x) => {
            let s = format!("{x:.3}");
            if let Some(rest) = s.strip_prefix("0.") {
                format!(".{rest}")
            } else if let Some(rest) = s.strip_prefix("-0.") {
                format!("-.{rest}")
            } else {
                s
            }
        }
    }
}

/// All rows of one ranking run over one dataset, with the decision flags
/// needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub dataset: String,
    pub flags: BTreeMap<String, String>,
    pub rows: Vec<ReportRow>,
}

impl RankingReport {
    pub fn new(dataset: impl Into<String>) -> Self {
        RankingReport {
            dataset: dataset.into(),
            flags: BTreeMap::new(),
            rows: Vec::new(),
        }
    }

    pub fn flag(&mut self, key: impl Into<String>, value: impl ToString) {
        self.flags.insert(key.into(), value.to_string());
    }

    /// Distinct (method, mode) configurations in first-seen order.
    pub fn configurations(&self) -> Vec<(&str, Option<PoolingMode>)> {
        let mut out: Vec<(&str, Option<PoolingMode>)> = Vec::new();
        for r in &self.rows {
            let key = (r.method.as_str(), r.mode);
            if !out.contains(&key) {
                out.push(key);
            }
        }
        out
    }

    pub fn rows_of<'a>(
        &'a self,
        method: &'a str,
        mode: Option<PoolingMode>,
    ) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.method == method && r.mode == mode)
    }

    pub fn best(&self, method: &str, mode: Option<PoolingMode>, metric: Metric) -> Option<BestLayer> {
        best_layer(self.rows_of(method, mode), metric)
    }

    /// One line per row with aggregate metrics.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "dataset",
            "method",
            "mode",
            "layer",
            "embedding_layer",
            "p_acc",
            "tau",
            "tau_macro",
            "rho_avg",
            "pairs_correct",
            "pairs_total",
            "undefined_tau",
            "undefined_rho",
        ])?;
        for r in &self.rows {
            let m = &r.metrics;
            w.write_record([
                self.dataset.clone(),
                r.method.clone(),
                opt(r.mode),
                opt(r.layer),
                r.is_embedding_layer().to_string(),
                opt(m.p_acc),
                opt(m.tau),
                opt(m.tau_macro),
                opt(m.rho_avg),
                m.pairs.correct.to_string(),
                m.pairs.total.to_string(),
                m.undefined_tau.to_string(),
                m.undefined_rho.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-scale values for every row.
    pub fn write_per_scale_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "mode", "layer", "scale_id", "size", "p_acc", "tau", "rho"])?;
        for r in &self.rows {
            for s in &r.metrics.per_scale {
                w.write_record([
                    r.method.clone(),
                    opt(r.mode),
                    opt(r.layer),
                    s.scale_id.clone(),
                    s.size.to_string(),
                    opt(s.p_acc),
                    opt(s.tau),
                    opt(s.rho),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Methods as rows, metrics as columns, each cell the best layer's
    /// value with the layer as a subscript. The best cell per column is bold.
    pub fn to_markdown(&self) -> String {
        let configs = self.configurations();
        let cells: Vec<Vec<Option<BestLayer>>> = configs
            .iter()
            .map(|(method, mode)| {
                Metric::ALL
                    .iter()
                    .map(|&m| self.best(method, *mode, m))
                    .collect()
            })
            .collect();
        let column_best: Vec<Option<f64>> = (0..Metric::ALL.len())
            .map(|j| {
                cells
                    .iter()
                    .filter_map(|row| row[j].map(|b| b.value))
                    .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
            })
            .collect();

        let mut md = String::new();
        let _ = writeln!(md, "## {}\n", self.dataset);
        for (k, v) in &self.flags {
            let _ = writeln!(md, "- {k}: `{v}`");
        }
        if !self.flags.is_empty() {
            md.push('\n');
        }
        md.push_str("| method | pooling | p-acc | τ | ρ_avg |\n");
        md.push_str("|---|---|---|---|---|\n");
        for ((method, mode), row) in configs.iter().zip(&cells) {
            let _ = write!(md, "| {method} | {} |", mode.map(|m| m.to_string()).unwrap_or_else(|| "-".into()));
            for (j, cell) in row.iter().enumerate() {
                let text = match cell {
                    None => "n/a".to_string(),
                    Some(b) => {
                        let mut t = format_metric(Some(b.value));
                        if let Some(l) = b.layer {
                            let _ = write!(t, "<sub>{l}</sub>");
                        }
                        if column_best[j] == Some(b.value) {
                            t = format!("**{t}**");
                        }
                        t
                    }
                };
                let _ = write!(md, " {text} |");
            }
            md.push('\n');
        }
        if self.rows.iter().any(ReportRow::is_embedding_layer) {
            md.push_str("\nLayer 0 (embedding layer) rows are listed in the CSV but only win the subscript when no hidden layer is defined.\n");
        }
        md
    }
}
