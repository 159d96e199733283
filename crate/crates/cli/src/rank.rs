use std::path::Path;

use adjscale::baselines::{self, FrequencyTable, SenseTable};
use adjscale::embedding::{EmbeddingStore, PoolingMode};
use adjscale::eval::{self, EvalConfig, RankingReport, ReportRow, ScalePrediction, ScoreRecord};
use adjscale::intensity::{self, IntensityDirection, MethodTag, ReferencePair};
use adjscale::scale::{Adjective, ScaleDataset};
use anyhow::{bail, Context, Result};

use crate::config::{self, invalid, Method, RankConfig};
use crate::io;

pub fn run(cfg: &RankConfig) -> Result<()> {
    let eval_cfg = cfg.eval_config()?;
    let ds = io::load_dataset(&cfg.dataset, cfg.dataset_manifest.as_deref())?;
    let mut report = RankingReport::new(ds.name.clone());
    report.flag("config_hash", config::config_hash(cfg)?);
    report.flag("method", method_name(cfg.method));
    report.flag("language", &ds.language);
    report.flag("gold_ties", format!("{:?}", eval_cfg.gold_ties).to_lowercase());
    report.flag("tie_eps", eval_cfg.tie_eps);
    report.flag("tau", format!("tau-{:?}", eval_cfg.tau).to_lowercase());

    let mut scores = Vec::new();
    match cfg.method {
        Method::Freq => {
            let path = required(cfg.freq_table.as_deref(), "freq_table", "freq")?;
            let table = FrequencyTable::load(path)?;
            let mut preds = Vec::new();
            let mut missing = 0;
            for scale in ds.scales() {
                let (pred, miss) = baselines::freq_rank(scale, &table);
                for m in &miss {
                    eprintln!("warning: `{}` (scale {}) has no frequency, ranked rarest", m.adjective, m.scale_id);
                }
                missing += miss.len();
                preds.push(pred);
            }
            report.flag("dump", "unused");
            report.flag("freq_table", &table.source);
            report.flag("freq_missing", missing);
            push_row(&mut report, &mut scores, &ds, &eval_cfg, "FREQ", None, None, preds)?;
        }
        Method::Sense => {
            let path = required(cfg.sense_table.as_deref(), "sense_table", "sense")?;
            let table = SenseTable::load(path)?;
            let default = baselines::mean_sense_default(&ds, &table)?;
            let preds = ds
                .scales()
                .iter()
                .map(|s| baselines::sense_rank(s, &table, default))
                .collect();
            report.flag("dump", "unused");
            report.flag("sense_table", &table.source);
            report.flag("sense_default", default);
            push_row(&mut report, &mut scores, &ds, &eval_cfg, "SENSE", None, None, preds)?;
        }
        Method::Dv1 | Method::Static | Method::DvDm | Method::DvWk => {
            let dump = required(cfg.dump.as_deref(), "dump", method_name(cfg.method))?;
            let store = EmbeddingStore::load(dump).with_context(|| format!("dump {}", dump.display()))?;
            report.flag("dump_manifest", serde_json::to_string(store.manifest())?);
            let (pairs, tag) = reference_pairs(cfg, &ds, &store)?;
            report.flag(
                "reference_pairs",
                pairs.iter().map(ReferencePair::label).collect::<Vec<_>>().join(" "),
            );
            let (layers, modes) = if cfg.method == Method::Static {
                (vec![0], vec![PoolingMode::Wp])
            } else {
                (cfg.layers.resolve(store.max_layer())?, cfg.pooling.modes())
            };
            report.flag("pooling", if cfg.method == Method::Static { "n/a" } else { cfg.pooling.name() });
            report.flag("layers", cfg.layers.describe());
            report.flag("score_aggregation", intensity::ScoreAggregation::from(cfg.aggregation));
            let label = tag.to_string();
            for mode in modes {
                let direction = IntensityDirection::build(pairs.clone(), &store, &layers, mode, tag.clone())?;
                for &layer in &layers {
                    let preds =
                        intensity::rank_dataset(&ds, &direction, &store, layer, cfg.aggregation.into())?;
                    let (mode, layer) = if cfg.method == Method::Static {
                        (None, None)
                    } else {
                        (Some(mode), Some(layer))
                    };
                    push_row(&mut report, &mut scores, &ds, &eval_cfg, &label, mode, layer, preds)?;
                }
            }
        }
    }
    write_outputs(cfg, &report, &scores)?;
    print!("{}", report.to_markdown());
    Ok(())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Dv1 => "dv1",
        Method::DvDm => "dv-dm",
        Method::DvWk => "dv-wk",
        Method::Freq => "freq",
        Method::Sense => "sense",
        Method::Static => "static",
    }
}

fn required<'a>(v: Option<&'a Path>, key: &str, method: &str) -> Result<&'a Path> {
    v.ok_or_else(|| invalid(format!("method `{method}` requires `{key}`")))
}

fn reference_pairs(
    cfg: &RankConfig,
    ds: &ScaleDataset,
    store: &EmbeddingStore,
) -> Result<(Vec<ReferencePair>, MethodTag)> {
    match cfg.method {
        Method::Dv1 | Method::Static => {
            let (extreme, mild) = config::resolve_pair(cfg.pair.as_deref(), ds.language.as_str())?;
            let pair = ReferencePair::bind(
                Adjective::new(&mild, ds.language.clone())?,
                Adjective::new(&extreme, ds.language.clone())?,
                store,
            )?;
            let tag = if cfg.method == Method::Static {
                MethodTag::Custom("DV-1(+) static".into())
            } else {
                MethodTag::Dv1
            };
            Ok((vec![pair], tag))
        }
        Method::DvDm | Method::DvWk => {
            if cfg.pair.is_some() {
                bail!(invalid("`pair` only applies to dv1 and static"));
            }
            let path = required(cfg.reference.as_deref(), "reference", method_name(cfg.method))?;
            let reference = io::load_dataset(path, cfg.reference_manifest.as_deref())?;
            guard_overlap(path, &reference, &cfg.dataset, ds)?;
            let candidates = intensity::select_reference_pairs(&reference, ds)?;
            let pairs = intensity::bind_pairs(&candidates, store)?;
            let tag = if cfg.method == Method::DvDm {
                MethodTag::DvDm
            } else {
                MethodTag::DvWk
            };
            Ok((pairs, tag))
        }
        Method::Freq | Method::Sense => unreachable!("baselines have no reference pairs"),
    }
}

/// A reference dataset must not be the evaluation dataset.
fn guard_overlap(ref_path: &Path, reference: &ScaleDataset, eval_path: &Path, eval: &ScaleDataset) -> Result<()> {
    let same_file = match (ref_path.canonicalize(), eval_path.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    let same_identity = reference.tag == eval.tag && reference.name == eval.name;
    let same_content = reference.language == eval.language && reference.to_text() == eval.to_text();
    if same_file || same_identity || same_content {
        bail!(invalid(format!(
            "reference dataset `{}` is the evaluation dataset; refusing to build directions from the scales being ranked",
            reference.name
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn push_row(
    report: &mut RankingReport,
    scores: &mut Vec<ScoreRecord>,
    ds: &ScaleDataset,
    eval_cfg: &EvalConfig,
    method: &str,
    mode: Option<PoolingMode>,
    layer: Option<usize>,
    preds: Vec<ScalePrediction>,
) -> Result<()> {
    let metrics = eval::aggregate(ds, &preds, eval_cfg)?;
    for p in &preds {
        for (adjective, score) in p.scores() {
            scores.push(ScoreRecord {
                scale_id: p.scale_id.clone(),
                adjective: adjective.to_string(),
                layer,
                mode,
                method: method.to_string(),
                score,
            });
        }
    }
    report.rows.push(ReportRow {
        method: method.to_string(),
        mode,
        layer,
        metrics,
    });
    Ok(())
}

fn write_outputs(cfg: &RankConfig, report: &RankingReport, scores: &[ScoreRecord]) -> Result<()> {
    let dir = &cfg.output_dir;
    io::write_file(&dir.join("report.csv"), |w| Ok(report.write_csv(w)?))?;
    io::write_file(&dir.join("per_scale.csv"), |w| Ok(report.write_per_scale_csv(w)?))?;
    io::write_file(&dir.join("scores.csv"), |w| Ok(eval::write_scores_csv(w, scores)?))?;
    io::write_text(&dir.join("report.md"), &report.to_markdown())?;
    io::write_text(&dir.join("report.json"), &(serde_json::to_string_pretty(report)? + "\n"))?;
    io::write_text(&dir.join("config.toml"), &toml::to_string(cfg)?)?;
    Ok(())
}
