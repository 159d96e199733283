use adjscale::baselines::{FrequencyTable, SenseTable};
use adjscale::embedding::{EmbeddingStore, PoolingMode};
use adjscale::scale::Language;
use adjscale::scalrel::{
    self, ClassificationReport, ClassifyInputs, FeatureRegime, Label, LabeledAdjective, Split,
    SplitFractions, Tables,
};
use anyhow::{Context, Result};

use crate::config::{self, invalid, ClassifyConfig, RegimeName};
use crate::io;

pub fn run(cfg: &ClassifyConfig) -> Result<()> {
    let hyper = cfg.hyperparams()?;
    let language = Language::new(&cfg.language)?;
    let mut items = scalrel::load_scalrel(&cfg.scalrel, &language)
        .with_context(|| format!("labeled adjectives {}", cfg.scalrel.display()))?;
    if let Some(seed) = cfg.resplit_seed {
        let pairs: Vec<_> = items.iter().map(|i| (i.adjective.clone(), i.label)).collect();
        let splits = scalrel::make_split(&pairs, SplitFractions::default(), seed)?;
        for (item, split) in items.iter_mut().zip(splits) {
            item.split = split;
        }
    }
    if cfg.regimes.is_empty() && cfg.static_dump.is_none() {
        return Err(invalid("no regimes requested"));
    }

    let mut report = ClassificationReport::default();
    report.flag("config_hash", config::config_hash(cfg)?);
    report.flag("language", &language);
    report.flag(
        "splits",
        cfg.resplit_seed
            .map_or_else(|| "from file".to_string(), |s| format!("resplit seed {s}")),
    );
    report.flag("pooling", cfg.pooling.name());
    report.flag("layers", cfg.layers.describe());
    report.flag("hyperparams", format!("l2={} lr={} max_iter={} tol={}", hyper.l2, hyper.lr, hyper.max_iter, hyper.tol));
    for split in [Split::Train, Split::Dev, Split::Test] {
        for label in Label::ALL {
            let n = items.iter().filter(|i| i.split == split && i.label == label).count();
            report.flag(format!("n_{split}_{label}"), n);
        }
    }

    let store = match &cfg.dump {
        Some(p) => Some(EmbeddingStore::load(p).with_context(|| format!("dump {}", p.display()))?),
        None => None,
    };
    if let Some(s) = &store {
        scalrel::resolve_contexts(&mut items, s, cfg.contexts)?;
        report.flag("dump_manifest", serde_json::to_string(s.manifest())?);
        report.flag("contexts", cfg.contexts);
    }
    let freq = cfg.freq_table.as_deref().map(FrequencyTable::load).transpose()?;
    let senses = cfg.sense_table.as_deref().map(SenseTable::load).transpose()?;
    let sense_default = match &senses {
        Some(t) => {
            let d = train_sense_mean(&items, t);
            if let Some(d) = d {
                report.flag("sense_default", d);
            }
            for (label, mean) in scalrel::mean_senses_by_label(&items, t, None) {
                if let Some(m) = mean {
                    report.flag(format!("mean_senses_{label}"), m);
                }
            }
            d
        }
        None => None,
    };
    if cfg.regimes.contains(&RegimeName::Sense) && senses.is_some() && sense_default.is_none() {
        return Err(adjscale::Error::Coverage("no training adjective has a sense count".into()).into());
    }
    let tables = Tables {
        freq: freq.as_ref(),
        senses: senses.as_ref(),
        sense_default: sense_default.unwrap_or(0.0),
    };
    let inputs = ClassifyInputs {
        store: store.as_ref(),
        tables,
        language: &language,
    };
    let layers = match &store {
        Some(s) => cfg.layers.resolve(s.max_layer())?,
        None => vec![0],
    };

    for name in &cfg.regimes {
        let regime = regime(cfg, *name)?;
        match name {
            RegimeName::ProtoSim | RegimeName::Dv1 => report.flag(regime.name(), &regime),
            _ => {}
        }
        let modes = if regime.uses_embeddings() {
            cfg.pooling.modes()
        } else {
            vec![PoolingMode::Wp]
        };
        for mode in modes {
            let r = scalrel::select_layer_and_evaluate(&regime, &items, inputs, &layers, mode, hyper)?;
            report.results.push(r);
        }
    }

    if let Some(path) = &cfg.static_dump {
        let s = EmbeddingStore::load(path).with_context(|| format!("static dump {}", path.display()))?;
        let mut static_items: Vec<LabeledAdjective> = items
            .iter()
            .map(|i| LabeledAdjective::new(i.adjective.clone(), i.label, i.split, Vec::new()))
            .collect();
        scalrel::resolve_contexts(&mut static_items, &s, 1)?;
        let static_inputs = ClassifyInputs {
            store: Some(&s),
            ..inputs
        };
        let mut r = scalrel::select_layer_and_evaluate(
            &FeatureRegime::AdjRep,
            &static_items,
            static_inputs,
            &[0],
            PoolingMode::Wp,
            hyper,
        )?;
        r.label = "ADJ-REP (static)".into();
        r.mode = None;
        r.best_layer = None;
        report.flag("static_dump_manifest", serde_json::to_string(s.manifest())?);
        report.results.push(r);
    }

    let dir = &cfg.output_dir;
    io::write_file(&dir.join("report.csv"), |w| Ok(report.write_csv(w)?))?;
    io::write_file(&dir.join("layers.csv"), |w| Ok(report.write_layers_csv(w)?))?;
    io::write_text(&dir.join("report.md"), &report.to_markdown())?;
    io::write_text(&dir.join("report.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    io::write_text(&dir.join("config.toml"), &toml::to_string(cfg)?)?;
    print!("{}", report.to_markdown());
    Ok(())
}

fn regime(cfg: &ClassifyConfig, name: RegimeName) -> Result<FeatureRegime> {
    Ok(match name {
        RegimeName::AdjRep => FeatureRegime::AdjRep,
        RegimeName::ProtoSim => {
            let prototype = match &cfg.prototype {
                Some(p) => p.clone(),
                None => config::resolve_pair(None, &cfg.language)
                    .map_err(|_| invalid(format!("no default prototype for `{}`; set `prototype`", cfg.language)))?
                    .1,
            };
            FeatureRegime::ProtoSim { prototype }
        }
        RegimeName::Dv1 => {
            let (extreme, mild) = config::resolve_pair(cfg.pair.as_deref(), &cfg.language)?;
            FeatureRegime::dv1(&extreme, &mild)
        }
        RegimeName::Freq => FeatureRegime::Freq,
        RegimeName::Sense => FeatureRegime::Sense,
    })
}

/// Mean sense count over covered training adjectives.
fn train_sense_mean(items: &[LabeledAdjective], senses: &SenseTable) -> Option<f64> {
    let counts: Vec<f64> = items
        .iter()
        .filter(|i| i.split == Split::Train)
        .filter_map(|i| senses.get(i.surface()).map(f64::from))
        .collect();
    (!counts.is_empty()).then(|| counts.iter().sum::<f64>() / counts.len() as f64)
}
