//! Dump on disk -> store -> directions -> rankings -> report, plus the
//! sentence-file contract between context generation and extraction.

use std::io::BufReader;

use adjscale::datagen::{self, SamplingConstraints};
use adjscale::embedding::{read_dump, write_dump, ContextEmbedding, EmbeddingStore, PoolingMode};
use adjscale::eval::{aggregate, EvalConfig, Metric, RankingReport, ReportRow};
use adjscale::intensity::{rank_dataset, IntensityDirection, MethodTag, ReferencePair, ScoreAggregation};
use adjscale::scale::{Adjective, ScaleDataset, ScaleManifest};
use adjscale::synthetic::{intensity_fixture, SyntheticConfig, REF_EXTREME, REF_MILD};

#[test]
fn dump_round_trip_through_ranking_report() {
    let data = intensity_fixture(&SyntheticConfig {
        num_scales: 12,
        noise: 0.05,
        seed: 4,
        ..Default::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.sadj");
    let records: Vec<ContextEmbedding> = data.store.records().cloned().collect();
    write_dump(&path, data.store.manifest(), &records).unwrap();

    let (manifest, reader) = read_dump(&path).unwrap();
    assert_eq!(&manifest, data.store.manifest());
    assert_eq!(reader.count(), records.len());
    let store = EmbeddingStore::load(&path).unwrap();
    assert_eq!(store.len(), data.store.len());

    let lang = data.dataset.language.clone();
    let pair = ReferencePair::bind(
        Adjective::new(REF_MILD, lang.clone()).unwrap(),
        Adjective::new(REF_EXTREME, lang).unwrap(),
        &store,
    )
    .unwrap();
    let layers: Vec<usize> = (0..=store.max_layer()).collect();
    let mut report = RankingReport::new(data.dataset.name.clone());
    for mode in PoolingMode::ALL {
        let dir = IntensityDirection::build(vec![pair.clone()], &store, &layers, mode, MethodTag::Dv1).unwrap();
        for &layer in &layers {
            let preds = rank_dataset(&data.dataset, &dir, &store, layer, ScoreAggregation::default()).unwrap();
            let metrics = aggregate(&data.dataset, &preds, &EvalConfig::default()).unwrap();
            report.rows.push(ReportRow {
                method: MethodTag::Dv1.to_string(),
                mode: Some(mode),
                layer: Some(layer),
                metrics,
            });
        }
    }
    let best = report.best("DV-1(+)", Some(PoolingMode::Wp), Metric::PAcc).unwrap();
    assert!(best.layer.unwrap() >= 1);
    assert!(best.value > 0.95, "{}", best.value);

    let mut a = Vec::new();
    let mut b = Vec::new();
    report.write_csv(&mut a).unwrap();
    report.clone().write_csv(&mut b).unwrap();
    assert_eq!(a, b);
    assert!(report.to_markdown().contains(&format!("<sub>{}</sub>", best.layer.unwrap())));
}

#[test]
fn sentence_file_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = ScaleManifest {
        name: "t".into(),
        dataset: "custom".to_string().into(),
        language: adjscale::scale::Language::new("en").unwrap(),
    };
    let ds = ScaleDataset::parse_str(&manifest, "warm < hot < scorching\n").unwrap();
    let corpus: Vec<String> = (0..12)
        .map(|i| format!("on day {i} the sand felt hot under our feet and we kept walking ."))
        .collect();
    let records = datagen::generate(&corpus, &ds, 5, 9, &SamplingConstraints::default()).unwrap();
    assert_eq!(records.len(), 15);
    let path = dir.path().join("ctx.jsonl");
    datagen::write_jsonl(std::fs::File::create(&path).unwrap(), &records).unwrap();
    let back = datagen::read_jsonl(BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, records);
    for r in &back {
        let (s, e) = r.target_span().unwrap();
        assert_eq!(&r.text[s..e], r.adjective);
        let (cs, ce) = r.target_char_span;
        let word: String = r.text.chars().skip(cs).take(ce - cs).collect();
        assert_eq!(word, r.adjective);
    }
}
