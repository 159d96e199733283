//! Synthetic embedding dumps with a planted intensity axis, for tests and
//! benchmarks.
//!
//! Every layer `l` has a random unit axis `u_l` and a random offset `b_c`
//! per context. An adjective with intensity `I(a)` gets
//! `v(a, c) = b_c + I(a) * u_l`, optionally plus Gaussian noise with
//! per-coordinate standard deviation `noise * |u_l|`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::embedding::{ContextEmbedding, DumpManifest, EmbeddingStore};
use crate::scale::{Adjective, DatasetTag, Language, Scale, ScaleDataset};
use crate::scalrel::{Label, LabeledAdjective, Split};
use crate::Result;

pub const REF_MILD: &str = "refmild";
pub const REF_EXTREME: &str = "refext";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub num_scales: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub dim: usize,
    /// Hidden layers; the dump also holds layer 0.
    pub layers: usize,
    pub contexts: usize,
    /// Probability that an adjective joins the previous level.
    pub tie_prob: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            num_scales: 50,
            min_size: 3,
            max_size: 6,
            dim: 16,
            layers: 2,
            contexts: 10,
            tie_prob: 0.0,
            noise: 0.0,
            seed: 0,
        }
    }
}

pub struct SyntheticData {
    pub dataset: ScaleDataset,
    pub store: EmbeddingStore,
    /// Planted axis per stored layer.
    pub axes: Vec<Vec<f64>>,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v = gaussian(rng, dim);
    let n = crate::vector::norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

struct Planter {
    rng: ChaCha8Rng,
    axes: Vec<Vec<f64>>,
    noise: f64,
    dim: usize,
}

impl Planter {
    fn new(rng: ChaCha8Rng, layers: usize, dim: usize, noise: f64) -> Self {
        let mut rng = rng;
        let axes = (0..=layers).map(|_| unit(&mut rng, dim)).collect();
        Planter { rng, axes, noise, dim }
    }

    fn offsets(&mut self) -> Vec<Vec<f64>> {
        (0..self.axes.len()).map(|_| gaussian(&mut self.rng, self.dim)).collect()
    }

    /// One record; `direction(layer)` is added on top of the context offset.
    fn record<F>(&mut self, adj: &str, ctx: &str, offsets: &[Vec<f64>], direction: F) -> ContextEmbedding
    where
        F: Fn(usize) -> Vec<f64>,
    {
        let normal = Normal::new(0.0, self.noise.max(0.0)).expect("finite noise");
        let layers = (0..self.axes.len())
            .map(|l| {
                let dir = direction(l);
                let v: Vec<f32> = offsets[l]
                    .iter()
                    .zip(&dir)
                    .map(|(b, d)| {
                        let e = if self.noise > 0.0 { normal.sample(&mut self.rng) } else { 0.0 };
                        (b + d + e) as f32
                    })
                    .collect();
                vec![v]
            })
            .collect();
        ContextEmbedding::new(adj, ctx, layers).expect("well-formed synthetic record")
    }
}

/// Scales with planted intensities plus a held-out reference pair
/// ([`REF_MILD`] at intensity 0, [`REF_EXTREME`] at 1) in its own contexts.
pub fn intensity_fixture(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    let lang = Language::new("en")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut scales = Vec::with_capacity(cfg.num_scales);
    for i in 0..cfg.num_scales {
        let size = rng.random_range(cfg.min_size..=cfg.max_size);
        let mut levels: Vec<Vec<String>> = Vec::new();
        for k in 0..size {
            let name = format!("s{i:03}a{k}");
            match levels.last_mut() {
                Some(last) if rng.random_bool(cfg.tie_prob) => last.push(name),
                _ => levels.push(vec![name]),
            }
        }
        scales.push(Scale::from_levels(format!("syn-{i:03}"), DatasetTag::Custom("synthetic".into()), lang.clone(), &levels)?);
    }
    let dataset = ScaleDataset::new("synthetic", DatasetTag::Custom("synthetic".into()), lang, scales)?;

    let mut planter = Planter::new(rng, cfg.layers, cfg.dim, cfg.noise);
    let axes = planter.axes.clone();
    let mut records = Vec::new();
    let mut plant = |planter: &mut Planter, prefix: &str, members: &[(String, f64)]| {
        for j in 0..cfg.contexts {
            let ctx = format!("{prefix}-c{j:02}");
            let offsets = planter.offsets();
            for (adj, intensity) in members {
                let rec = planter.record(adj, &ctx, &offsets, |l| axes[l].iter().map(|u| u * intensity).collect());
                records.push(rec);
            }
        }
    };
    plant(&mut planter, "ref", &[(REF_MILD.into(), 0.0), (REF_EXTREME.into(), 1.0)]);
    for scale in dataset.scales() {
        let members: Vec<(String, f64)> = scale
            .ranked()
            .map(|(a, level)| (a.surface().to_string(), level as f64))
            .collect();
        plant(&mut planter, &scale.id, &members);
    }
    let manifest = DumpManifest::new("synthetic", cfg.layers, cfg.dim);
    let store = EmbeddingStore::from_records(manifest, records)?;
    Ok(SyntheticData { dataset, store, axes })
}

pub struct ScalRelFixture {
    pub items: Vec<LabeledAdjective>,
    pub store: EmbeddingStore,
}

/// Scalar adjectives lie along the axis (intensity in ±[1, 2]); relational
/// ones get a random direction orthogonal to it. `good` and `perfect` are
/// included as prototype and reference pair. Splits are assigned 65/10/25
/// per class in generation order.
pub fn scalrel_fixture(per_class: usize, dim: usize, layers: usize, noise: f64, seed: u64) -> Result<ScalRelFixture> {
    let lang = Language::new("en")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planter = Planter::new(ChaCha8Rng::seed_from_u64(seed ^ 0x5ca1), layers, dim, noise);
    let axes = planter.axes.clone();
    let (train, dev, _) = crate::scalrel::SplitFractions::default().sizes(per_class);
    let split_of = |k: usize| {
        if k < train {
            Split::Train
        } else if k < train + dev {
            Split::Dev
        } else {
            Split::Test
        }
    };
    let orthogonal = |rng: &mut ChaCha8Rng, axis: &[f64]| {
        let mut v = gaussian(rng, dim);
        let proj = crate::vector::dot(&v, axis);
        for (x, a) in v.iter_mut().zip(axis) {
            *x -= proj * a;
        }
        let n = crate::vector::norm(&v);
        v.into_iter().map(|x| 1.5 * x / n).collect::<Vec<f64>>()
    };
    // (surface, label, planted vector per layer)
    type Member = (String, Option<Label>, BTreeMap<usize, Vec<f64>>);
    let mut members: Vec<Member> = Vec::new();
    for (name, intensity) in [("good", 1.0), ("perfect", 2.0)] {
        let dirs = (0..=layers).map(|l| (l, axes[l].iter().map(|u| u * intensity).collect())).collect();
        members.push((name.into(), None, dirs));
    }
    for k in 0..per_class {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let intensity = sign * rng.random_range(1.0..2.0);
        let dirs = (0..=layers).map(|l| (l, axes[l].iter().map(|u| u * intensity).collect())).collect();
        members.push((format!("scal{k:04}"), Some(Label::Scalar), dirs));
        let dirs = (0..=layers).map(|l| (l, orthogonal(&mut rng, &axes[l]))).collect();
        members.push((format!("rel{k:04}"), Some(Label::Relational), dirs));
    }
    let mut records = Vec::new();
    let mut items = Vec::new();
    for (idx, (name, label, dirs)) in members.iter().enumerate() {
        let mut ids = Vec::new();
        for j in 0..crate::scalrel::CONTEXTS_PER_ADJECTIVE {
            let ctx = format!("{name}-c{j:02}");
            let offsets = planter.offsets();
            records.push(planter.record(name, &ctx, &offsets, |l| dirs[&l].clone()));
            ids.push(ctx);
        }
        if let Some(label) = label {
            let k = (idx - 2) / 2;
            items.push(LabeledAdjective::new(Adjective::new(name, lang.clone())?, *label, split_of(k), ids));
        }
    }
    // the reference pair needs shared contexts for its direction
    for j in 0..crate::scalrel::CONTEXTS_PER_ADJECTIVE {
        let ctx = format!("pair-c{j:02}");
        let offsets = planter.offsets();
        for (name, intensity) in [("good", 1.0), ("perfect", 2.0)] {
            records.push(planter.record(name, &ctx, &offsets, |l| axes[l].iter().map(|u| u * intensity).collect()));
        }
    }
    let store = EmbeddingStore::from_records(DumpManifest::new("synthetic", layers, dim), records)?;
    Ok(ScalRelFixture { items, store })
}
