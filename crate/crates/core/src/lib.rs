//! Scalar adjective intensity ranking and scalar/relational adjective
//! identification over model-agnostic contextual embedding dumps.
//!
//! The pipeline is split into small modules:
//!
//! * [`scale`]: half-scale datasets with ties and their gold pairwise relations.
//! * [`embedding`]: the `SADJ` dump format and wordpiece pooling.
//! * [`intensity`]: intensity direction vectors and rank-by-cosine.
//! * [`baselines`]: frequency and polysemy ranking baselines.
//! * [`eval`]: pairwise accuracy, Kendall's tau-b, Spearman's rho and reports.
//! * [`scalrel`]: scalar-vs-relational dataset assembly and classifiers.
//! * [`datagen`]: shared-context sentence sets via lexical substitution.
//!
//! Data-parallel loops (per scale, per layer) run on rayon when the
//! `parallel` feature is enabled (the default) and sequentially otherwise.
//! Output is identical either way.

pub mod baselines;
pub mod datagen;
pub mod embedding;
mod error;
pub mod eval;
pub mod intensity;
pub mod par;
pub mod scale;
pub mod scalrel;
pub mod synthetic;
pub mod vector;

pub use error::{Error, Result};
