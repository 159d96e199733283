//! Scalar vs relational adjective identification: dataset assembly,
//! feature regimes and a deterministic logistic-regression classifier.

mod dataset;
mod evaluate;
mod features;
mod logreg;

pub use dataset::{
    assemble, load_scalrel, make_split, read_scalrel, resolve_contexts, subsample_relational,
    write_scalrel, Label, LabeledAdjective, Split, SplitFractions, CONTEXTS_PER_ADJECTIVE,
};
pub use evaluate::{
    mean_senses_by_label, select_layer_and_evaluate, ClassificationReport, ClassifierModel,
    ClassifyInputs, LayerSummary, RegimeResult,
};
pub use features::{build_features, dv1_abs, FeatureRegime, Featurizer, Tables, DEFAULT_PROTOTYPE};
pub use logreg::{gradient, loss, sigmoid, train_logreg, Hyperparams, LogisticModel};
