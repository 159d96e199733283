use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("adjective `{adjective}` appears twice in the scale on line {line}")]
    Duplicate { adjective: String, line: usize },

    #[error("scale id `{0}` is not unique within the dataset")]
    DuplicateScaleId(String),

    #[error("invalid adjective `{surface}`: {reason}")]
    InvalidAdjective { surface: String, reason: &'static str },

    #[error("dump format error: {0}")]
    Format(String),

    #[error("layer {layer} out of range, dump has layers 0..={max}")]
    LayerOutOfRange { layer: usize, max: usize },

    #[error("missing embeddings for `{adjective}` in contexts [{}]", .contexts.join(", "))]
    MissingData {
        adjective: String,
        contexts: Vec<String>,
    },

    #[error("no score for `{adjective}` in prediction for scale `{scale_id}`")]
    MissingScore { scale_id: String, adjective: String },

    #[error("intensity direction is the zero vector: {0}")]
    DegenerateDirection(String),

    #[error("zero-norm vector for `{0}`")]
    DegenerateVector(String),

    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },

    #[error("no reference pairs remain after exclusion")]
    EmptyReferenceSet,

    #[error("{} reference pair(s) failed: {}", .0.len(), format_failures(.0))]
    ReferencePairs(Vec<(String, String)>),

    #[error("insufficient coverage: {0}")]
    Coverage(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error(
        "cannot subsample {need_frequent} frequent + {need_rare} rare adjectives: \
         only {have_frequent} frequent and {have_rare} rare available"
    )]
    Subsample {
        need_frequent: usize,
        have_frequent: usize,
        need_rare: usize,
        have_rare: usize,
    },

    #[error("split error: {0}")]
    Split(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("scale `{scale_id}`: needed {needed} eligible sentences, found {found}")]
    InsufficientCorpus {
        scale_id: String,
        needed: usize,
        found: usize,
    },

    #[error("corrupt context `{context_id}`: {message}")]
    CorruptContext { context_id: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_failures(failures: &[(String, String)]) -> String {
    failures
        .iter()
        .map(|(pair, msg)| format!("{pair}: {msg}"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// True for errors caused by absent embeddings, scores or table entries.
    pub fn is_missing_data(&self) -> bool {
        match self {
            Error::MissingData { .. } | Error::MissingScore { .. } | Error::Coverage(_) => true,
            Error::ReferencePairs(failures) => failures
                .iter()
                .any(|(_, msg)| msg.starts_with("missing embeddings")),
            _ => false,
        }
    }
}
