//! Embedding dumps and wordpiece pooling.
//!
//! A dump is the only bridge to a neural model: an extractor writes the
//! wordpiece vectors of every `(adjective, context)` occurrence at every
//! layer, and everything downstream works from the dump alone.

mod format;
mod store;

pub use format::{
    read_dump, write_dump, write_dump_to, ContextEmbedding, DumpManifest, DumpReader,
    DTYPE_F32_LE, MAGIC, STATIC_CONTEXT_ID, VERSION,
};
pub use store::{pool_wordpieces, EmbeddingStore, PoolingMode};
pub(crate) use store::sorted_unique;
