//! The `SADJ` dump format.
//!
//! ```text
//! magic      4 bytes  "SADJ"
//! version    u16 LE   (1)
//! manifest   u32 LE length + UTF-8 JSON
//! records    until EOF:
//!   adjective   u32 LE length + UTF-8
//!   context_id  u32 LE length + UTF-8
//!   pieces      u16 LE wordpiece count (>= 1)
//!   values      (L+1) * pieces * d f32 LE, layer-major then piece then dim
//! ```
//!
//! Records written by [`write_dump`] are sorted by `(adjective, context_id)`.
//! The reader accepts any order, since producers stream records in input
//! order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SADJ";
pub const VERSION: u16 = 1;
pub const DTYPE_F32_LE: &str = "f32le";

/// Context id used for static (non-contextual) embeddings, so that every
/// adjective of a static dump shares the same single context.
pub const STATIC_CONTEXT_ID: &str = "static";

const MAX_STRING_BYTES: u32 = 1 << 20;
const MAX_MANIFEST_BYTES: u32 = 16 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpManifest {
    pub model_id: String,
    /// Hidden layers `L`; the dump stores layers `0..=L`, layer 0 being the
    /// embedding layer.
    pub num_layers: usize,
    pub hidden_dim: usize,
    #[serde(default)]
    pub pooling_ready: bool,
    #[serde(default = "default_dtype")]
    pub dtype: String,
    /// Producer-specific fields (casing, tokenizer, ...), kept verbatim.
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

fn default_dtype() -> String {
    DTYPE_F32_LE.to_string()
}

impl DumpManifest {
    pub fn new(model_id: impl Into<String>, num_layers: usize, hidden_dim: usize) -> Self {
        DumpManifest {
            model_id: model_id.into(),
            num_layers,
            hidden_dim,
            pooling_ready: true,
            dtype: default_dtype(),
            extra: BTreeMap::new(),
        }
    }

    /// Number of stored layers, `L + 1`.
    pub fn stored_layers(&self) -> usize {
        self.num_layers + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_layers < 1 {
            return Err(Error::Format("manifest num_layers must be >= 1".into()));
        }
        if self.hidden_dim < 1 {
            return Err(Error::Format("manifest hidden_dim must be >= 1".into()));
        }
        if self.dtype != DTYPE_F32_LE {
            return Err(Error::Format(format!(
                "unsupported dtype `{}`, expected `{DTYPE_F32_LE}`",
                self.dtype
            )));
        }
        Ok(())
    }
}

/// Wordpiece vectors of one adjective occurrence at every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextEmbedding {
    pub adjective: String,
    pub context_id: String,
    layers: usize,
    pieces: usize,
    dim: usize,
    data: Vec<f32>,
}

impl ContextEmbedding {
    /// `layer_vectors[layer][piece]` is a `dim`-vector.
    pub fn new(
        adjective: impl Into<String>,
        context_id: impl Into<String>,
        layer_vectors: Vec<Vec<Vec<f32>>>,
    ) -> Result<Self> {
        let layers = layer_vectors.len();
        let pieces = layer_vectors.first().map_or(0, Vec::len);
        let dim = layer_vectors
            .first()
            .and_then(|l| l.first())
            .map_or(0, Vec::len);
        let mut data = Vec::with_capacity(layers * pieces * dim);
        for layer in &layer_vectors {
            if layer.len() != pieces {
                return Err(Error::Format(
                    "wordpiece count differs between layers".into(),
                ));
            }
            for piece in layer {
                if piece.len() != dim {
                    return Err(Error::Format("vector dimension differs".into()));
                }
                data.extend_from_slice(piece);
            }
        }
        Self::from_flat(adjective, context_id, layers, pieces, dim, data)
    }

    /// Build from layer-major flat values.
    pub fn from_flat(
        adjective: impl Into<String>,
        context_id: impl Into<String>,
        layers: usize,
        pieces: usize,
        dim: usize,
        data: Vec<f32>,
    ) -> Result<Self> {
        let rec = ContextEmbedding {
            adjective: adjective.into(),
            context_id: context_id.into(),
            layers,
            pieces,
            dim,
            data,
        };
        rec.check()?;
        Ok(rec)
    }

    fn check(&self) -> Result<()> {
        if self.adjective.is_empty() || self.context_id.is_empty() {
            return Err(Error::Format("empty adjective or context id".into()));
        }
        if self.layers == 0 || self.pieces == 0 || self.dim == 0 {
            return Err(Error::Format(format!(
                "record ({}, {}) needs >= 1 layer, wordpiece and dimension",
                self.adjective, self.context_id
            )));
        }
        if self.pieces > u16::MAX as usize {
            return Err(Error::Format("more than 65535 wordpieces".into()));
        }
        if self.data.len() != self.layers * self.pieces * self.dim {
            return Err(Error::Format("payload length does not match shape".into()));
        }
        if let Some(pos) = self.data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Format(format!(
                "non-finite value at offset {pos} in record ({}, {})",
                self.adjective, self.context_id
            )));
        }
        Ok(())
    }

    /// Stored layers, `L + 1`.
    pub fn num_layers(&self) -> usize {
        self.layers
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Vector of wordpiece `piece` at `layer`.
    pub fn piece(&self, layer: usize, piece: usize) -> &[f32] {
        let start = (layer * self.pieces + piece) * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn values(&self) -> &[f32] {
        &self.data
    }

    fn key(&self) -> (&str, &str) {
        (&self.adjective, &self.context_id)
    }
}

pub(crate) fn check_against_manifest(manifest: &DumpManifest, rec: &ContextEmbedding) -> Result<()> {
    if rec.layers != manifest.stored_layers() || rec.dim != manifest.hidden_dim {
        return Err(Error::Format(format!(
            "record ({}, {}) has {} layers x dim {}, manifest says {} x {}",
            rec.adjective,
            rec.context_id,
            rec.layers,
            rec.dim,
            manifest.stored_layers(),
            manifest.hidden_dim
        )));
    }
    Ok(())
}

/// Write a dump, sorting records by `(adjective, context_id)`.
pub fn write_dump(path: &Path, manifest: &DumpManifest, records: &[ContextEmbedding]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_dump_to(&mut out, manifest, records)?;
    out.flush()?;
    Ok(())
}

pub fn write_dump_to<W: Write>(
    out: &mut W,
    manifest: &DumpManifest,
    records: &[ContextEmbedding],
) -> Result<()> {
    manifest.validate()?;
    let mut sorted: Vec<&ContextEmbedding> = records.iter().collect();
    sorted.sort_by(|a, b| a.key().cmp(&b.key()));
    for pair in sorted.windows(2) {
        if pair[0].key() == pair[1].key() {
            return Err(Error::Format(format!(
                "duplicate record ({}, {})",
                pair[0].adjective, pair[0].context_id
            )));
        }
    }
    for rec in &sorted {
        rec.check()?;
        check_against_manifest(manifest, rec)?;
    }

    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    let json = serde_json::to_vec(manifest)?;
    write_bytes(out, &json)?;
    for rec in sorted {
        write_bytes(out, rec.adjective.as_bytes())?;
        write_bytes(out, rec.context_id.as_bytes())?;
        out.write_all(&(rec.pieces as u16).to_le_bytes())?;
        for v in &rec.data {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn write_bytes<W: Write>(out: &mut W, bytes: &[u8]) -> Result<()> {
    let len = u32::try_from(bytes.len()).map_err(|_| Error::Format("string too long".into()))?;
    out.write_all(&len.to_le_bytes())?;
    out.write_all(bytes)?;
    Ok(())
}

/// Open a dump and return its manifest with a record iterator.
pub fn read_dump(path: &Path) -> Result<(DumpManifest, DumpReader<BufReader<File>>)> {
    DumpReader::new(BufReader::new(File::open(path)?))
}

/// Streaming record reader. Yields `Err` once on corruption, then stops.
pub struct DumpReader<R: Read> {
    input: R,
    manifest: DumpManifest,
    done: bool,
}

impl<R: Read> DumpReader<R> {
    pub fn new(mut input: R) -> Result<(DumpManifest, Self)> {
        let mut magic = [0u8; 4];
        read_exact(&mut input, &mut magic, "magic")?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic, not a SADJ dump".into()));
        }
        let mut version = [0u8; 2];
        read_exact(&mut input, &mut version, "version")?;
        let version = u16::from_le_bytes(version);
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported dump version {version}, expected {VERSION}"
            )));
        }
        let len = read_u32(&mut input, "manifest length")?;
        if len > MAX_MANIFEST_BYTES {
            return Err(Error::Format("manifest too large".into()));
        }
        let mut json = vec![0u8; len as usize];
        read_exact(&mut input, &mut json, "manifest")?;
        let manifest: DumpManifest = serde_json::from_slice(&json)
            .map_err(|e| Error::Format(format!("manifest: {e}")))?;
        manifest.validate()?;
        let reader = DumpReader {
            input,
            manifest: manifest.clone(),
            done: false,
        };
        Ok((manifest, reader))
    }

    pub fn manifest(&self) -> &DumpManifest {
        &self.manifest
    }

    fn next_record(&mut self) -> Result<Option<ContextEmbedding>> {
        let mut first = [0u8; 4];
        let got = read_up_to(&mut self.input, &mut first)?;
        if got == 0 {
            return Ok(None);
        }
        if got < first.len() {
            return Err(truncated("adjective length"));
        }
        let adjective = read_string_body(&mut self.input, u32::from_le_bytes(first), "adjective")?;
        let len = read_u32(&mut self.input, "context id length")?;
        let context_id = read_string_body(&mut self.input, len, "context id")?;
        let mut pieces = [0u8; 2];
        read_exact(&mut self.input, &mut pieces, "wordpiece count")?;
        let pieces = u16::from_le_bytes(pieces) as usize;
        if pieces == 0 {
            return Err(Error::Format(format!(
                "record ({adjective}, {context_id}) has zero wordpieces"
            )));
        }
        let layers = self.manifest.stored_layers();
        let dim = self.manifest.hidden_dim;
        let mut raw = vec![0u8; layers * pieces * dim * 4];
        read_exact(&mut self.input, &mut raw, "vector payload")?;
        let data = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        ContextEmbedding::from_flat(adjective, context_id, layers, pieces, dim, data).map(Some)
    }
}

impl<R: Read> Iterator for DumpReader<R> {
    type Item = Result<ContextEmbedding>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_record() {
            Ok(Some(rec)) => Some(Ok(rec)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

fn truncated(what: &str) -> Error {
    Error::Format(format!("truncated dump while reading {what}"))
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    input.read_exact(buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => truncated(what),
        _ => Error::Io(e),
    })
}

/// Fill as much of `buf` as possible; returns bytes read (short only at EOF).
fn read_up_to<R: Read>(input: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

fn read_u32<R: Read>(input: &mut R, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(input, &mut buf, what)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_string_body<R: Read>(input: &mut R, len: u32, what: &str) -> Result<String> {
    if len > MAX_STRING_BYTES {
        return Err(Error::Format(format!("{what} length {len} exceeds limit")));
    }
    let mut buf = vec![0u8; len as usize];
    read_exact(input, &mut buf, what)?;
    String::from_utf8(buf).map_err(|_| Error::Format(format!("{what} is not valid UTF-8")))
}
