//! Shared-context sentence sets by sampling and lexical substitution.
//!
//! For each scale, `n` corpus sentences containing one of its adjectives
//! (in the listed, unmarked form) are sampled. Each sampled sentence is
//! then copied once per other adjective of the scale with the target token
//! replaced, so every adjective of a scale is seen in the same `n`
//! contexts.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::par;
use crate::scale::{Adjective, Scale, ScaleDataset};
use crate::{Error, Result};

/// Sentences sampled per scale.
pub const DEFAULT_CONTEXTS: usize = 10;

/// A token with its byte span in the sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '«' | '»' | '“' | '”' | '‘' | '’' | '„' | '…' | '¿' | '¡' | '·' | '\u{2013}' | '\u{2014}')
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '’')
}

/// Whitespace tokenization with punctuation split off into separate
/// tokens. Hyphens and apostrophes between two alphanumeric characters
/// stay inside the word.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut chunk_start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = chunk_start.take() {
                split_chunk(text, s, i, &mut tokens);
            }
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    if let Some(s) = chunk_start {
        split_chunk(text, s, text.len(), &mut tokens);
    }
    tokens
}

fn split_chunk<'a>(text: &'a str, start: usize, end: usize, tokens: &mut Vec<Token<'a>>) {
    let mut push = |s: usize, e: usize| {
        tokens.push(Token {
            text: &text[s..e],
            start: s,
            end: e,
        })
    };
    let chars: Vec<(usize, char)> = text[start..end]
        .char_indices()
        .map(|(o, c)| (start + o, c))
        .collect();
    let mut word_start: Option<usize> = None;
    for (k, &(off, c)) in chars.iter().enumerate() {
        let inner = is_joiner(c)
            && k > 0
            && k + 1 < chars.len()
            && chars[k - 1].1.is_alphanumeric()
            && chars[k + 1].1.is_alphanumeric();
        if is_punct(c) && !inner {
            if let Some(ws) = word_start.take() {
                push(ws, off);
            }
            push(off, off + c.len_utf8());
        } else if word_start.is_none() {
            word_start = Some(off);
        }
    }
    if let Some(ws) = word_start {
        push(ws, end);
    }
}

/// The lowercase token sequence of an adjective surface.
fn surface_tokens(surface: &str) -> Vec<String> {
    tokenize(surface).iter().map(|t| t.text.to_lowercase()).collect()
}

fn matches_at(tokens: &[Token<'_>], at: usize, pattern: &[String]) -> bool {
    at + pattern.len() <= tokens.len()
        && pattern
            .iter()
            .zip(&tokens[at..])
            .all(|(p, t)| t.text.to_lowercase() == *p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Origin {
    Sampled,
    Substituted,
}

/// One sentence with one target adjective slot.
///
/// `target_index` is the index of the adjective's first token under
/// [`tokenize`]; a multiword adjective covers as many tokens as its own
/// tokenization. `target_char_span` is the same slot in characters (not
/// bytes), end exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceContext {
    pub scale_id: String,
    pub context_id: String,
    pub adjective: String,
    pub text: String,
    pub target_index: usize,
    pub target_char_span: (usize, usize),
    pub origin: Origin,
}

impl SentenceContext {
    /// Byte span of the target slot, after checking it holds the adjective.
    pub fn target_span(&self) -> Result<(usize, usize)> {
        let corrupt = |message: String| Error::CorruptContext {
            context_id: self.context_id.clone(),
            message,
        };
        let tokens = tokenize(&self.text);
        let pattern = surface_tokens(&self.adjective);
        if pattern.is_empty() {
            return Err(corrupt("empty adjective".into()));
        }
        if !matches_at(&tokens, self.target_index, &pattern) {
            let found = tokens
                .get(self.target_index)
                .map_or("<end of sentence>".to_string(), |t| t.text.to_string());
            return Err(corrupt(format!(
                "token {} is `{found}`, expected `{}`",
                self.target_index, self.adjective
            )));
        }
        let start = tokens[self.target_index].start;
        let end = tokens[self.target_index + pattern.len() - 1].end;
        if char_span(&self.text, start, end) != self.target_char_span {
            return Err(corrupt("character span does not match target token".into()));
        }
        Ok((start, end))
    }
}

fn char_span(text: &str, start: usize, end: usize) -> (usize, usize) {
    let s = text[..start].chars().count();
    (s, s + text[start..end].chars().count())
}

impl fmt::Display for SentenceContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}] {}", self.scale_id, self.adjective, self.text)
    }
}

/// Hex sha256 of `scale_id`, a NUL byte and the sampled sentence.
pub fn context_id(scale_id: &str, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(scale_id.as_bytes());
    h.update([0u8]);
    h.update(text.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConstraints {
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Drop exact duplicate sentences (after trimming) before sampling.
    pub dedup: bool,
}

impl Default for SamplingConstraints {
    fn default() -> Self {
        SamplingConstraints {
            min_tokens: 10,
            max_tokens: 100,
            dedup: true,
        }
    }
}

/// Earliest occurrence of any scale adjective; at one position the
/// longest match wins, then scale order.
fn first_target<'s>(tokens: &[Token<'_>], patterns: &'s [(&'s Adjective, Vec<String>)]) -> Option<(usize, &'s Adjective)> {
    (0..tokens.len()).find_map(|i| {
        patterns
            .iter()
            .filter(|(_, p)| matches_at(tokens, i, p))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(std::cmp::Ordering::Greater))
            .map(|(a, _)| (i, *a))
    })
}

fn sampled_record(scale: &Scale, text: &str, index: usize, adj: &Adjective) -> SentenceContext {
    let tokens = tokenize(text);
    let len = surface_tokens(adj.surface()).len();
    let (start, end) = (tokens[index].start, tokens[index + len - 1].end);
    SentenceContext {
        scale_id: scale.id.clone(),
        context_id: context_id(&scale.id, text),
        adjective: adj.surface().to_string(),
        text: text.to_string(),
        target_index: index,
        target_char_span: char_span(text, start, end),
        origin: Origin::Sampled,
    }
}

/// Sample `n` eligible sentences for `scale`, uniformly under `seed`.
/// The output follows corpus order.
pub fn sample_contexts<S: AsRef<str>>(
    corpus: &[S],
    scale: &Scale,
    n: usize,
    seed: u64,
    constraints: &SamplingConstraints,
) -> Result<Vec<SentenceContext>> {
    let patterns: Vec<(&Adjective, Vec<String>)> = scale
        .adjectives()
        .map(|a| (a, surface_tokens(a.surface())))
        .collect();
    let mut seen = BTreeSet::new();
    let mut eligible: Vec<(&str, usize, &Adjective)> = Vec::new();
    for raw in corpus {
        let text = raw.as_ref().trim();
        let tokens = tokenize(text);
        if tokens.len() < constraints.min_tokens || tokens.len() > constraints.max_tokens {
            continue;
        }
        let Some((index, adj)) = first_target(&tokens, &patterns) else {
            continue;
        };
        if constraints.dedup && !seen.insert(text) {
            continue;
        }
        eligible.push((text, index, adj));
    }
    if eligible.len() < n {
        return Err(Error::InsufficientCorpus {
            scale_id: scale.id.clone(),
            needed: n,
            found: eligible.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, eligible.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .map(|i| {
            let (text, index, adj) = eligible[i];
            sampled_record(scale, text, index, adj)
        })
        .collect())
}

/// Expand every sampled context into one record per scale adjective.
/// Records come grouped by context, adjectives in scale order.
pub fn substitute_all(contexts: &[SentenceContext], scale: &Scale) -> Result<Vec<SentenceContext>> {
    let mut out = Vec::with_capacity(contexts.len() * scale.len());
    for ctx in contexts {
        if ctx.scale_id != scale.id {
            return Err(Error::CorruptContext {
                context_id: ctx.context_id.clone(),
                message: format!("belongs to scale `{}`, not `{}`", ctx.scale_id, scale.id),
            });
        }
        if !scale.contains(&ctx.adjective) {
            return Err(Error::CorruptContext {
                context_id: ctx.context_id.clone(),
                message: format!("`{}` is not in scale `{}`", ctx.adjective, scale.id),
            });
        }
        let (start, end) = ctx.target_span()?;
        for adj in scale.adjectives() {
            if adj.surface() == ctx.adjective {
                out.push(ctx.clone());
                continue;
            }
            let text = format!("{}{}{}", &ctx.text[..start], adj.surface(), &ctx.text[end..]);
            let new_end = start + adj.surface().len();
            out.push(SentenceContext {
                scale_id: ctx.scale_id.clone(),
                context_id: ctx.context_id.clone(),
                adjective: adj.surface().to_string(),
                target_char_span: char_span(&text, start, new_end),
                text,
                target_index: ctx.target_index,
                origin: Origin::Substituted,
            });
        }
    }
    Ok(out)
}

/// Per-scale seed: the first 8 bytes of sha256(seed, scale_id).
pub fn scale_seed(seed: u64, scale_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(scale_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Sample and substitute for every scale of `ds`. Scales are processed
/// independently (in parallel when enabled); output follows scale order.
pub fn generate<S: AsRef<str> + Sync>(
    corpus: &[S],
    ds: &ScaleDataset,
    n: usize,
    seed: u64,
    constraints: &SamplingConstraints,
) -> Result<Vec<SentenceContext>> {
    let per_scale = par::try_map(ds.scales(), |scale| {
        let sampled = sample_contexts(corpus, scale, n, scale_seed(seed, &scale.id), constraints)?;
        substitute_all(&sampled, scale)
    })?;
    Ok(per_scale.into_iter().flatten().collect())
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[SentenceContext]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read and validate a sentence file.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<SentenceContext>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SentenceContext = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        rec.target_span()?;
        out.push(rec);
    }
    Ok(out)
}

/// One sentence per non-empty line.
pub fn read_corpus<R: BufRead>(input: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(line);
        }
    }
    Ok(out)
}
