//! Masked-language-model fine-tuning corpus.
//!
//! One record per model. Maskable tokens are whole value literals: every
//! property value and every block name. Structural punctuation, keys, ids
//! and type names are never masked.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::ir::{render_with_spans, ModelIR};

pub const DEFAULT_MASK_RATE: f64 = 0.15;

/// A masked placeholder and the literal it replaced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskTarget {
    /// Byte offset of the placeholder inside `masked_text`.
    pub position: usize,
    /// The replaced text, exactly as it appeared (string contents without quotes).
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub model_name: String,
    pub text: String,
    pub masked_text: String,
    pub targets: Vec<MaskTarget>,
}

impl CorpusRecord {
    /// Put the targets back; yields `text` for every well-formed record.
    pub fn unmask(&self, placeholder: &str) -> String {
        let mut out = self.masked_text.clone();
        for t in self.targets.iter().rev() {
            out.replace_range(t.position..t.position + placeholder.len(), &t.token);
        }
        out
    }
}

fn record(model: &ModelIR, mask_rate: f64, seed: u64, stream: u64, placeholder: &str) -> CorpusRecord {
    let (text, spans) = render_with_spans(model);
    // Inner ranges: strings lose their quotes so the placeholder sits inside them.
    let inner: Vec<(usize, usize)> = spans
        .iter()
        .map(|s| {
            if text.as_bytes()[s.start] == b'"' {
                (s.start + 1, s.end - 1)
            } else {
                (s.start, s.end)
            }
        })
        .collect();

    let count = ((inner.len() as f64) * mask_rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut chosen = sample(&mut rng, inner.len(), count.min(inner.len())).into_vec();
    chosen.sort_unstable();

    let mut masked_text = String::with_capacity(text.len());
    let mut targets = Vec::with_capacity(chosen.len());
    let mut cursor = 0;
    for i in chosen {
        let (start, end) = inner[i];
        masked_text.push_str(&text[cursor..start]);
        targets.push(MaskTarget { position: masked_text.len(), token: text[start..end].to_string() });
        masked_text.push_str(placeholder);
        cursor = end;
    }
    masked_text.push_str(&text[cursor..]);

    CorpusRecord { model_name: model.name.clone(), text, masked_text, targets }
}

/// Build one masked record per model; deterministic for a given seed.
pub fn build_corpus(
    models: &[ModelIR],
    mask_rate: f64,
    seed: u64,
    placeholder: &str,
) -> Result<Vec<CorpusRecord>, IngestError> {
    if models.is_empty() {
        return Err(IngestError::EmptyCorpus);
    }
    if !(mask_rate > 0.0 && mask_rate < 1.0) {
        return Err(IngestError::InvalidRate(mask_rate));
    }
    Ok(models
        .par_iter()
        .enumerate()
        .map(|(i, m)| record(m, mask_rate, seed, i as u64, placeholder))
        .collect())
}

/// JSON lines, LF-terminated.
pub fn write_jsonl(records: &[CorpusRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn read_jsonl(source: &str) -> Result<Vec<CorpusRecord>, IngestError> {
    source
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| IngestError::Parse { line: i + 1, message: e.to_string() })
        })
        .collect()
}
