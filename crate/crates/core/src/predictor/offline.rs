//! Per-key frequency predictor.
//!
//! Candidate counts for a property key come from a training corpus. Values
//! of the same key visible in the query's own context that the corpus never
//! saw get a pseudo-count of one, which is how same-model substitutions
//! (one Goto tag for another) surface. Block names are never learned from
//! the corpus; name candidates come only from the query context.

use std::collections::BTreeMap;

use super::{check_request, sort_predictions, Prediction, Predictor, PredictorError, PredictorHandshake};
use crate::ingest::{parse_model, CorpusRecord, ModelFormat};
use crate::ir::{ModelIR, SiteTarget};
use crate::masking::{tokenize, MaskedSequence, TokenKind, DEFAULT_PLACEHOLDER};

const NAME_KEY: &str = "name";
const STRUCTURAL_KEYS: &[&str] = &["id", "type", "sample_time", "properties", "blocks", "connections"];

#[derive(Debug, Clone, Default)]
pub struct OfflinePredictor {
    counts: BTreeMap<String, BTreeMap<String, u64>>,
    mask_token: String,
}

impl OfflinePredictor {
    pub fn new() -> Self {
        OfflinePredictor { counts: BTreeMap::new(), mask_token: DEFAULT_PLACEHOLDER.to_string() }
    }

    pub fn with_mask_token(mut self, mask_token: impl Into<String>) -> Self {
        self.mask_token = mask_token.into();
        self
    }

    pub fn observe(&mut self, key: &str, token: &str) {
        *self
            .counts
            .entry(key.to_string())
            .or_default()
            .entry(token.to_string())
            .or_default() += 1;
    }

    /// Count every property value of every model.
    pub fn fit_models<'a>(&mut self, models: impl IntoIterator<Item = &'a ModelIR>) {
        for m in models {
            for b in &m.blocks {
                for (k, v) in &b.properties {
                    self.observe(k, &v.token());
                }
            }
        }
    }

    /// Train from corpus records (their unmasked text).
    pub fn fit_corpus(&mut self, records: &[CorpusRecord]) -> Result<(), crate::ingest::IngestError> {
        let models = records
            .iter()
            .map(|r| parse_model(&r.text, ModelFormat::Json).map(|p| p.model))
            .collect::<Result<Vec<_>, _>>()?;
        self.fit_models(&models);
        Ok(())
    }

    pub fn vocabulary(&self, key: &str) -> Option<&BTreeMap<String, u64>> {
        self.counts.get(key)
    }
}

impl OfflinePredictor {
    /// Wire-level query: `text` holds exactly one mask token; the property
    /// key is read from the `"Key": <mask>` pair around it.
    pub fn predict_text(&self, text: &str, top_k: usize) -> Result<Vec<Prediction>, PredictorError> {
        if top_k == 0 {
            return Err(PredictorError::InvalidInput("top_k must be at least 1".into()));
        }
        let found = text.matches(self.mask_token.as_str()).count();
        if found != 1 {
            return Err(PredictorError::InvalidInput(format!(
                "expected exactly one `{}` placeholder, found {found}",
                self.mask_token
            )));
        }
        let at = text.find(self.mask_token.as_str()).expect("placeholder present");
        let toks = tokenize(text);
        let i = toks.iter().position(|t| t.start <= at && at < t.end).expect("placeholder inside a token");
        let key = (i >= 2
            && toks[i - 2].kind == TokenKind::Str
            && &text[toks[i - 1].start..toks[i - 1].end] == ":")
            .then(|| serde_json::from_str::<String>(&text[toks[i - 2].start..toks[i - 2].end]).ok())
            .flatten()
            .ok_or_else(|| PredictorError::InvalidInput("placeholder is not a property value".into()))?;
        Ok(self.rank(&key, text, &self.mask_token, top_k))
    }

    fn rank(&self, key: &str, text: &str, placeholder: &str, top_k: usize) -> Vec<Prediction> {
        if STRUCTURAL_KEYS.contains(&key) {
            return Vec::new();
        }
        let mut table: BTreeMap<String, u64> =
            if key == NAME_KEY { BTreeMap::new() } else { self.counts.get(key).cloned().unwrap_or_default() };
        for v in context_values(text, key, placeholder) {
            table.entry(v).or_insert(1);
        }
        let total: u64 = table.values().sum();
        if total == 0 {
            return Vec::new();
        }
        let mut out: Vec<Prediction> = table
            .into_iter()
            .map(|(token, c)| Prediction { token, score: c as f64 / total as f64 })
            .collect();
        sort_predictions(&mut out);
        out.truncate(top_k);
        out
    }
}

/// Values printed under `key` in a (possibly truncated) rendering.
fn context_values(text: &str, key: &str, placeholder: &str) -> Vec<String> {
    let toks = tokenize(text);
    let mut out = Vec::new();
    for w in toks.windows(3) {
        let (k, colon, v) = (w[0], w[1], w[2]);
        if k.kind != TokenKind::Str || &text[colon.start..colon.end] != ":" {
            continue;
        }
        let Ok(found) = serde_json::from_str::<String>(&text[k.start..k.end]) else { continue };
        if found != key {
            continue;
        }
        let raw = &text[v.start..v.end];
        let value = match v.kind {
            TokenKind::Str => match serde_json::from_str::<String>(raw) {
                Ok(s) => s,
                Err(_) => continue,
            },
            TokenKind::Word => raw.to_string(),
            TokenKind::Punct => continue,
        };
        if value != placeholder {
            out.push(value);
        }
    }
    out
}

impl Predictor for OfflinePredictor {
    fn handshake(&self) -> Result<PredictorHandshake, PredictorError> {
        Ok(PredictorHandshake {
            mask_token: self.mask_token.clone(),
            max_input_tokens: 4096,
            model_id: "offline-frequency".to_string(),
        })
    }

    fn predict(&self, seq: &MaskedSequence, top_k: usize) -> Result<Vec<Prediction>, PredictorError> {
        check_request(seq, top_k)?;
        let key = match &seq.site.target {
            SiteTarget::Name => NAME_KEY,
            SiteTarget::Property(k) => k.as_str(),
        };
        Ok(self.rank(key, &seq.text, &seq.placeholder, top_k))
    }
}
