//! Mask sites and masked sequences over a model's rendered text.

use serde::{Deserialize, Serialize};

use crate::ir::{render_with_spans, ModelIR, PropertyValue, SiteTarget};

pub const DEFAULT_PLACEHOLDER: &str = "<MASK>";
pub const DEFAULT_CONTEXT_WINDOW: usize = 256;

/// An addressable value occurrence in the rendered text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSite {
    pub block_id: String,
    pub target: SiteTarget,
    pub original: PropertyValue,
    /// Byte range of the canonical literal in `render_text` output.
    pub text_span: (usize, usize),
}

impl MaskSite {
    pub fn property_key(&self) -> Option<&str> {
        self.target.key()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskConfig {
    pub placeholder: String,
    /// Lexical tokens kept on each side of the placeholder.
    pub context_window: usize,
    /// Whether block names are mask sites.
    pub include_names: bool,
}

impl Default for MaskConfig {
    fn default() -> Self {
        MaskConfig {
            placeholder: DEFAULT_PLACEHOLDER.to_string(),
            context_window: DEFAULT_CONTEXT_WINDOW,
            include_names: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskedSequence {
    pub site: MaskSite,
    pub text: String,
    pub placeholder: String,
    pub context_window: usize,
    /// Byte range of the kept slice, in `render_text` coordinates.
    pub window: (usize, usize),
    /// Byte offset of the placeholder inside `text`.
    pub mask_offset: usize,
}

impl MaskedSequence {
    /// Splice `value` back in place of the placeholder.
    pub fn unmask(&self, value: &PropertyValue) -> String {
        let literal = match value {
            PropertyValue::Number(_) => value.canonical(),
            _ => {
                let quoted = value.canonical();
                quoted[1..quoted.len() - 1].to_string()
            }
        };
        let mut out = self.text.clone();
        out.replace_range(self.mask_offset..self.mask_offset + self.placeholder.len(), &literal);
        out
    }

    pub fn placeholder_count(&self) -> usize {
        self.text.matches(self.placeholder.as_str()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MaskError {
    #[error("unknown site: block `{block}`, {target}")]
    UnknownSite { block: String, target: String },
}

/// Lexical token of the rendered JSON (string, number, punctuation or bare word).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Punct,
    Str,
    Word,
}

/// Splits text into JSON lexical tokens. Unterminated strings run to the end.
pub fn tokenize(text: &str) -> Vec<Token> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if matches!(c, b'{' | b'}' | b'[' | b']' | b':' | b',') {
            tokens.push(Token { start: i, end: i + 1, kind: TokenKind::Punct });
            i += 1;
        } else if c == b'"' {
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' {
                i += if bytes[i] == b'\\' { 2 } else { 1 };
            }
            i = (i + 1).min(bytes.len());
            tokens.push(Token { start, end: i, kind: TokenKind::Str });
        } else {
            let start = i;
            while i < bytes.len()
                && !bytes[i].is_ascii_whitespace()
                && !matches!(bytes[i], b'{' | b'}' | b'[' | b']' | b':' | b',' | b'"')
            {
                i += 1;
            }
            tokens.push(Token { start, end: i, kind: TokenKind::Word });
        }
    }
    tokens
}

/// One site per name (if enabled) and property value, in rendering order.
pub fn enumerate_sites(model: &ModelIR, include_names: bool) -> Vec<MaskSite> {
    let (_, spans) = render_with_spans(model);
    spans
        .into_iter()
        .filter(|s| include_names || s.target != SiteTarget::Name)
        .map(|s| MaskSite {
            original: model
                .value_at(&s.block_id, &s.target)
                .expect("rendered spans address existing values"),
            block_id: s.block_id,
            target: s.target,
            text_span: (s.start, s.end),
        })
        .collect()
}

/// Replace the site's value with a placeholder and cut a token window around it.
pub fn mask(model: &ModelIR, site: &MaskSite, config: &MaskConfig) -> Result<MaskedSequence, MaskError> {
    let (full, spans) = render_with_spans(model);
    let span = spans
        .iter()
        .find(|s| s.block_id == site.block_id && s.target == site.target)
        .ok_or_else(|| MaskError::UnknownSite {
            block: site.block_id.clone(),
            target: site.target.to_string(),
        })?;

    let (start, end) = if full.as_bytes()[span.start] == b'"' {
        (span.start + 1, span.end - 1)
    } else {
        (span.start, span.end)
    };
    let placeholder = config.placeholder.as_str();
    let mut masked = String::with_capacity(full.len() + placeholder.len());
    masked.push_str(&full[..start]);
    masked.push_str(placeholder);
    masked.push_str(&full[end..]);
    let shift = placeholder.len() as isize - (end - start) as isize;

    let tokens = tokenize(&masked);
    let w = config.context_window;
    let (lo, hi) = if tokens.len() > 2 * w + 1 {
        let i = tokens
            .iter()
            .position(|t| t.start <= start && start < t.end)
            .expect("placeholder lies inside a token");
        (i.saturating_sub(w), (i + w).min(tokens.len() - 1))
    } else {
        (0, tokens.len().saturating_sub(1))
    };
    let (cut_start, cut_end) = if tokens.is_empty() || (lo == 0 && hi + 1 == tokens.len()) {
        (0, masked.len())
    } else {
        (tokens[lo].start, tokens[hi].end)
    };

    Ok(MaskedSequence {
        site: MaskSite {
            block_id: site.block_id.clone(),
            target: site.target.clone(),
            original: model
                .value_at(&site.block_id, &site.target)
                .expect("span exists so value exists"),
            text_span: (span.start, span.end),
        },
        text: masked[cut_start..cut_end].to_string(),
        placeholder: placeholder.to_string(),
        context_window: w,
        window: (cut_start, (cut_end as isize - shift) as usize),
        mask_offset: start - cut_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{render_text, Block, BlockType};

    fn tag_router() -> ModelIR {
        let mut m = ModelIR::new("tags", 0.1);
        m.add(Block::new("f_sl", "level_low", BlockType::From).with("GotoTag", PropertyValue::text("SL_Input")))
            .add(Block::new("f_sh", "level_high", BlockType::From).with("GotoTag", PropertyValue::text("SH_Input")));
        m
    }

    fn chain(n: usize) -> ModelIR {
        let mut m = ModelIR::new("chain", 0.1);
        for i in 0..n {
            m.add(
                Block::new(format!("g{i:03}"), format!("gain_{i}"), BlockType::Gain)
                    .with("Gain", PropertyValue::Number(i as f64 + 0.5)),
            );
        }
        m
    }

    #[test]
    fn two_goto_sites() {
        let m = tag_router();
        let sites = enumerate_sites(&m, false);
        assert_eq!(sites.len(), 2);
        assert!(sites.iter().all(|s| s.property_key() == Some("GotoTag")));
        assert_eq!(enumerate_sites(&m, true).len(), 4);
    }

    #[test]
    fn propertyless_inport() {
        let mut m = ModelIR::new("one", 1.0);
        m.add(Block::new("i", "in", BlockType::Inport));
        assert_eq!(enumerate_sites(&m, false).len(), 0);
        assert_eq!(enumerate_sites(&m, true).len(), 1);
    }

    #[test]
    fn site_text_matches_original() {
        let m = chain(5);
        let text = render_text(&m);
        for s in enumerate_sites(&m, true) {
            assert_eq!(&text[s.text_span.0..s.text_span.1], s.original.canonical());
        }
    }

    #[test]
    fn mask_keeps_other_tag_in_context() {
        let m = tag_router();
        let site = enumerate_sites(&m, false).into_iter().find(|s| s.block_id == "f_sl").unwrap();
        let seq = mask(&m, &site, &MaskConfig::default()).unwrap();
        assert!(seq.text.contains("\"GotoTag\": \"<MASK>\""), "{}", seq.text);
        assert!(seq.text.contains("SH_Input"));
        assert!(!seq.text.contains("SL_Input"));
        assert_eq!(seq.placeholder_count(), 1);
    }

    #[test]
    fn wide_window_is_a_no_op() {
        let m = chain(3);
        let site = &enumerate_sites(&m, false)[1];
        let seq = mask(&m, site, &MaskConfig { context_window: 10_000, ..MaskConfig::default() }).unwrap();
        let full = render_text(&m);
        assert_eq!(seq.window, (0, full.len()));
        assert_eq!(seq.unmask(&site.original), full);
    }

    #[test]
    fn truncated_window_is_centered_and_splices_back() {
        let m = chain(40);
        let full = render_text(&m);
        let sites = enumerate_sites(&m, false);
        let config = MaskConfig { context_window: 12, ..MaskConfig::default() };
        for site in &sites {
            let seq = mask(&m, site, &config).unwrap();
            assert_eq!(seq.unmask(&site.original), full[seq.window.0..seq.window.1]);
            let toks = tokenize(&seq.text);
            let i = toks.iter().position(|t| t.start <= seq.mask_offset && seq.mask_offset < t.end).unwrap();
            let left = i;
            let right = toks.len() - 1 - i;
            assert!(left <= 12 && right <= 12);
            // Clipping only happens at the ends of the text.
            if seq.window.0 > 0 {
                assert_eq!(left, 12);
            }
            if seq.window.1 < full.trim_end().len() {
                assert_eq!(right, 12);
            }
        }
    }

    #[test]
    fn unknown_site() {
        let m = chain(2);
        let mut site = enumerate_sites(&m, false)[0].clone();
        site.block_id = "zzz".into();
        assert!(matches!(mask(&m, &site, &MaskConfig::default()), Err(MaskError::UnknownSite { .. })));
    }

    #[test]
    fn tokenizer_keeps_strings_whole() {
        let toks = tokenize(r#"{"a b": "x\"y", "n": -1.5e3, "m": <MASK>}"#);
        let kinds: Vec<TokenKind> = toks.iter().map(|t| t.kind).collect();
        use TokenKind::*;
        assert_eq!(
            kinds,
            vec![Punct, Str, Punct, Str, Punct, Str, Punct, Word, Punct, Str, Punct, Word, Punct]
        );
    }
}
