//! Model file ingestion and fine-tuning corpus construction.

mod corpus;
mod json;
mod xml;

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ir::{Diagnostic, ModelIR};

pub use corpus::{build_corpus, read_jsonl, write_jsonl, CorpusRecord, MaskTarget, DEFAULT_MASK_RATE};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("cannot build a corpus from zero models")]
    EmptyCorpus,
    #[error("mask rate {0} is outside (0, 1)")]
    InvalidRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFormat {
    Xml,
    Json,
}

impl ModelFormat {
    /// Guess from a file extension (`.xml`, `.json`).
    pub fn from_path(path: &Path) -> Option<ModelFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "xml" | "mdl" => Some(ModelFormat::Xml),
            "json" => Some(ModelFormat::Json),
            _ => None,
        }
    }
}

impl FromStr for ModelFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xml" => Ok(ModelFormat::Xml),
            "json" => Ok(ModelFormat::Json),
            other => Err(format!("unknown model format `{other}` (expected xml or json)")),
        }
    }
}

/// A parsed model plus non-fatal diagnostics (e.g. unknown block types).
#[derive(Debug, Clone)]
pub struct Parsed {
    pub model: ModelIR,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn parse_model(source: &str, format: ModelFormat) -> Result<Parsed, IngestError> {
    match format {
        ModelFormat::Xml => xml::parse(source),
        ModelFormat::Json => json::parse(source),
    }
}
