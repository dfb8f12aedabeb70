//! Canonical in-memory block-diagram model.
//!
//! A [`ModelIR`] keeps exactly what is needed to mutate and simulate a
//! model: blocks with their type and properties, plus an explicit
//! connection list. Layout information is never stored.

mod graph;
mod render;
pub mod schema;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use graph::{DataflowGraph, GotoResolution};
pub use render::{format_number, render_ir_file, render_text, render_with_spans, ValueSpan};
pub use schema::{BlockType, PropertySpec, ValueKind};
pub use validate::{validate, Diagnostic, Location, Severity, ValidityReport};

/// A single property value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyValue {
    Number(f64),
    Text(String),
    /// Symbol drawn from the declared vocabulary of its key.
    Enum(String),
}

impl PropertyValue {
    pub fn text(s: impl Into<String>) -> Self {
        PropertyValue::Text(s.into())
    }

    pub fn symbol(s: impl Into<String>) -> Self {
        PropertyValue::Enum(s.into())
    }

    /// Canonical printing as it appears in rendered text.
    pub fn canonical(&self) -> String {
        match self {
            PropertyValue::Number(x) => format_number(*x),
            PropertyValue::Text(s) | PropertyValue::Enum(s) => {
                serde_json::to_string(s).expect("string serialization is infallible")
            }
        }
    }

    /// The bare token a predictor sees or emits: number literal or unquoted string.
    pub fn token(&self) -> String {
        match self {
            PropertyValue::Number(x) => format_number(*x),
            PropertyValue::Text(s) | PropertyValue::Enum(s) => s.clone(),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            PropertyValue::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PropertyValue::Text(s) | PropertyValue::Enum(s) => Some(s),
            PropertyValue::Number(_) => None,
        }
    }

    /// Equality of canonical forms (`-0` equals `0`).
    pub fn same_as(&self, other: &PropertyValue) -> bool {
        self.canonical() == other.canonical()
    }

    /// Interpret a predicted token according to the kind of the key it lands on.
    ///
    /// Numeric keys that receive a non-numeric token keep it as text, which
    /// validation later rejects.
    pub fn from_token(kind: ValueKind, token: &str) -> PropertyValue {
        match kind {
            ValueKind::Number => match parse_finite(token) {
                Some(x) => PropertyValue::Number(x),
                None => PropertyValue::Text(token.to_string()),
            },
            ValueKind::Enum(_) | ValueKind::Pattern(_) => PropertyValue::Enum(token.to_string()),
            ValueKind::Text | ValueKind::Tag => PropertyValue::Text(token.to_string()),
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Parse a decimal number literal, rejecting non-finite spellings (`inf`, `NaN`).
pub fn parse_finite(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.is_empty() || t.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
        return None;
    }
    t.parse::<f64>().ok().filter(|x| x.is_finite())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: String,
    pub name: String,
    pub block_type: BlockType,
    pub properties: BTreeMap<String, PropertyValue>,
}

impl Block {
    pub fn new(id: impl Into<String>, name: impl Into<String>, block_type: BlockType) -> Self {
        Block { id: id.into(), name: name.into(), block_type, properties: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: PropertyValue) -> Self {
        self.properties.insert(key.to_string(), value);
        self
    }

    pub fn prop(&self, key: &str) -> Option<&PropertyValue> {
        self.properties.get(key)
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.prop(key).and_then(PropertyValue::as_number)
    }

    pub fn string(&self, key: &str) -> Option<&str> {
        self.prop(key).and_then(PropertyValue::as_str)
    }

    /// Property keys in rendering order: declared keys first, then the rest by name.
    pub fn ordered_keys(&self) -> Vec<&str> {
        let mut keys: Vec<&str> = self.properties.keys().map(String::as_str).collect();
        keys.sort_by_key(|k| (self.block_type.key_rank(k).unwrap_or(usize::MAX), *k));
        keys
    }

    /// Number of input ports, if determinable from the properties.
    pub fn input_count(&self) -> Option<usize> {
        match self.block_type {
            BlockType::Inport | BlockType::Constant | BlockType::From | BlockType::StateflowStub => {
                Some(0)
            }
            BlockType::Outport
            | BlockType::Gain
            | BlockType::UnitDelay
            | BlockType::DiscreteIntegrator
            | BlockType::Saturation
            | BlockType::Goto => Some(1),
            BlockType::RelationalOperator => Some(2),
            BlockType::LogicalOperator => match self.string("Operator") {
                Some("NOT") => Some(1),
                _ => Some(2),
            },
            BlockType::Switch => Some(3),
            BlockType::Sum => pattern_len(self.string("Signs"), &['+', '-']),
            BlockType::Product => pattern_len(self.string("Inputs"), &['*', '/']),
        }
    }
}

fn pattern_len(s: Option<&str>, alphabet: &[char]) -> Option<usize> {
    let s = s?;
    (!s.is_empty() && s.chars().all(|c| alphabet.contains(&c))).then(|| s.chars().count())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    #[serde(rename = "src")]
    pub src_block: String,
    pub src_port: usize,
    #[serde(rename = "dst")]
    pub dst_block: String,
    pub dst_port: usize,
}

impl Connection {
    pub fn new(src: &str, src_port: usize, dst: &str, dst_port: usize) -> Self {
        Connection {
            src_block: src.to_string(),
            src_port,
            dst_block: dst.to_string(),
            dst_port,
        }
    }
}

/// Which value of a block a mask site or mutation addresses.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteTarget {
    /// The block name.
    Name,
    /// A property value under the given key.
    Property(String),
}

impl SiteTarget {
    pub fn property(key: &str) -> Self {
        SiteTarget::Property(key.to_string())
    }

    pub fn key(&self) -> Option<&str> {
        match self {
            SiteTarget::Name => None,
            SiteTarget::Property(k) => Some(k),
        }
    }
}

impl fmt::Display for SiteTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteTarget::Name => f.write_str("<name>"),
            SiteTarget::Property(k) => f.write_str(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IrError {
    #[error("unknown site: block `{block}`, {target}")]
    UnknownSite { block: String, target: String },
}

/// A block-diagram model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelIR {
    pub name: String,
    /// Seconds per simulation step.
    pub sample_time: f64,
    pub blocks: Vec<Block>,
    pub connections: Vec<Connection>,
}

impl ModelIR {
    pub fn new(name: impl Into<String>, sample_time: f64) -> Self {
        ModelIR { name: name.into(), sample_time, blocks: Vec::new(), connections: Vec::new() }
    }

    pub fn add(&mut self, block: Block) -> &mut Self {
        self.blocks.push(block);
        self
    }

    pub fn connect(&mut self, src: &str, src_port: usize, dst: &str, dst_port: usize) -> &mut Self {
        self.connections.push(Connection::new(src, src_port, dst, dst_port));
        self
    }

    pub fn block(&self, id: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn block_index(&self, id: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.id == id)
    }

    /// Ids of all blocks of the given type, in declaration order.
    pub fn ids_of(&self, block_type: BlockType) -> Vec<&str> {
        self.blocks
            .iter()
            .filter(|b| b.block_type == block_type)
            .map(|b| b.id.as_str())
            .collect()
    }

    /// Current value at a site.
    pub fn value_at(&self, block_id: &str, target: &SiteTarget) -> Option<PropertyValue> {
        let block = self.block(block_id)?;
        match target {
            SiteTarget::Name => Some(PropertyValue::Text(block.name.clone())),
            SiteTarget::Property(k) => block.prop(k).cloned(),
        }
    }

    /// Copy of the model with one value replaced.
    pub fn apply_delta(
        &self,
        block_id: &str,
        target: &SiteTarget,
        value: PropertyValue,
    ) -> Result<ModelIR, IrError> {
        let unknown = || IrError::UnknownSite {
            block: block_id.to_string(),
            target: target.to_string(),
        };
        let index = self.block_index(block_id).ok_or_else(unknown)?;
        let mut out = self.clone();
        let block = &mut out.blocks[index];
        match target {
            SiteTarget::Name => block.name = value.token(),
            SiteTarget::Property(key) => match block.properties.get_mut(key) {
                Some(slot) => *slot = value,
                None => return Err(unknown()),
            },
        }
        Ok(out)
    }

    /// Equality ignoring block declaration order.
    pub fn content_eq(&self, other: &ModelIR) -> bool {
        let by_id = |m: &ModelIR| -> BTreeMap<String, Block> {
            m.blocks.iter().map(|b| (b.id.clone(), b.clone())).collect()
        };
        self.name == other.name
            && self.sample_time == other.sample_time
            && self.blocks.len() == other.blocks.len()
            && by_id(self) == by_id(other)
            && self.connections == other.connections
    }
}
