//! Per-block-type property registry.
//!
//! Every supported block type declares the properties it understands, the
//! order they are rendered in, and the kind of value each one holds. The
//! registry drives parsing (which JSON strings become enum symbols),
//! validation, rendering order and the rule-based operators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const RELATIONAL_OPS: &[&str] = &["==", "~=", "<", "<=", ">", ">="];
pub const LOGICAL_OPS: &[&str] = &["AND", "OR", "XOR", "NAND", "NOR", "NOT"];
pub const DATA_TYPES: &[&str] = &["double", "single", "int32"];
pub const ON_OFF: &[&str] = &["on", "off"];

/// What a property value is allowed to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    /// Finite real number.
    Number,
    /// Free-form string.
    Text,
    /// Identifier used as a Goto/From tag.
    Tag,
    /// One symbol out of a fixed vocabulary.
    Enum(&'static [&'static str]),
    /// Non-empty string over a fixed alphabet (e.g. Sum signs).
    Pattern(&'static [char]),
}

impl ValueKind {
    pub fn is_symbolic(self) -> bool {
        matches!(self, ValueKind::Enum(_) | ValueKind::Pattern(_))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PropertySpec {
    pub key: &'static str,
    pub kind: ValueKind,
    pub required: bool,
}

const fn req(key: &'static str, kind: ValueKind) -> PropertySpec {
    PropertySpec { key, kind, required: true }
}

const fn opt(key: &'static str, kind: ValueKind) -> PropertySpec {
    PropertySpec { key, kind, required: false }
}

const DTYPE: ValueKind = ValueKind::Enum(DATA_TYPES);
const SATURATE: ValueKind = ValueKind::Enum(ON_OFF);

const CONSTANT: &[PropertySpec] = &[req("Value", ValueKind::Number), opt("OutDataTypeStr", DTYPE)];
const GAIN: &[PropertySpec] = &[
    req("Gain", ValueKind::Number),
    opt("OutDataTypeStr", DTYPE),
    opt("SaturateOnIntegerOverflow", SATURATE),
];
const SUM: &[PropertySpec] = &[
    req("Signs", ValueKind::Pattern(&['+', '-'])),
    opt("OutDataTypeStr", DTYPE),
    opt("SaturateOnIntegerOverflow", SATURATE),
];
const PRODUCT: &[PropertySpec] = &[
    req("Inputs", ValueKind::Pattern(&['*', '/'])),
    opt("OutDataTypeStr", DTYPE),
    opt("SaturateOnIntegerOverflow", SATURATE),
];
const RELATIONAL: &[PropertySpec] = &[req("Operator", ValueKind::Enum(RELATIONAL_OPS))];
const LOGICAL: &[PropertySpec] = &[req("Operator", ValueKind::Enum(LOGICAL_OPS))];
const SWITCH: &[PropertySpec] = &[req("Threshold", ValueKind::Number)];
const DELAY: &[PropertySpec] = &[
    req("InitialCondition", ValueKind::Number),
    opt("SampleTime", ValueKind::Number),
];
const SATURATION: &[PropertySpec] = &[
    req("UpperLimit", ValueKind::Number),
    req("LowerLimit", ValueKind::Number),
];
const TAGGED: &[PropertySpec] = &[req("GotoTag", ValueKind::Tag)];

/// Supported block types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BlockType {
    Inport,
    Outport,
    Constant,
    Gain,
    Sum,
    Product,
    RelationalOperator,
    LogicalOperator,
    Switch,
    UnitDelay,
    DiscreteIntegrator,
    Saturation,
    Goto,
    From,
    StateflowStub,
}

impl BlockType {
    pub const ALL: [BlockType; 15] = [
        BlockType::Inport,
        BlockType::Outport,
        BlockType::Constant,
        BlockType::Gain,
        BlockType::Sum,
        BlockType::Product,
        BlockType::RelationalOperator,
        BlockType::LogicalOperator,
        BlockType::Switch,
        BlockType::UnitDelay,
        BlockType::DiscreteIntegrator,
        BlockType::Saturation,
        BlockType::Goto,
        BlockType::From,
        BlockType::StateflowStub,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BlockType::Inport => "Inport",
            BlockType::Outport => "Outport",
            BlockType::Constant => "Constant",
            BlockType::Gain => "Gain",
            BlockType::Sum => "Sum",
            BlockType::Product => "Product",
            BlockType::RelationalOperator => "RelationalOperator",
            BlockType::LogicalOperator => "LogicalOperator",
            BlockType::Switch => "Switch",
            BlockType::UnitDelay => "UnitDelay",
            BlockType::DiscreteIntegrator => "DiscreteIntegrator",
            BlockType::Saturation => "Saturation",
            BlockType::Goto => "Goto",
            BlockType::From => "From",
            BlockType::StateflowStub => "StateflowStub",
        }
    }

    /// Declared properties in rendering order. Stateflow stubs are open-ended.
    pub fn properties(self) -> &'static [PropertySpec] {
        match self {
            BlockType::Inport | BlockType::Outport | BlockType::StateflowStub => &[],
            BlockType::Constant => CONSTANT,
            BlockType::Gain => GAIN,
            BlockType::Sum => SUM,
            BlockType::Product => PRODUCT,
            BlockType::RelationalOperator => RELATIONAL,
            BlockType::LogicalOperator => LOGICAL,
            BlockType::Switch => SWITCH,
            BlockType::UnitDelay | BlockType::DiscreteIntegrator => DELAY,
            BlockType::Saturation => SATURATION,
            BlockType::Goto | BlockType::From => TAGGED,
        }
    }

    pub fn property(self, key: &str) -> Option<&'static PropertySpec> {
        self.properties().iter().find(|p| p.key == key)
    }

    /// Kind of value stored under `key`; undeclared keys hold free text.
    pub fn kind_of(self, key: &str) -> ValueKind {
        self.property(key).map_or(ValueKind::Text, |p| p.kind)
    }

    /// Position of `key` in the declared order, if declared.
    pub fn key_rank(self, key: &str) -> Option<usize> {
        self.properties().iter().position(|p| p.key == key)
    }

    /// Blocks whose output only depends on state from the previous step.
    pub fn is_delay(self) -> bool {
        matches!(self, BlockType::UnitDelay | BlockType::DiscreteIntegrator)
    }

    pub fn output_count(self) -> usize {
        match self {
            BlockType::Outport | BlockType::Goto | BlockType::StateflowStub => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for BlockType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown block type `{0}`")]
pub struct UnknownBlockType(pub String);

impl FromStr for BlockType {
    type Err = UnknownBlockType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // "Logic" is the vendor spelling of the logical operator block.
        if s == "Logic" {
            return Ok(BlockType::LogicalOperator);
        }
        BlockType::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownBlockType(s.to_string()))
    }
}

/// True when `tag` is usable as a Goto/From tag (a plain identifier).
pub fn is_valid_tag(tag: &str) -> bool {
    let mut chars = tag.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_type_names_round_trip() {
        for t in BlockType::ALL {
            assert_eq!(t.as_str().parse::<BlockType>().unwrap(), t);
        }
        assert_eq!("Logic".parse::<BlockType>().unwrap(), BlockType::LogicalOperator);
        assert!("SubSystem".parse::<BlockType>().is_err());
    }

    #[test]
    fn tags() {
        assert!(is_valid_tag("SL_Input"));
        assert!(is_valid_tag("_x1"));
        assert!(!is_valid_tag("1abc"));
        assert!(!is_valid_tag(""));
        assert!(!is_valid_tag("a b"));
    }
}
