//! Mapping of single-value mutations onto the block-based fault-pattern taxonomy.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ir::{BlockType, PropertyValue, SiteTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MutationPattern {
    SignalDataTypes,
    GotoFrom,
    SaturateOnIntegerOverflow,
    ConstantGain,
    Operators,
    InitialConditionsSampleTime,
    StateflowTransitionConditions,
    StateflowVariableNames,
    StateflowActions,
    StateflowKeywords,
    Unclassified,
}

impl MutationPattern {
    /// The ten taxonomy rows (everything except `Unclassified`).
    pub const ROWS: [MutationPattern; 10] = [
        MutationPattern::SignalDataTypes,
        MutationPattern::GotoFrom,
        MutationPattern::SaturateOnIntegerOverflow,
        MutationPattern::ConstantGain,
        MutationPattern::Operators,
        MutationPattern::InitialConditionsSampleTime,
        MutationPattern::StateflowTransitionConditions,
        MutationPattern::StateflowVariableNames,
        MutationPattern::StateflowActions,
        MutationPattern::StateflowKeywords,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MutationPattern::SignalDataTypes => "Mutate signal data types",
            MutationPattern::GotoFrom => "Mutate GoTo/From blocks",
            MutationPattern::SaturateOnIntegerOverflow => "Mutate \"Saturate on integer overflow\"",
            MutationPattern::ConstantGain => "Mutate constant and gain values",
            MutationPattern::Operators => "Mutate math, relational and logical operator blocks",
            MutationPattern::InitialConditionsSampleTime => "Mutate initial conditions and sample time",
            MutationPattern::StateflowTransitionConditions => "Mutate Stateflow transition conditions",
            MutationPattern::StateflowVariableNames => "Mutate Stateflow variable names",
            MutationPattern::StateflowActions => "Mutate Stateflow actions",
            MutationPattern::StateflowKeywords => "Mutate Stateflow keywords",
            MutationPattern::Unclassified => "Unclassified",
        }
    }
}

impl fmt::Display for MutationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MutationPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ROWS
            .iter()
            .chain(std::iter::once(&MutationPattern::Unclassified))
            .find(|p| p.label() == s)
            .copied()
            .ok_or_else(|| format!("unknown mutation pattern `{s}`"))
    }
}

impl Serialize for MutationPattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for MutationPattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Temporal and event keywords of the state-machine action language.
pub const STATEFLOW_KEYWORDS: &[&str] = &["before", "after", "at", "every", "on", "entry", "during", "exit"];

static EXPR_TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[A-Za-z_][A-Za-z0-9_]*|\d+(?:\.\d+)?|==|~=|!=|<=|>=|&&|\|\||\S").unwrap());

fn expr_tokens(s: &str) -> Vec<&str> {
    EXPR_TOKEN.find_iter(s).map(|m| m.as_str()).collect()
}

fn is_identifier(t: &str) -> bool {
    t.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
}

fn stateflow_pattern(key: &str, original: &str, replacement: &str) -> MutationPattern {
    let (a, b) = (expr_tokens(original), expr_tokens(replacement));
    if a.len() == b.len() {
        let diffs: Vec<(&str, &str)> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, y)| (*x, *y)).collect();
        let kw = |t: &str| STATEFLOW_KEYWORDS.contains(&t);
        if !diffs.is_empty() && diffs.iter().all(|(x, y)| kw(x) && kw(y)) {
            return MutationPattern::StateflowKeywords;
        }
        if !diffs.is_empty()
            && diffs
                .iter()
                .all(|(x, y)| is_identifier(x) && is_identifier(y) && !kw(x) && !kw(y))
        {
            return MutationPattern::StateflowVariableNames;
        }
    }
    let key = key.to_ascii_lowercase();
    if key.contains("condition") || key.contains("guard") {
        MutationPattern::StateflowTransitionConditions
    } else if ["action", "entry", "during", "exit"].iter().any(|p| key.contains(p)) {
        MutationPattern::StateflowActions
    } else if key.contains("variable") || key.contains("data") {
        MutationPattern::StateflowVariableNames
    } else {
        MutationPattern::Unclassified
    }
}

/// Pattern of replacing `original` with `replacement` at `target` of a block of type `block_type`.
pub fn classify_change(
    block_type: BlockType,
    target: &SiteTarget,
    original: &PropertyValue,
    replacement: &PropertyValue,
) -> MutationPattern {
    let key = match target {
        SiteTarget::Name => {
            return match block_type {
                BlockType::Goto | BlockType::From => MutationPattern::GotoFrom,
                BlockType::StateflowStub => MutationPattern::StateflowVariableNames,
                _ => MutationPattern::Unclassified,
            }
        }
        SiteTarget::Property(k) => k.as_str(),
    };
    if block_type == BlockType::StateflowStub {
        return stateflow_pattern(key, &original.token(), &replacement.token());
    }
    match key {
        "GotoTag" => MutationPattern::GotoFrom,
        "Value" | "Gain" | "Threshold" | "UpperLimit" | "LowerLimit" => MutationPattern::ConstantGain,
        "Operator" | "Signs" | "Inputs" => MutationPattern::Operators,
        "InitialCondition" | "SampleTime" => MutationPattern::InitialConditionsSampleTime,
        "OutDataTypeStr" => MutationPattern::SignalDataTypes,
        "SaturateOnIntegerOverflow" => MutationPattern::SaturateOnIntegerOverflow,
        _ => MutationPattern::Unclassified,
    }
}
