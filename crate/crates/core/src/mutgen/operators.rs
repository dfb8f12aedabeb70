//! Rule-based mutation operator catalog.
//!
//! Each rule looks at one value of one block and proposes replacements.
//! Nothing here checks validity; the shared compile filter does that.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;

use crate::ir::schema::{DATA_TYPES, LOGICAL_OPS, RELATIONAL_OPS};
use crate::ir::{Block, BlockType, ModelIR, PropertyValue, SiteTarget};

/// Keywords exchanged by the state-machine keyword rule.
const TEMPORAL_KEYWORDS: &[&str] = &["before", "after", "at"];

static KEYWORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b(before|after|at)\b").unwrap());
static COMPARISON: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"==|~=|!=|<=|>=|<|>").unwrap());

pub(super) struct Proposal {
    pub operator: String,
    pub replacement: PropertyValue,
}

fn proposal(operator: impl Into<String>, replacement: PropertyValue) -> Proposal {
    Proposal { operator: operator.into(), replacement }
}

fn swap_symbols(name: &str, current: &str, vocabulary: &[&str]) -> Vec<Proposal> {
    vocabulary
        .iter()
        .filter(|v| **v != current)
        .map(|v| proposal(name, PropertyValue::symbol(*v)))
        .collect()
}

/// Per-position flips plus the whole inversion of a two-letter pattern string.
fn flip_pattern(prefix: &str, current: &str, a: char, b: char) -> Vec<Proposal> {
    let flip = |c: char| if c == a { b } else { a };
    let chars: Vec<char> = current.chars().collect();
    let mut out = Vec::new();
    for i in 0..chars.len() {
        let mut v = chars.clone();
        v[i] = flip(v[i]);
        out.push(proposal(format!("{prefix}-flip-{}", i + 1), PropertyValue::symbol(v.iter().collect::<String>())));
    }
    out.push(proposal(
        format!("{prefix}-invert"),
        PropertyValue::symbol(chars.iter().map(|c| flip(*c)).collect::<String>()),
    ));
    out
}

fn timing_values(prefix: &str, x: f64) -> Vec<Proposal> {
    vec![
        proposal(format!("{prefix}-zero"), PropertyValue::Number(0.0)),
        proposal(format!("{prefix}-one"), PropertyValue::Number(1.0)),
        proposal(format!("{prefix}-double"), PropertyValue::Number(x * 2.0)),
    ]
}

/// Replace one regex match in `s` by each alternative.
fn substitute_each(name: &str, s: &str, re: &Regex, alternatives: &[&str]) -> Vec<Proposal> {
    let mut out = Vec::new();
    for m in re.find_iter(s) {
        for alt in alternatives.iter().filter(|a| **a != m.as_str()) {
            let text = format!("{}{}{}", &s[..m.start()], alt, &s[m.end()..]);
            out.push(proposal(name, PropertyValue::text(text)));
        }
    }
    out
}

fn tags_of(model: &ModelIR) -> BTreeSet<&str> {
    model
        .blocks
        .iter()
        .filter(|b| matches!(b.block_type, BlockType::Goto | BlockType::From))
        .filter_map(|b| b.string("GotoTag"))
        .collect()
}

pub(super) fn proposals(model: &ModelIR, block: &Block, target: &SiteTarget) -> Vec<Proposal> {
    let SiteTarget::Property(key) = target else { return Vec::new() };
    let Some(value) = block.prop(key) else { return Vec::new() };

    if block.block_type == BlockType::StateflowStub {
        let Some(s) = value.as_str() else { return Vec::new() };
        let mut out = substitute_each("sf-keyword-swap", s, &KEYWORD, TEMPORAL_KEYWORDS);
        out.extend(substitute_each("sf-comparison-swap", s, &COMPARISON, RELATIONAL_OPS));
        return out;
    }

    match (block.block_type, key.as_str(), value) {
        (BlockType::RelationalOperator, "Operator", PropertyValue::Enum(op)) => {
            swap_symbols("relational-op-replace", op, RELATIONAL_OPS)
        }
        (BlockType::LogicalOperator, "Operator", PropertyValue::Enum(op)) => {
            swap_symbols("logical-op-replace", op, LOGICAL_OPS)
        }
        (BlockType::Sum, "Signs", PropertyValue::Enum(s)) => flip_pattern("sum-sign", s, '+', '-'),
        (BlockType::Product, "Inputs", PropertyValue::Enum(s)) => flip_pattern("product-op", s, '*', '/'),
        (_, "Value" | "Gain", PropertyValue::Number(x)) => vec![
            proposal("value-negate", PropertyValue::Number(-x)),
            proposal("value-plus-one", PropertyValue::Number(x + 1.0)),
            proposal("value-minus-one", PropertyValue::Number(x - 1.0)),
            proposal("value-times-ten", PropertyValue::Number(x * 10.0)),
        ],
        (_, "SaturateOnIntegerOverflow", PropertyValue::Enum(v)) => {
            let other = if v == "on" { "off" } else { "on" };
            vec![proposal("saturate-toggle", PropertyValue::symbol(other))]
        }
        (_, "InitialCondition", PropertyValue::Number(x)) => timing_values("initial-condition", *x),
        (_, "SampleTime", PropertyValue::Number(x)) => timing_values("sample-time", *x),
        (BlockType::Goto | BlockType::From, "GotoTag", PropertyValue::Text(tag)) => tags_of(model)
            .into_iter()
            .filter(|t| t != tag)
            .map(|t| proposal("tag-swap", PropertyValue::text(t)))
            .collect(),
        (_, "OutDataTypeStr", PropertyValue::Enum(t)) => swap_symbols("data-type-replace", t, DATA_TYPES),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn replacements(block: Block, key: &str) -> Vec<String> {
        let mut m = ModelIR::new("m", 1.0);
        m.add(block.clone());
        proposals(&m, &block, &SiteTarget::property(key)).into_iter().map(|p| p.replacement.token()).collect()
    }

    #[test]
    fn relational_swaps() {
        let b = Block::new("r", "r", BlockType::RelationalOperator).with("Operator", PropertyValue::symbol("<"));
        assert_eq!(replacements(b, "Operator"), ["==", "~=", "<=", ">", ">="]);
    }

    #[test]
    fn sum_flips() {
        let b = Block::new("s", "s", BlockType::Sum).with("Signs", PropertyValue::symbol("+-"));
        let got: BTreeSet<String> = replacements(b, "Signs").into_iter().collect();
        let want: BTreeSet<String> = ["--", "++", "-+"].iter().map(|s| s.to_string()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn stateflow_substitutions() {
        let b = Block::new("c", "c", BlockType::StateflowStub).with("Condition", PropertyValue::text("after(2, tick) && x >= 1"));
        let got = replacements(b, "Condition");
        assert!(got.contains(&"before(2, tick) && x >= 1".to_string()));
        assert!(got.contains(&"at(2, tick) && x >= 1".to_string()));
        assert!(got.contains(&"after(2, tick) && x < 1".to_string()));
        assert_eq!(got.len(), 2 + 5);
    }
}
