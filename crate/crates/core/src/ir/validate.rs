//! Static validity checks (the static half of the compile filter).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::schema::{is_valid_tag, ValueKind};
use super::{Block, BlockType, DataflowGraph, ModelIR, PropertyValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Model,
    Block(String),
    Connection(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match &self.location {
            Location::Model => write!(f, "{sev}: model: {}", self.message),
            Location::Block(id) => write!(f, "{sev}: block `{id}`: {}", self.message),
            Location::Connection(i) => write!(f, "{sev}: connection #{i}: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidityReport {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn has_error_on(&self, block_id: &str) -> bool {
        self.errors().any(|d| d.location == Location::Block(block_id.to_string()))
    }
}

struct Checker {
    diagnostics: Vec<Diagnostic>,
}

impl Checker {
    fn emit(&mut self, severity: Severity, location: Location, message: String) {
        self.diagnostics.push(Diagnostic { severity, location, message });
    }

    fn block_error(&mut self, block: &Block, message: String) {
        self.emit(Severity::Error, Location::Block(block.id.clone()), message);
    }

    fn block_warning(&mut self, block: &Block, message: String) {
        self.emit(Severity::Warning, Location::Block(block.id.clone()), message);
    }

    fn check_value(&mut self, block: &Block, key: &str, kind: ValueKind, value: &PropertyValue) {
        match (kind, value) {
            (ValueKind::Number, PropertyValue::Number(x)) if x.is_finite() => {}
            (ValueKind::Number, v) => {
                self.block_error(block, format!("`{key}` must be a finite number, got {v}"));
            }
            (ValueKind::Enum(vocab), PropertyValue::Enum(s)) if vocab.contains(&s.as_str()) => {}
            (ValueKind::Enum(vocab), v) => self.block_error(
                block,
                format!("`{key}` value {v} is not one of {}", vocab.join(", ")),
            ),
            (ValueKind::Pattern(alpha), PropertyValue::Enum(s))
                if !s.is_empty() && s.chars().all(|c| alpha.contains(&c)) => {}
            (ValueKind::Pattern(alpha), v) => {
                let alpha: String = alpha.iter().collect();
                self.block_error(block, format!("`{key}` value {v} is not a string over `{alpha}`"))
            }
            (ValueKind::Tag, PropertyValue::Text(s)) if is_valid_tag(s) => {}
            (ValueKind::Tag, v) => self.block_error(block, format!("`{key}` value {v} is not a valid tag")),
            (ValueKind::Text, PropertyValue::Number(x)) if !x.is_finite() => {
                self.block_error(block, format!("`{key}` holds a non-finite number"));
            }
            (ValueKind::Text, _) => {}
        }
    }

    fn check_block(&mut self, model: &ModelIR, block: &Block) {
        if block.name.trim().is_empty() {
            self.block_error(block, "empty block name".into());
        }
        let t = block.block_type;
        for spec in t.properties() {
            match block.prop(spec.key) {
                Some(v) => self.check_value(block, spec.key, spec.kind, v),
                None if spec.required => {
                    self.block_error(block, format!("missing required property `{}`", spec.key))
                }
                None => {}
            }
        }
        if t != BlockType::StateflowStub {
            for key in block.properties.keys().filter(|k| t.property(k).is_none()) {
                self.block_warning(block, format!("property `{key}` is not declared for {t}"));
            }
        } else {
            for (key, v) in &block.properties {
                self.check_value(block, key, ValueKind::Text, v);
            }
        }
        if t == BlockType::Saturation {
            if let (Some(hi), Some(lo)) = (block.number("UpperLimit"), block.number("LowerLimit")) {
                if lo > hi {
                    self.block_error(block, format!("lower limit {lo} exceeds upper limit {hi}"));
                }
            }
        }
        if let Some(st) = block.number("SampleTime") {
            if st != -1.0 {
                let ratio = st / model.sample_time;
                if st <= 0.0 {
                    self.block_error(block, format!("sample time {st} is not discrete"));
                } else if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
                    self.block_error(
                        block,
                        format!("sample time {st} is not a multiple of the base step {}", model.sample_time),
                    );
                }
            }
        }
    }
}

/// Check a model for structural and semantic errors.
pub fn validate(model: &ModelIR) -> ValidityReport {
    let mut ck = Checker { diagnostics: Vec::new() };

    if !(model.sample_time.is_finite() && model.sample_time > 0.0) {
        ck.emit(
            Severity::Error,
            Location::Model,
            format!("sample time {} must be positive", model.sample_time),
        );
    }

    let mut ids = BTreeSet::new();
    let mut names = BTreeSet::new();
    for b in &model.blocks {
        if !ids.insert(b.id.as_str()) {
            ck.block_error(b, "duplicate block id".into());
        }
        if !names.insert(b.name.as_str()) {
            ck.block_error(b, format!("duplicate block name `{}`", b.name));
        }
        ck.check_block(model, b);
    }

    let mut driven: BTreeSet<(&str, usize)> = BTreeSet::new();
    for (i, c) in model.connections.iter().enumerate() {
        let loc = || Location::Connection(i);
        let src = model.block(&c.src_block);
        let dst = model.block(&c.dst_block);
        match src {
            None => ck.emit(Severity::Error, loc(), format!("unknown source block `{}`", c.src_block)),
            Some(b) if c.src_port >= b.block_type.output_count() => ck.emit(
                Severity::Error,
                loc(),
                format!("`{}` has no output port {}", b.id, c.src_port),
            ),
            Some(_) => {}
        }
        match dst {
            None => ck.emit(Severity::Error, loc(), format!("unknown destination block `{}`", c.dst_block)),
            Some(b) => {
                if let Some(n) = b.input_count() {
                    if c.dst_port >= n {
                        ck.emit(
                            Severity::Error,
                            loc(),
                            format!("`{}` has no input port {}", b.id, c.dst_port),
                        );
                    }
                }
                if !driven.insert((c.dst_block.as_str(), c.dst_port)) {
                    ck.emit(
                        Severity::Error,
                        loc(),
                        format!("input {} of `{}` is driven more than once", c.dst_port, b.id),
                    );
                }
            }
        }
    }

    for b in &model.blocks {
        if let Some(n) = b.input_count() {
            for port in 0..n {
                if !driven.contains(&(b.id.as_str(), port)) {
                    ck.block_warning(b, format!("input {port} is unconnected (reads 0)"));
                }
            }
        }
    }

    let mut tags: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for b in &model.blocks {
        if let Some(tag) = b.string("GotoTag") {
            let entry = tags.entry(tag).or_default();
            match b.block_type {
                BlockType::Goto => entry.0 += 1,
                BlockType::From => entry.1 += 1,
                _ => {}
            }
        }
    }
    for b in &model.blocks {
        let Some(tag) = b.string("GotoTag") else { continue };
        let (gotos, froms) = tags[tag];
        match b.block_type {
            BlockType::Goto if froms == 0 => ck.block_warning(b, format!("no From reads tag `{tag}`")),
            BlockType::From if gotos == 0 => ck.block_warning(b, format!("no Goto writes tag `{tag}`")),
            _ => {}
        }
    }

    if let Err(members) = DataflowGraph::build(model).topo_order() {
        let names: Vec<&str> = members.iter().map(|&i| model.blocks[i].id.as_str()).collect();
        for &i in &members {
            ck.block_error(
                &model.blocks[i],
                format!("algebraic loop through {}", names.join(" -> ")),
            );
        }
    }

    let ok = !ck.diagnostics.iter().any(|d| d.severity == Severity::Error);
    ValidityReport { ok, diagnostics: ck.diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::SiteTarget;

    fn rel(op: &str) -> ModelIR {
        let mut m = ModelIR::new("rel", 0.1);
        m.add(Block::new("a", "a", BlockType::Inport))
            .add(Block::new("b", "b", BlockType::Inport))
            .add(Block::new("r", "r", BlockType::RelationalOperator).with("Operator", PropertyValue::symbol(op)))
            .add(Block::new("o", "o", BlockType::Outport))
            .connect("a", 0, "r", 0)
            .connect("b", 0, "r", 1)
            .connect("r", 0, "o", 0);
        m
    }

    #[test]
    fn well_formed_model_is_ok() {
        let report = validate(&rel("<"));
        assert!(report.ok, "{:?}", report.diagnostics);
        assert!(report.diagnostics.is_empty());
    }

    #[test]
    fn vocabulary_violation_is_an_error_on_that_block() {
        let report = validate(&rel("<<"));
        assert!(!report.ok);
        assert!(report.has_error_on("r"));
    }

    #[test]
    fn gain_cycle_without_delay_is_an_algebraic_loop() {
        let mut m = ModelIR::new("loop", 0.1);
        m.add(Block::new("g1", "g1", BlockType::Gain).with("Gain", PropertyValue::Number(2.0)))
            .add(Block::new("g2", "g2", BlockType::Gain).with("Gain", PropertyValue::Number(0.5)))
            .connect("g1", 0, "g2", 0)
            .connect("g2", 0, "g1", 0);
        let report = validate(&m);
        assert!(!report.ok);
        assert!(report.errors().any(|d| d.message.contains("algebraic loop")));

        // Breaking the loop with a delay makes it legal.
        m.add(Block::new("d", "d", BlockType::UnitDelay).with("InitialCondition", PropertyValue::Number(0.0)));
        m.connections = vec![
            crate::ir::Connection::new("g1", 0, "d", 0),
            crate::ir::Connection::new("d", 0, "g2", 0),
            crate::ir::Connection::new("g2", 0, "g1", 0),
        ];
        assert!(validate(&m).ok, "{:?}", validate(&m).diagnostics);
    }

    #[test]
    fn dangling_and_doubly_driven_connections() {
        let mut m = rel("<");
        m.connect("ghost", 0, "o", 0);
        let report = validate(&m);
        assert!(!report.ok);
        assert!(report.errors().any(|d| d.message.contains("unknown source")));
        assert!(report.errors().any(|d| d.message.contains("driven more than once")));
    }

    #[test]
    fn missing_required_property() {
        let mut m = ModelIR::new("m", 0.1);
        m.add(Block::new("g", "g", BlockType::Gain));
        let report = validate(&m);
        assert!(report.errors().any(|d| d.message.contains("missing required property `Gain`")));
    }

    #[test]
    fn goto_without_from_is_only_a_warning() {
        let mut m = ModelIR::new("m", 0.1);
        m.add(Block::new("c", "c", BlockType::Constant).with("Value", PropertyValue::Number(1.0)))
            .add(Block::new("g", "g", BlockType::Goto).with("GotoTag", PropertyValue::text("T")))
            .connect("c", 0, "g", 0);
        let report = validate(&m);
        assert!(report.ok);
        assert_eq!(report.diagnostics.len(), 1);
        assert_eq!(report.diagnostics[0].severity, Severity::Warning);
    }

    #[test]
    fn sample_time_checks() {
        let mut m = ModelIR::new("m", 0.1);
        m.add(
            Block::new("d", "d", BlockType::UnitDelay)
                .with("InitialCondition", PropertyValue::Number(0.0))
                .with("SampleTime", PropertyValue::Number(0.2)),
        );
        assert!(validate(&m).ok);
        for bad in [0.0, 0.15, 0.05] {
            let mm = m
                .apply_delta("d", &SiteTarget::property("SampleTime"), PropertyValue::Number(bad))
                .unwrap();
            assert!(!validate(&mm).ok, "sample time {bad} should be rejected");
        }
    }

    #[test]
    fn saturation_limits_ordered() {
        let mut m = ModelIR::new("m", 0.1);
        m.add(
            Block::new("s", "s", BlockType::Saturation)
                .with("UpperLimit", PropertyValue::Number(-1.0))
                .with("LowerLimit", PropertyValue::Number(1.0)),
        );
        assert!(validate(&m).has_error_on("s"));
    }
}
