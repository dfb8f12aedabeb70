//! Requirement monitors over bounded signal traces.
//!
//! Three patterns are supported: `always(p)`, `never(p)` and
//! `implies_within(trigger, response, deadline)`. A predicate compares a
//! signal against a constant or another signal.
//!
//! A requirements file is either a JSON list of requirements or an object
//! `{"probes": [...], "requirements": [...]}` where `probes` names internal
//! blocks whose outputs the requirements may reference:
//!
//! ```json
//! {"id": "R1", "pattern": "always", "args": {"pred": {"signal": "level_out", "op": "<=", "rhs": 9}}}
//! {"id": "R2", "pattern": "implies_within",
//!  "args": {"trigger": {"signal": "level", "op": ">=", "rhs": 8},
//!           "response": {"signal": "high_alarm", "op": "==", "rhs": 1}, "deadline": 0}}
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ir::schema::RELATIONAL_OPS;
use crate::ir::{BlockType, ModelIR};
use crate::sim::SignalTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rhs {
    Const(f64),
    Signal(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub signal: String,
    pub op: String,
    pub rhs: Rhs,
}

impl Predicate {
    pub fn new(signal: impl Into<String>, op: impl Into<String>, rhs: Rhs) -> Self {
        Predicate { signal: signal.into(), op: op.into(), rhs }
    }

    fn signals(&self) -> impl Iterator<Item = &str> {
        let rhs = match &self.rhs {
            Rhs::Signal(s) => Some(s.as_str()),
            Rhs::Const(_) => None,
        };
        std::iter::once(self.signal.as_str()).chain(rhs)
    }

    fn bind<'t>(&self, trace: &'t SignalTrace) -> Result<Bound<'t>, MonitorError> {
        let get = |s: &str| trace.get(s).ok_or_else(|| MonitorError::UnknownSignal(s.to_string()));
        let lhs = get(&self.signal)?;
        let rhs = match &self.rhs {
            Rhs::Const(c) => BoundRhs::Const(*c),
            Rhs::Signal(s) => BoundRhs::Signal(get(s)?),
        };
        Ok(Bound { lhs, rhs, op: self.op.clone() })
    }
}

enum BoundRhs<'t> {
    Const(f64),
    Signal(&'t [f64]),
}

struct Bound<'t> {
    lhs: &'t [f64],
    rhs: BoundRhs<'t>,
    op: String,
}

impl Bound<'_> {
    fn at(&self, t: usize) -> bool {
        let a = self.lhs[t];
        let b = match self.rhs {
            BoundRhs::Const(c) => c,
            BoundRhs::Signal(s) => s[t],
        };
        match self.op.as_str() {
            "<" => a < b,
            "<=" => a <= b,
            ">" => a > b,
            ">=" => a >= b,
            "==" => a == b,
            _ => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", content = "args", rename_all = "snake_case")]
pub enum Pattern {
    Always { pred: Predicate },
    Never { pred: Predicate },
    ImpliesWithin { trigger: Predicate, response: Predicate, deadline: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    #[serde(flatten)]
    pub pattern: Pattern,
}

impl Requirement {
    pub fn signals(&self) -> BTreeSet<&str> {
        match &self.pattern {
            Pattern::Always { pred } | Pattern::Never { pred } => pred.signals().collect(),
            Pattern::ImpliesWithin { trigger, response, .. } => trigger.signals().chain(response.signals()).collect(),
        }
    }

    fn predicates(&self) -> Vec<&Predicate> {
        match &self.pattern {
            Pattern::Always { pred } | Pattern::Never { pred } => vec![pred],
            Pattern::ImpliesWithin { trigger, response, .. } => vec![trigger, response],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `vacuous_tail`: some obligation was still open when the trace ended.
    Satisfied { vacuous_tail: bool },
    Violated { step: usize },
}

impl Verdict {
    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonitorError {
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("requirement `{id}`: unsupported comparison `{op}`")]
    BadOperator { id: String, op: String },
    #[error("duplicate requirement id `{0}`")]
    DuplicateId(String),
    #[error("requirements file: {0}")]
    Format(String),
}

/// Evaluate one requirement over a (possibly aborted) trace.
pub fn check(req: &Requirement, trace: &SignalTrace) -> Result<Verdict, MonitorError> {
    let n = trace.len();
    let abort = |pending: bool| match trace.aborted_at {
        Some(step) if pending => Verdict::Violated { step },
        _ => Verdict::Satisfied { vacuous_tail: pending },
    };
    match &req.pattern {
        Pattern::Always { pred } | Pattern::Never { pred } => {
            let p = pred.bind(trace)?;
            let want = matches!(req.pattern, Pattern::Always { .. });
            match (0..n).find(|&t| p.at(t) != want) {
                Some(step) => Ok(Verdict::Violated { step }),
                None => Ok(match trace.aborted_at {
                    Some(step) => Verdict::Violated { step },
                    None => Verdict::Satisfied { vacuous_tail: false },
                }),
            }
        }
        Pattern::ImpliesWithin { trigger, response, deadline } => {
            let (trig, resp) = (trigger.bind(trace)?, response.bind(trace)?);
            // Earliest trigger whose response window is still open.
            let mut pending: Option<usize> = None;
            for t in 0..n {
                if pending.is_none() && trig.at(t) {
                    pending = Some(t);
                }
                if resp.at(t) {
                    pending = None;
                }
                if let Some(p) = pending {
                    if t == p + deadline {
                        return Ok(Verdict::Violated { step: t });
                    }
                }
            }
            Ok(abort(pending.is_some()))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RequirementSet {
    #[serde(default)]
    pub probes: Vec<String>,
    pub requirements: Vec<Requirement>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RequirementFile {
    List(Vec<Requirement>),
    Full(RequirementSet),
}

impl RequirementSet {
    pub fn parse(text: &str) -> Result<Self, MonitorError> {
        let file: RequirementFile = serde_json::from_str(text).map_err(|e| MonitorError::Format(e.to_string()))?;
        let set = match file {
            RequirementFile::List(requirements) => RequirementSet { probes: Vec::new(), requirements },
            RequirementFile::Full(set) => set,
        };
        let mut seen = BTreeSet::new();
        for r in &set.requirements {
            if !seen.insert(r.id.as_str()) {
                return Err(MonitorError::DuplicateId(r.id.clone()));
            }
            for p in r.predicates() {
                if !RELATIONAL_OPS.contains(&p.op.as_str()) {
                    return Err(MonitorError::BadOperator { id: r.id.clone(), op: p.op.clone() });
                }
            }
        }
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("requirements serialize")
    }

    /// Internal blocks that must be recorded: declared probes plus any
    /// referenced signal that is not an Outport of `model`.
    pub fn probe_signals(&self, model: &ModelIR) -> Vec<String> {
        let outports: BTreeSet<&str> = model.ids_of(BlockType::Outport).into_iter().collect();
        let mut probes: BTreeSet<String> = self.probes.iter().cloned().collect();
        for r in &self.requirements {
            probes.extend(r.signals().into_iter().filter(|s| !outports.contains(s)).map(str::to_string));
        }
        probes.into_iter().collect()
    }

    /// Every referenced signal must be an Outport or a declared probe of `model`.
    pub fn check_signals(&self, model: &ModelIR) -> Result<(), MonitorError> {
        let outports: BTreeSet<&str> = model.ids_of(BlockType::Outport).into_iter().collect();
        for r in &self.requirements {
            for s in r.signals() {
                let probe_ok = self.probes.iter().any(|p| p == s) && model.block(s).is_some();
                if !outports.contains(s) && !probe_ok {
                    return Err(MonitorError::UnknownSignal(s.to_string()));
                }
            }
        }
        Ok(())
    }
}
