use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Input stimulus, indexed by simulation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Signal {
    Constant { value: f64 },
    /// `before` until step `at`, `after` from then on.
    Step { at: usize, before: f64, after: f64 },
    /// `slope * step`.
    Ramp { slope: f64 },
    /// `(start_step, value)` pairs in ascending step order; the first value
    /// also covers any steps before its start.
    PiecewiseConstant { breakpoints: Vec<(usize, f64)> },
}

impl Signal {
    pub fn value_at(&self, step: usize) -> f64 {
        match self {
            Signal::Constant { value } => *value,
            Signal::Step { at, before, after } => {
                if step < *at {
                    *before
                } else {
                    *after
                }
            }
            Signal::Ramp { slope } => slope * step as f64,
            Signal::PiecewiseConstant { breakpoints } => breakpoints
                .iter()
                .take_while(|(s, _)| *s <= step)
                .last()
                .or(breakpoints.first())
                .map_or(0.0, |(_, v)| *v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub duration_steps: usize,
    /// Inport block id to stimulus.
    pub inputs: BTreeMap<String, Signal>,
}

/// Recorded signals, one value per completed step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    pub signals: BTreeMap<String, Vec<f64>>,
    /// Step at which the run aborted; signals hold only the steps before it.
    pub aborted_at: Option<usize>,
}

impl SignalTrace {
    pub fn len(&self) -> usize {
        self.signals.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, signal: &str) -> Option<&[f64]> {
        self.signals.get(signal).map(Vec::as_slice)
    }

    /// CSV with one column per signal id and one row per step.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let ids: Vec<&String> = self.signals.keys().collect();
        out.push_str(&ids.iter().map(|s| csv_field(s)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for step in 0..self.len() {
            let row: Vec<String> = self
                .signals
                .values()
                .map(|v| crate::ir::format_number(v[step]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
