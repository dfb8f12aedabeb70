use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::ir::ModelIR;
use crate::mutgen::Mutant;
use crate::reqmon::{check, RequirementSet};
use crate::sim::{execute, Execution, SignalTrace, TestCase};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Notion {
    Classical,
    ReqAware,
}

impl Notion {
    pub const BOTH: [Notion; 2] = [Notion::Classical, Notion::ReqAware];

    pub fn as_str(self) -> &'static str {
        match self {
            Notion::Classical => "classical",
            Notion::ReqAware => "req_aware",
        }
    }
}

/// A requirement the original model violates on a test; excluded from
/// requirements-aware killing for that test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedPair {
    pub requirement: String,
    pub test: String,
}

/// Kill results indexed `[test][mutant]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillMatrix {
    pub tests: Vec<String>,
    pub mutants: Vec<String>,
    pub classical: Vec<Vec<bool>>,
    pub req_aware: Vec<Vec<bool>>,
    pub excluded: Vec<ExcludedPair>,
}

impl KillMatrix {
    pub fn cells(&self, notion: Notion) -> &[Vec<bool>] {
        match notion {
            Notion::Classical => &self.classical,
            Notion::ReqAware => &self.req_aware,
        }
    }

    /// Per mutant: killed by at least one test.
    pub fn killable(&self, notion: Notion) -> Vec<bool> {
        column_any(self.cells(notion), self.mutants.len())
    }

    pub fn killable_count(&self, notion: Notion) -> usize {
        self.killable(notion).iter().filter(|k| **k).count()
    }

    /// Per mutant: killed by at least one of the given tests.
    pub fn killed_by(&self, notion: Notion, tests: &[usize]) -> Vec<bool> {
        let cells = self.cells(notion);
        let rows: Vec<Vec<bool>> = tests.iter().map(|&t| cells[t].clone()).collect();
        column_any(&rows, self.mutants.len())
    }

    pub fn test_index(&self, id: &str) -> Option<usize> {
        self.tests.iter().position(|t| t == id)
    }

    /// 0/1 CSV; one row per test, one column per mutant.
    pub fn to_csv(&self, notion: Notion) -> String {
        let mut out = String::from("test");
        for m in &self.mutants {
            out.push(',');
            out.push_str(m);
        }
        out.push('\n');
        for (t, row) in self.tests.iter().zip(self.cells(notion)) {
            out.push_str(t);
            for &k in row {
                out.push_str(if k { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

pub(super) fn column_any(rows: &[Vec<bool>], width: usize) -> Vec<bool> {
    let mut out = vec![false; width];
    for row in rows {
        for (o, &k) in out.iter_mut().zip(row) {
            *o |= k;
        }
    }
    out
}

fn outputs_differ(original: &SignalTrace, mutant: &SignalTrace, tolerance: f64) -> bool {
    original.signals.iter().any(|(id, ref_values)| match mutant.signals.get(id) {
        None => true,
        Some(values) => {
            values.len() != ref_values.len()
                || ref_values.iter().zip(values).any(|(a, b)| !((a - b).abs() <= tolerance))
        }
    })
}

/// Simulate every `(test, mutant)` pair and record both kill notions.
///
/// Classical: some recorded signal differs by more than `tolerance` at some
/// step, or the mutant run aborts. Requirements-aware: a classical kill
/// where the mutant trace violates a requirement the original satisfies on
/// that test. Recorded signals are the Outports plus every probe the
/// requirements refer to, so a requirement violation always comes with an
/// observable difference unless it lies within the tolerance band.
pub fn compute_kill_matrix(
    original: &ModelIR,
    mutants: &[Mutant],
    suite: &[TestCase],
    reqs: &RequirementSet,
    tolerance: f64,
) -> Result<KillMatrix, HarnessError> {
    reqs.check_signals(original).map_err(HarnessError::Requirements)?;
    let probes = reqs.probe_signals(original);

    let reference: Vec<SignalTrace> = suite
        .par_iter()
        .map(|t| match execute(original, t, &probes) {
            Ok(Execution { trace, fault: None }) => Ok(trace),
            Ok(Execution { fault: Some(f), .. }) => Err(HarnessError::OriginalFault { test: t.id.clone(), fault: f }),
            Err(e) => Err(HarnessError::Simulation { test: t.id.clone(), error: e }),
        })
        .collect::<Result<_, _>>()?;

    // active[t][r]: requirement r is satisfied by the original on test t.
    let mut active = Vec::with_capacity(suite.len());
    let mut excluded = Vec::new();
    for (t, trace) in suite.iter().zip(&reference) {
        let mut row = Vec::with_capacity(reqs.requirements.len());
        for r in &reqs.requirements {
            let ok = !check(r, trace).map_err(HarnessError::Requirements)?.is_violated();
            if !ok {
                excluded.push(ExcludedPair { requirement: r.id.clone(), test: t.id.clone() });
            }
            row.push(ok);
        }
        active.push(row);
    }

    let models: Vec<ModelIR> = mutants
        .iter()
        .map(|m| m.materialize(original))
        .collect::<Result<_, _>>()
        .map_err(|e| HarnessError::Mutant(e.to_string()))?;

    let cells: Vec<(bool, bool)> = (0..suite.len() * models.len())
        .into_par_iter()
        .map(|cell| {
            let (t, j) = (cell / models.len(), cell % models.len());
            match execute(&models[j], &suite[t], &probes) {
                Ok(exec) => {
                    let classical = exec.fault.is_some() || outputs_differ(&reference[t], &exec.trace, tolerance);
                    let req = classical
                        && reqs
                            .requirements
                            .iter()
                            .zip(&active[t])
                            .any(|(r, &on)| on && check(r, &exec.trace).is_ok_and(|v| v.is_violated()));
                    (classical, req)
                }
                // The mutant cannot even be set up for this test: a crash.
                Err(_) => (true, false),
            }
        })
        .collect();

    let width = models.len();
    let rows = |pick: fn(&(bool, bool)) -> bool| -> Vec<Vec<bool>> {
        (0..suite.len()).map(|t| cells[t * width..(t + 1) * width].iter().map(pick).collect()).collect()
    };
    Ok(KillMatrix {
        tests: suite.iter().map(|t| t.id.clone()).collect(),
        mutants: mutants.iter().map(|m| m.id.clone()).collect(),
        classical: rows(|c| c.0),
        req_aware: rows(|c| c.1),
        excluded,
    })
}
