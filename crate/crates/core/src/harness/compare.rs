//! Cross-approach comparison of selected tests and kills.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{KillMatrix, Notion};
use super::select::{mutation_score, select_minimal_tests};
use super::HarnessError;

/// Sizes of a two-way partition of some union.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub only_a: usize,
    pub only_b: usize,
    pub both: usize,
}

impl Overlap {
    pub fn union(&self) -> usize {
        self.only_a + self.only_b + self.both
    }

    /// Percentages of the union, `(only_a, only_b, both)`; zeros for an empty union.
    pub fn percentages(&self) -> (f64, f64, f64) {
        let n = self.union();
        if n == 0 {
            return (0.0, 0.0, 0.0);
        }
        let pct = |x: usize| 100.0 * x as f64 / n as f64;
        (pct(self.only_a), pct(self.only_b), pct(self.both))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub repetition: usize,
    pub selected_a: Vec<String>,
    pub selected_b: Vec<String>,
    /// Selected tests: chosen for A only, B only, both.
    pub tests: Overlap,
    /// Killable mutants of either set, by whose selection kills them.
    pub mutants: Overlap,
    /// Own mutants killed by own selection.
    pub killed_a: usize,
    pub killed_b: usize,
    pub score_a: Option<f64>,
    pub score_b: Option<f64>,
    /// Killable mutants of A that B's selection does not kill.
    pub a_not_killed_by_b: usize,
    pub b_not_killed_by_a: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub selected_a: f64,
    pub selected_b: f64,
    pub tests_only_a: f64,
    pub tests_only_b: f64,
    pub tests_both: f64,
    pub mutants_only_a: f64,
    pub mutants_only_b: f64,
    pub mutants_both: f64,
    pub killed_a: f64,
    pub killed_b: f64,
    pub score_a: Option<f64>,
    pub score_b: Option<f64>,
    pub a_not_killed_by_b: f64,
    pub b_not_killed_by_a: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    v.filter(|v| !v.is_empty()).map(|v| mean(v.into_iter()))
}

impl Averages {
    pub fn of(runs: &[RunResult]) -> Averages {
        let m = |f: fn(&RunResult) -> usize| mean(runs.iter().map(|r| f(r) as f64));
        Averages {
            selected_a: m(|r| r.selected_a.len()),
            selected_b: m(|r| r.selected_b.len()),
            tests_only_a: m(|r| r.tests.only_a),
            tests_only_b: m(|r| r.tests.only_b),
            tests_both: m(|r| r.tests.both),
            mutants_only_a: m(|r| r.mutants.only_a),
            mutants_only_b: m(|r| r.mutants.only_b),
            mutants_both: m(|r| r.mutants.both),
            killed_a: m(|r| r.killed_a),
            killed_b: m(|r| r.killed_b),
            score_a: mean_opt(runs.iter().map(|r| r.score_a)),
            score_b: mean_opt(runs.iter().map(|r| r.score_b)),
            a_not_killed_by_b: m(|r| r.a_not_killed_by_b),
            b_not_killed_by_a: m(|r| r.b_not_killed_by_a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotionComparison {
    pub notion: Notion,
    /// Score denominators: mutants killed by some suite test under the
    /// classical notion (the same for both notions).
    pub killable_a: usize,
    pub killable_b: usize,
    /// Mutants killed by some suite test under this notion.
    pub killable_under_notion_a: usize,
    pub killable_under_notion_b: usize,
    pub runs: Vec<RunResult>,
    pub averages: Averages,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model: String,
    pub approach_a: String,
    pub approach_b: String,
    pub mutants_a: usize,
    pub mutants_b: usize,
    pub suite_size: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub notions: Vec<NotionComparison>,
}

/// Tie-breaking permutation of `n` tests for one repetition.
pub fn tie_order(n: usize, seed: u64, repetition: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repetition as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

fn count(v: &[bool]) -> usize {
    v.iter().filter(|x| **x).count()
}

fn run_once(a: &KillMatrix, b: &KillMatrix, notion: Notion, order: &[usize], repetition: usize) -> RunResult {
    let sel_a = select_minimal_tests(a.cells(notion), Some(order));
    let sel_b = select_minimal_tests(b.cells(notion), Some(order));
    let set_a: BTreeSet<usize> = sel_a.iter().copied().collect();
    let set_b: BTreeSet<usize> = sel_b.iter().copied().collect();
    let tests = Overlap {
        only_a: set_a.difference(&set_b).count(),
        only_b: set_b.difference(&set_a).count(),
        both: set_a.intersection(&set_b).count(),
    };

    let (killable_a, killable_b) = (a.killable(notion), b.killable(notion));
    let (a_by_a, a_by_b) = (a.killed_by(notion, &sel_a), a.killed_by(notion, &sel_b));
    let (b_by_a, b_by_b) = (b.killed_by(notion, &sel_a), b.killed_by(notion, &sel_b));

    let mut mutants = Overlap::default();
    let mut tally = |killable: &[bool], by_a: &[bool], by_b: &[bool]| {
        for i in 0..killable.len() {
            if !killable[i] {
                continue;
            }
            match (by_a[i], by_b[i]) {
                (true, true) => mutants.both += 1,
                (true, false) => mutants.only_a += 1,
                (false, true) => mutants.only_b += 1,
                (false, false) => {}
            }
        }
    };
    tally(&killable_a, &a_by_a, &a_by_b);
    tally(&killable_b, &b_by_a, &b_by_b);

    let not_killed = |killable: &[bool], by_other: &[bool]| (0..killable.len()).filter(|&i| killable[i] && !by_other[i]).count();
    let (killed_a, killed_b) = (count(&a_by_a), count(&b_by_b));
    RunResult {
        repetition,
        selected_a: sel_a.iter().map(|&t| a.tests[t].clone()).collect(),
        selected_b: sel_b.iter().map(|&t| b.tests[t].clone()).collect(),
        tests,
        mutants,
        killed_a,
        killed_b,
        score_a: mutation_score(killed_a, a.killable_count(Notion::Classical)),
        score_b: mutation_score(killed_b, b.killable_count(Notion::Classical)),
        a_not_killed_by_b: not_killed(&killable_a, &a_by_b),
        b_not_killed_by_a: not_killed(&killable_b, &b_by_a),
    }
}

/// Compare two kill matrices over the same suite, `repetitions` times per notion.
pub fn compare_matrices(
    model: &str,
    names: (&str, &str),
    a: &KillMatrix,
    b: &KillMatrix,
    repetitions: usize,
    seed: u64,
) -> Result<ComparisonReport, HarnessError> {
    if a.tests != b.tests {
        return Err(HarnessError::Config("kill matrices were computed over different suites".into()));
    }
    if repetitions == 0 {
        return Err(HarnessError::Config("repetitions must be at least 1".into()));
    }
    let notions = Notion::BOTH
        .iter()
        .map(|&notion| {
            let runs: Vec<RunResult> = (0..repetitions)
                .map(|r| run_once(a, b, notion, &tie_order(a.tests.len(), seed, r), r))
                .collect();
            NotionComparison {
                notion,
                killable_a: a.killable_count(Notion::Classical),
                killable_b: b.killable_count(Notion::Classical),
                killable_under_notion_a: a.killable_count(notion),
                killable_under_notion_b: b.killable_count(notion),
                averages: Averages::of(&runs),
                runs,
            }
        })
        .collect();
    Ok(ComparisonReport {
        model: model.to_string(),
        approach_a: names.0.to_string(),
        approach_b: names.1.to_string(),
        mutants_a: a.mutants.len(),
        mutants_b: b.mutants.len(),
        suite_size: a.tests.len(),
        repetitions,
        seed,
        notions,
    })
}

fn pct(score: Option<f64>) -> String {
    score.map_or_else(|| "n/a".to_string(), |s| format!("{:.0}%", 100.0 * s))
}

impl ComparisonReport {
    pub fn notion(&self, notion: Notion) -> Option<&NotionComparison> {
        self.notions.iter().find(|n| n.notion == notion)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table: one column per (approach, notion).
    pub fn to_text_table(&self) -> String {
        let (c, r) = match (self.notion(Notion::Classical), self.notion(Notion::ReqAware)) {
            (Some(c), Some(r)) => (c, r),
            _ => return String::new(),
        };
        type Cell = fn(&NotionComparison, bool) -> String;
        let rows: [(&str, Cell); 5] = [
            ("# of killable mutants", |n, a| (if a { n.killable_a } else { n.killable_b }).to_string()),
            ("Average # of selected tests", |n, a| {
                format!("{:.1}", if a { n.averages.selected_a } else { n.averages.selected_b })
            }),
            ("Average # of killed mutants", |n, a| {
                format!("{:.1}", if a { n.averages.killed_a } else { n.averages.killed_b })
            }),
            ("Mutation score", |n, a| {
                let (killed, killable, score) = if a {
                    (n.averages.killed_a, n.killable_a, n.averages.score_a)
                } else {
                    (n.averages.killed_b, n.killable_b, n.averages.score_b)
                };
                format!("{killed:.1}/{killable} ~ {}", pct(score))
            }),
            ("Avg # killed, not killed by other's tests", |n, a| {
                format!("{:.1}", if a { n.averages.a_not_killed_by_b } else { n.averages.b_not_killed_by_a })
            }),
        ];
        let mut out = String::new();
        let w = 44;
        let cw = 18;
        let _ = writeln!(out, "model: {}  (suite {} tests, {} repetitions, seed {})", self.model, self.suite_size, self.repetitions, self.seed);
        let _ = writeln!(
            out,
            "{:w$}|{:^cw2$}|{:^cw2$}",
            "",
            format!("{} ({} mutants)", self.approach_a, self.mutants_a),
            format!("{} ({} mutants)", self.approach_b, self.mutants_b),
            cw2 = 2 * cw + 1
        );
        let _ = writeln!(out, "{:w$}|{:^cw$}|{:^cw$}|{:^cw$}|{:^cw$}", "", "classic", "req-aware", "classic", "req-aware");
        for (label, cell) in rows {
            let _ = writeln!(
                out,
                "{label:w$}|{:^cw$}|{:^cw$}|{:^cw$}|{:^cw$}",
                cell(c, true),
                cell(r, true),
                cell(c, false),
                cell(r, false)
            );
        }
        out
    }
}
