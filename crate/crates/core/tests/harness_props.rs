use std::sync::LazyLock;

use proptest::prelude::*;
use slmut::fixtures::{self, BenchModel};
use slmut::harness::{
    art_points, min_pairwise_distance, random_points, run_experiment, select_minimal_tests, ExperimentConfig,
    ExperimentOutput, KillMatrix, Notion, SuiteConfig,
};
use slmut::mutgen::MutationPattern;
use slmut::predictor::OfflinePredictor;

fn config(b: &BenchModel) -> ExperimentConfig {
    ExperimentConfig {
        suite: SuiteConfig { size: 50, duration_steps: b.duration_steps, seed: 7, ..SuiteConfig::default() },
        ..ExperimentConfig::default()
    }
}

fn experiments() -> Vec<(BenchModel, ExperimentOutput)> {
    let bench = fixtures::bench();
    let mut p = OfflinePredictor::new();
    p.fit_models(bench.iter().map(|b| &b.model));
    bench
        .into_iter()
        .map(|b| {
            let out = run_experiment(&b.model, &b.requirements, &b.space, &p, &config(&b)).unwrap();
            (b, out)
        })
        .collect()
}

static BENCH: LazyLock<Vec<(BenchModel, ExperimentOutput)>> = LazyLock::new(experiments);

fn killable_set(cells: &[Vec<bool>]) -> Vec<bool> {
    let width = cells.first().map_or(0, Vec::len);
    (0..width).map(|m| cells.iter().any(|row| row[m])).collect()
}

fn covered(cells: &[Vec<bool>], tests: &[usize]) -> Vec<bool> {
    let width = cells.first().map_or(0, Vec::len);
    (0..width).map(|m| tests.iter().any(|&t| cells[t][m])).collect()
}

/// Smallest number of rows covering every killable column, by exhaustion.
fn brute_force_optimum(cells: &[Vec<bool>]) -> usize {
    let target = killable_set(cells);
    let n = cells.len();
    (0u32..1 << n)
        .filter(|mask| {
            let tests: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            covered(cells, &tests) == target
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_cover_against_brute_force(
        rows in 1usize..=12,
        cols in 1usize..=20,
        density in 0.0f64..0.6,
        bits in prop::collection::vec(0.0f64..1.0, 240),
        order_seed in any::<u64>(),
    ) {
        let cells: Vec<Vec<bool>> =
            (0..rows).map(|t| (0..cols).map(|m| bits[t * 20 + m] < density).collect()).collect();
        let order = slmut::harness::tie_order(rows, order_seed, 0);
        for tie in [None, Some(order.as_slice())] {
            let chosen = select_minimal_tests(&cells, tie);
            prop_assert_eq!(covered(&cells, &chosen), killable_set(&cells));
            let optimum = brute_force_optimum(&cells);
            prop_assert!(chosen.len() >= optimum);
            let largest = cells.iter().map(|r| r.iter().filter(|k| **k).count()).max().unwrap_or(0);
            prop_assert!(chosen.len() as f64 <= harmonic(largest.max(1)) * optimum as f64 + 1e-9);
        }
    }
}

#[test]
fn art_spreads_points_further_than_random() {
    for dim in [1, 3] {
        let (mut art, mut random) = (0.0, 0.0);
        for seed in 0..20 {
            art += min_pairwise_distance(&art_points(dim, 50, 10, seed));
            random += min_pairwise_distance(&random_points(dim, 50, seed));
        }
        assert!(art / 20.0 > random / 20.0, "dim {dim}: art {art} random {random}");
    }
}

fn matrices() -> impl Iterator<Item = &'static KillMatrix> {
    BENCH.iter().flat_map(|(_, o)| [&o.matrix_mlm, &o.matrix_operators])
}

#[test]
fn requirement_kills_are_classical_kills() {
    let mut mutants = 0;
    let mut classical_only = 0;
    for km in matrices() {
        assert_eq!(km.tests.len(), 50);
        mutants += km.mutants.len();
        for (c_row, r_row) in km.classical.iter().zip(&km.req_aware) {
            for (&c, &r) in c_row.iter().zip(r_row) {
                assert!(!r || c);
                classical_only += (c && !r) as usize;
            }
        }
    }
    assert!(mutants >= 100 && BENCH.len() >= 3, "{mutants}");
    assert!(classical_only >= 1);
}

#[test]
fn reports_recount_from_the_matrices() {
    for (_, out) in BENCH.iter() {
        let r = &out.report;
        for nc in &r.notions {
            let (a, b) = (&out.matrix_mlm, &out.matrix_operators);
            assert_eq!(nc.killable_a, a.killable_count(Notion::Classical));
            assert_eq!(nc.killable_under_notion_a, a.killable_count(nc.notion));
            for run in &nc.runs {
                let idx = |m: &KillMatrix, ids: &[String]| -> Vec<usize> {
                    ids.iter().map(|id| m.test_index(id).unwrap()).collect()
                };
                let (sa, sb) = (idx(a, &run.selected_a), idx(b, &run.selected_b));
                // Cover completeness: the own selection kills the whole killable set.
                assert_eq!(a.killed_by(nc.notion, &sa), a.killable(nc.notion));
                assert_eq!(b.killed_by(nc.notion, &sb), b.killable(nc.notion));
                assert_eq!(run.killed_a, nc.killable_under_notion_a);
                assert_eq!(run.tests.union(), {
                    let mut all: Vec<_> = sa.iter().chain(&sb).collect();
                    all.sort();
                    all.dedup();
                    all.len()
                });
                let a_by_b = a.killed_by(nc.notion, &sb);
                let missed = a.killable(nc.notion).iter().zip(&a_by_b).filter(|(k, by)| **k && !**by).count();
                assert_eq!(run.a_not_killed_by_b, missed);
            }
            let mean = |f: &dyn Fn(&slmut::harness::RunResult) -> f64| {
                nc.runs.iter().map(f).sum::<f64>() / nc.runs.len() as f64
            };
            assert_eq!(nc.averages.killed_a, mean(&|r| r.killed_a as f64));
            assert_eq!(nc.averages.selected_b, mean(&|r| r.selected_b.len() as f64));
            assert_eq!(nc.averages.a_not_killed_by_b, mean(&|r| r.a_not_killed_by_b as f64));
        }
        let classical = r.notion(Notion::Classical).unwrap();
        let req = r.notion(Notion::ReqAware).unwrap();
        for (c, q) in classical.runs.iter().zip(&req.runs) {
            assert!(q.score_a.unwrap_or(0.0) <= c.score_a.unwrap_or(0.0));
            assert!(q.score_b.unwrap_or(0.0) <= c.score_b.unwrap_or(0.0));
        }
    }
}

#[test]
fn goto_tag_swaps_are_killed_under_both_notions() {
    let (_, out) = BENCH.iter().find(|(b, _)| b.model.name == "two_tank").unwrap();
    let swaps: Vec<usize> = out
        .mlm
        .mutants
        .iter()
        .enumerate()
        .filter(|(_, m)| m.pattern == MutationPattern::GotoFrom)
        .map(|(i, _)| i)
        .collect();
    assert!(!swaps.is_empty());
    for j in swaps {
        let km = &out.matrix_mlm;
        assert!(km.classical.iter().any(|row| row[j]), "{}", km.mutants[j]);
        assert!(km.req_aware.iter().any(|row| row[j]), "{}", km.mutants[j]);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let b = fixtures::bench_model("two_tank").unwrap();
    let bench = fixtures::bench();
    let mut p = OfflinePredictor::new();
    p.fit_models(bench.iter().map(|b| &b.model));
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_experiment(&b.model, &b.requirements, &b.space, &p, &config(&b)).unwrap())
    };
    let (one, eight) = (run(1), run(8));
    assert_eq!(one.report.to_json(), eight.report.to_json());
    assert_eq!(one.matrix_mlm, eight.matrix_mlm);
    assert_eq!(one.matrix_operators, eight.matrix_operators);
}
