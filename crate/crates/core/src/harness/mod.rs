//! Experiment harness: reference suites, kill matrices, test selection and
//! the comparison of two mutant sets.
//!
//! All parallel work runs on the ambient rayon pool; results never depend
//! on the number of worker threads.

mod art;
mod compare;
mod matrix;
mod select;

use serde::{Deserialize, Serialize};

use crate::ir::ModelIR;
use crate::mutgen::{generate_mlm, generate_operators, GenerateError, MlmConfig, MutantSet};
use crate::predictor::Predictor;
use crate::reqmon::{MonitorError, RequirementSet};
use crate::sim::{RuntimeFault, SimError, TestCase};

pub use art::{
    art_points, distance, generate_reference_suite, min_pairwise_distance, pick_farthest, random_points, InputDim,
    InputSpace, SuiteConfig, DEFAULT_CANDIDATES_PER_PICK, DEFAULT_DURATION_STEPS, DEFAULT_SUITE_SIZE,
};
pub use compare::{compare_matrices, tie_order, Averages, ComparisonReport, NotionComparison, Overlap, RunResult};
pub use matrix::{compute_kill_matrix, ExcludedPair, KillMatrix, Notion, DEFAULT_TOLERANCE};
pub use select::{mutation_score, select_minimal_tests};

pub const DEFAULT_REPETITIONS: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("original model faults on test `{test}`: {fault}")]
    OriginalFault { test: String, fault: RuntimeFault },
    #[error("cannot simulate test `{test}`: {error}")]
    Simulation { test: String, error: SimError },
    #[error(transparent)]
    Requirements(MonitorError),
    #[error("mutant: {0}")]
    Mutant(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mlm: MlmConfig,
    pub suite: SuiteConfig,
    pub tolerance: f64,
    pub repetitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mlm: MlmConfig::default(),
            suite: SuiteConfig::default(),
            tolerance: DEFAULT_TOLERANCE,
            repetitions: DEFAULT_REPETITIONS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub mlm: MutantSet,
    pub operators: MutantSet,
    pub suite: Vec<TestCase>,
    pub matrix_mlm: KillMatrix,
    pub matrix_operators: KillMatrix,
    pub report: ComparisonReport,
}

/// Generate both mutant sets, an ART suite and their kill matrices, then compare.
pub fn run_experiment(
    model: &ModelIR,
    reqs: &RequirementSet,
    space: &InputSpace,
    predictor: &dyn Predictor,
    config: &ExperimentConfig,
) -> Result<ExperimentOutput, HarnessError> {
    if config.suite.size == 0 {
        return Err(HarnessError::Config("suite size must be at least 1".into()));
    }
    let mlm = generate_mlm(model, predictor, &config.mlm)?;
    let operators = generate_operators(model);
    let suite = generate_reference_suite(space, &config.suite);
    let matrix_mlm = compute_kill_matrix(model, &mlm.mutants, &suite, reqs, config.tolerance)?;
    let matrix_operators = compute_kill_matrix(model, &operators.mutants, &suite, reqs, config.tolerance)?;
    let report = compare_matrices(
        &model.name,
        ("mlm", "operators"),
        &matrix_mlm,
        &matrix_operators,
        config.repetitions,
        config.suite.seed,
    )?;
    Ok(ExperimentOutput { mlm, operators, suite, matrix_mlm, matrix_operators, report })
}
