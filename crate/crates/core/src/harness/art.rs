//! Reference-suite generation by adaptive random testing.
//!
//! A test is a point in the unit hypercube: one coordinate per input
//! segment, scaled to the declared range of its inport. Each new test is the
//! candidate farthest (max-min Euclidean distance) from the tests already
//! chosen.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ir::{BlockType, ModelIR};
use crate::sim::{Signal, TestCase};

pub const DEFAULT_SUITE_SIZE: usize = 50;
pub const DEFAULT_CANDIDATES_PER_PICK: usize = 10;
pub const DEFAULT_DURATION_STEPS: usize = 100;

/// Stimulus parameters of one inport: `segments` equal-length piecewise
/// constant levels drawn from `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDim {
    pub inport: String,
    pub min: f64,
    pub max: f64,
    #[serde(default = "one")]
    pub segments: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InputSpace {
    pub dims: Vec<InputDim>,
}

impl InputSpace {
    /// Every inport of `model` over `[-1, 1]` with `segments` levels.
    pub fn uniform(model: &ModelIR, segments: usize) -> Self {
        InputSpace {
            dims: model
                .ids_of(BlockType::Inport)
                .into_iter()
                .map(|id| InputDim { inport: id.to_string(), min: -1.0, max: 1.0, segments: segments.max(1) })
                .collect(),
        }
    }

    /// Number of normalized coordinates.
    pub fn dimension(&self) -> usize {
        self.dims.iter().map(|d| d.segments.max(1)).sum()
    }

    /// Test case for a normalized point.
    pub fn test_case(&self, id: impl Into<String>, point: &[f64], duration_steps: usize) -> TestCase {
        assert_eq!(point.len(), self.dimension(), "point dimension");
        let mut coords = point.iter();
        let inputs = self
            .dims
            .iter()
            .map(|d| {
                let segments = d.segments.max(1);
                let levels: Vec<f64> = coords.by_ref().take(segments).map(|u| d.min + u * (d.max - d.min)).collect();
                let signal = if segments == 1 {
                    Signal::Constant { value: levels[0] }
                } else {
                    Signal::PiecewiseConstant {
                        breakpoints: levels.iter().enumerate().map(|(i, v)| (i * duration_steps / segments, *v)).collect(),
                    }
                };
                (d.inport.clone(), signal)
            })
            .collect();
        TestCase { id: id.into(), duration_steps, inputs }
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn min_distance(point: &[f64], chosen: &[Vec<f64>]) -> f64 {
    chosen.iter().map(|c| distance(point, c)).fold(f64::INFINITY, f64::min)
}

/// Index of the candidate with the largest distance to its nearest chosen
/// point; the first such candidate on ties.
pub fn pick_farthest(chosen: &[Vec<f64>], candidates: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, c) in candidates.iter().enumerate() {
        let d = min_distance(c, chosen);
        if d > best.1 {
            best = (i, d);
        }
    }
    best.0
}

fn uniform_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen::<f64>()).collect()
}

/// `size` points in `[0, 1]^dim` chosen by adaptive random testing.
pub fn art_points(dim: usize, size: usize, candidates_per_pick: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(size);
    if size == 0 {
        return chosen;
    }
    chosen.push(uniform_point(&mut rng, dim));
    while chosen.len() < size {
        let candidates: Vec<Vec<f64>> = (0..candidates_per_pick.max(1)).map(|_| uniform_point(&mut rng, dim)).collect();
        let pick = pick_farthest(&chosen, &candidates);
        chosen.push(candidates.into_iter().nth(pick).expect("pick in range"));
    }
    chosen
}

/// `size` independent uniform points.
pub fn random_points(dim: usize, size: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| uniform_point(&mut rng, dim)).collect()
}

/// Smallest distance between any two points (infinite for fewer than two).
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min(distance(&points[i], &points[j]));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub size: usize,
    pub candidates_per_pick: usize,
    pub duration_steps: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            size: DEFAULT_SUITE_SIZE,
            candidates_per_pick: DEFAULT_CANDIDATES_PER_PICK,
            duration_steps: DEFAULT_DURATION_STEPS,
            seed: 0,
        }
    }
}

/// ART reference suite over `space`; test ids are `t001`, `t002`, ...
pub fn generate_reference_suite(space: &InputSpace, config: &SuiteConfig) -> Vec<TestCase> {
    art_points(space.dimension(), config.size, config.candidates_per_pick, config.seed)
        .iter()
        .enumerate()
        .map(|(i, p)| space.test_case(format!("t{:03}", i + 1), p, config.duration_steps))
        .collect()
}
