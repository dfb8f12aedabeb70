//! Small example models with requirements and input ranges, embedded at
//! build time. Used by tests, the acceptance suite and as a default bench.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::harness::{InputDim, InputSpace};
use crate::ingest::{parse_model, IngestError, ModelFormat};
use crate::ir::{Block, BlockType, ModelIR, PropertyValue, SiteTarget, ValueKind};
use crate::masking::enumerate_sites;
use crate::mutgen::{classify_change, Mutant, MutationPattern, Provenance};
use crate::reqmon::RequirementSet;

const FILES: &[(&str, &str)] = &[
    ("bench.json", include_str!("../fixtures/bench.json")),
    ("two_tank.xml", include_str!("../fixtures/two_tank.xml")),
    ("two_tank.req.json", include_str!("../fixtures/two_tank.req.json")),
    ("tag_router.json", include_str!("../fixtures/tag_router.json")),
    ("tag_router.req.json", include_str!("../fixtures/tag_router.req.json")),
    ("integrator.json", include_str!("../fixtures/integrator.json")),
    ("integrator.req.json", include_str!("../fixtures/integrator.req.json")),
    ("fsm_controller.xml", include_str!("../fixtures/fsm_controller.xml")),
    ("fsm_controller.req.json", include_str!("../fixtures/fsm_controller.req.json")),
];

/// Directory holding the fixture files on disk.
pub fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Embedded contents of a fixture file.
pub fn source(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// One entry of a bench file; paths are relative to the bench file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BenchEntry {
    pub model: String,
    #[serde(default)]
    pub requirements: Option<String>,
    pub duration_steps: usize,
    pub inputs: Vec<InputDim>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BenchFile {
    pub models: Vec<BenchEntry>,
}

impl BenchFile {
    pub fn parse(text: &str) -> Result<BenchFile, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone)]
pub struct BenchModel {
    pub model: ModelIR,
    pub requirements: RequirementSet,
    pub space: InputSpace,
    pub duration_steps: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("unknown fixture `{0}`")]
    Missing(String),
    #[error("fixture `{name}`: {source}")]
    Ingest { name: String, source: IngestError },
    #[error("fixture `{name}`: {message}")]
    Format { name: String, message: String },
}

/// Build bench models, resolving file names through `read`.
pub fn load_bench_with(
    bench: &BenchFile,
    mut read: impl FnMut(&str) -> Result<String, FixtureError>,
) -> Result<Vec<BenchModel>, FixtureError> {
    bench
        .models
        .iter()
        .map(|e| {
            let format = ModelFormat::from_path(Path::new(&e.model)).ok_or_else(|| FixtureError::Format {
                name: e.model.clone(),
                message: "unrecognized model file extension".into(),
            })?;
            let model = parse_model(&read(&e.model)?, format)
                .map_err(|source| FixtureError::Ingest { name: e.model.clone(), source })?
                .model;
            let requirements = match &e.requirements {
                Some(r) => RequirementSet::parse(&read(r)?)
                    .map_err(|err| FixtureError::Format { name: r.clone(), message: err.to_string() })?,
                None => RequirementSet::default(),
            };
            Ok(BenchModel {
                model,
                requirements,
                space: InputSpace { dims: e.inputs.clone() },
                duration_steps: e.duration_steps,
            })
        })
        .collect()
}

/// The embedded fixture bench.
pub fn bench() -> Vec<BenchModel> {
    let file = BenchFile::parse(source("bench.json").expect("bench present")).expect("embedded bench parses");
    load_bench_with(&file, |name| {
        source(name).map(str::to_string).ok_or_else(|| FixtureError::Missing(name.to_string()))
    })
    .expect("embedded fixtures load")
}

/// One embedded bench model by model name.
pub fn bench_model(name: &str) -> Option<BenchModel> {
    bench().into_iter().find(|b| b.model.name == name)
}

/// An embedded model file by file name.
pub fn model(file: &str) -> Result<ModelIR, FixtureError> {
    let text = source(file).ok_or_else(|| FixtureError::Missing(file.to_string()))?;
    let format = ModelFormat::from_path(Path::new(file))
        .ok_or_else(|| FixtureError::Format { name: file.into(), message: "unrecognized extension".into() })?;
    parse_model(text, format)
        .map(|p| p.model)
        .map_err(|source| FixtureError::Ingest { name: file.into(), source })
}

/// One hand-seeded mutant per mutation pattern, over the fixture models:
/// `(expected pattern, base model, mutant)`.
pub fn seeded_pattern_mutants() -> Vec<(MutationPattern, ModelIR, Mutant)> {
    use MutationPattern::*;
    let tank = model("two_tank.xml").expect("fixture");
    let fsm = model("fsm_controller.xml").expect("fixture");
    let seeds: [(MutationPattern, &ModelIR, &str, &str, PropertyValue); 10] = [
        (SignalDataTypes, &fsm, "limit", "OutDataTypeStr", PropertyValue::symbol("double")),
        (GotoFrom, &tank, "sh_from", "GotoTag", PropertyValue::text("SL_Input")),
        (SaturateOnIntegerOverflow, &fsm, "scale", "SaturateOnIntegerOverflow", PropertyValue::symbol("off")),
        (ConstantGain, &tank, "drain", "Gain", PropertyValue::Number(2.0)),
        (Operators, &fsm, "over", "Operator", PropertyValue::symbol("<")),
        (InitialConditionsSampleTime, &tank, "level", "InitialCondition", PropertyValue::Number(0.0)),
        (StateflowTransitionConditions, &fsm, "mode_chart", "Condition", PropertyValue::text("after(3, tick) && speed >= limit")),
        (StateflowVariableNames, &fsm, "mode_chart", "Variables", PropertyValue::text("mode, counter")),
        (StateflowActions, &fsm, "mode_chart", "EntryAction", PropertyValue::text("mode = 2;")),
        (StateflowKeywords, &fsm, "mode_chart", "Condition", PropertyValue::text("before(3, tick) && speed > limit")),
    ];
    seeds
        .into_iter()
        .enumerate()
        .map(|(i, (pattern, base, block, key, replacement))| {
            let target = SiteTarget::property(key);
            let site = enumerate_sites(base, false)
                .into_iter()
                .find(|s| s.block_id == block && s.target == target)
                .expect("seeded site exists");
            let block_type = base.block(block).expect("seeded block exists").block_type;
            let found = classify_change(block_type, &site.target, &site.original, &replacement);
            let mutant = Mutant {
                id: format!("{}-seeded-{i:04}", base.name),
                base_model: base.name.clone(),
                block_type,
                site,
                replacement,
                provenance: Provenance::Operator { name: "seeded".into() },
                pattern: found,
            };
            (pattern, base.clone(), mutant)
        })
        .collect()
}

fn random_number(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(-20i32..=20) as f64,
        1 => rng.gen_range(-1000i32..=1000) as f64 / 100.0,
        2 => rng.gen::<f64>() * 10f64.powi(rng.gen_range(-9..=9)),
        _ => -rng.gen::<f64>() * 1e6,
    }
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    const PIECES: &[&str] = &["after(2, tick)", " && ", "x > 1", "y = \"on\";", "\\", "\u{e9}t\u{e9}", "\n", "tab\t", "{}[]", ":,"];
    (0..rng.gen_range(1..4)).map(|_| *PIECES.choose(rng).expect("pieces")).collect()
}

fn random_value(rng: &mut ChaCha8Rng, kind: ValueKind) -> PropertyValue {
    const TAGS: &[&str] = &["SL_Input", "SH_Input", "prev_pump", "next_pump", "A1"];
    match kind {
        ValueKind::Number => PropertyValue::Number(random_number(rng)),
        ValueKind::Enum(vocab) => PropertyValue::symbol(*vocab.choose(rng).expect("vocabulary")),
        ValueKind::Pattern(alphabet) => PropertyValue::symbol(
            (0..rng.gen_range(1..4)).map(|_| *alphabet.choose(rng).expect("alphabet")).collect::<String>(),
        ),
        ValueKind::Tag => PropertyValue::text(*TAGS.choose(rng).expect("tags")),
        ValueKind::Text => PropertyValue::text(random_text(rng)),
    }
}

/// A pseudo-random model over every supported block type, for round-trip
/// and rendering checks. Not necessarily valid or simulable.
pub fn random_model(seed: u64) -> ModelIR {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = ModelIR::new(format!("random_{seed}"), [0.1, 1.0, 0.01, 0.25][rng.gen_range(0..4)]);
    let n = rng.gen_range(1..=20);
    for i in 0..n {
        let bt = *BlockType::ALL.choose(&mut rng).expect("block types");
        let name = match rng.gen_range(0..4) {
            0 => format!("blk \"{i}\""),
            1 => format!("bloc_\u{e9}_{i}"),
            _ => format!("{}_{i}", bt.as_str().to_ascii_lowercase()),
        };
        let mut block = Block::new(format!("b{i:02}"), name, bt);
        for spec in bt.properties() {
            if spec.required || rng.gen_bool(0.5) {
                block = block.with(spec.key, random_value(&mut rng, spec.kind));
            }
        }
        if bt == BlockType::StateflowStub {
            for key in ["Condition", "EntryAction", "Variables"] {
                if rng.gen_bool(0.7) {
                    block = block.with(key, PropertyValue::text(random_text(&mut rng)));
                }
            }
        }
        m.add(block);
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        m.connect(&format!("b{a:02}"), rng.gen_range(0..2), &format!("b{b:02}"), rng.gen_range(0..3));
    }
    m
}
