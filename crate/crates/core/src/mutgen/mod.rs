//! Mutant generation.
//!
//! Two sources feed the same pipeline: predictions of a masked-token
//! predictor ([`generate_mlm`]) and the rule catalog ([`generate_operators`]).
//! The pipeline drops replacements that equal the original value, removes
//! duplicate `(site, replacement)` pairs, and keeps only candidates whose
//! materialized model passes static validation and a short smoke run.
//!
//! Mutant order is canonical: site order of the rendered text, then
//! prediction rank or operator name. Ids are assigned after filtering, so
//! they do not depend on how the compile checks were scheduled.

mod classify;
mod operators;

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ir::{render_ir_file, validate, BlockType, IrError, ModelIR, PropertyValue, SiteTarget};
use crate::masking::{enumerate_sites, mask, MaskConfig, MaskSite, DEFAULT_CONTEXT_WINDOW};
use crate::predictor::{Predictor, PredictorError};
use crate::sim::smoke_run;

pub use classify::{classify_change, MutationPattern, STATEFLOW_KEYWORDS};

pub const DEFAULT_TOP_K: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// 1-based rank in the predictor's answer.
    Mlm { rank: usize, score: f64 },
    Operator { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Mlm,
    Operators,
}

impl Approach {
    pub fn tag(self) -> &'static str {
        match self {
            Approach::Mlm => "mlm",
            Approach::Operators => "op",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mutant {
    pub id: String,
    pub base_model: String,
    pub block_type: BlockType,
    pub site: MaskSite,
    pub replacement: PropertyValue,
    pub provenance: Provenance,
    pub pattern: MutationPattern,
}

impl Mutant {
    pub fn materialize(&self, base: &ModelIR) -> Result<ModelIR, IrError> {
        base.apply_delta(&self.site.block_id, &self.site.target, self.replacement.clone())
    }
}

/// Pattern of a mutant; pure function of its block type, site and values.
pub fn classify(mutant: &Mutant) -> MutationPattern {
    classify_change(mutant.block_type, &mutant.site.target, &mutant.site.original, &mutant.replacement)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// Distinct `(site, replacement)` candidates considered.
    pub generated: usize,
    pub discarded_identical: usize,
    pub discarded_uncompilable: usize,
}

impl GenerationStats {
    /// Kept mutants over candidates that differed from the original.
    pub fn compilable_fraction(&self) -> Option<f64> {
        let differing = self.generated - self.discarded_identical;
        (differing > 0).then(|| (differing - self.discarded_uncompilable) as f64 / differing as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutantSet {
    pub base_model: String,
    pub approach: Approach,
    pub mutants: Vec<Mutant>,
    pub stats: GenerationStats,
    /// Set when generation stopped early; `mutants` then covers only the
    /// sites handled before the failure.
    #[serde(default)]
    pub partial: bool,
}

impl MutantSet {
    pub fn ids(&self) -> Vec<&str> {
        self.mutants.iter().map(|m| m.id.as_str()).collect()
    }

    pub fn pattern_counts(&self) -> BTreeMap<MutationPattern, usize> {
        let mut out = BTreeMap::new();
        for m in &self.mutants {
            *out.entry(m.pattern).or_insert(0) += 1;
        }
        out
    }

    pub fn unclassified(&self) -> usize {
        self.mutants.iter().filter(|m| m.pattern == MutationPattern::Unclassified).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MutantReport::from(self)).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<MutantSet, serde_json::Error> {
        Ok(serde_json::from_str::<MutantReport>(text)?.set)
    }

    /// `(file name, IR JSON)` for every mutant model.
    pub fn export_models(&self, base: &ModelIR) -> Result<Vec<(String, String)>, IrError> {
        self.mutants
            .iter()
            .map(|m| Ok((format!("{}.json", m.id), render_ir_file(&m.materialize(base)?))))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct MutantReport {
    #[serde(flatten)]
    set: MutantSet,
    compilable_fraction: Option<f64>,
    pattern_counts: BTreeMap<String, usize>,
}

impl From<&MutantSet> for MutantReport {
    fn from(set: &MutantSet) -> Self {
        let mut pattern_counts: BTreeMap<String, usize> = MutationPattern::ROWS
            .iter()
            .chain(std::iter::once(&MutationPattern::Unclassified))
            .map(|p| (p.label().to_string(), 0))
            .collect();
        for (p, n) in set.pattern_counts() {
            pattern_counts.insert(p.label().to_string(), n);
        }
        MutantReport { set: set.clone(), compilable_fraction: set.stats.compilable_fraction(), pattern_counts }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{source}")]
pub struct GenerateError {
    pub source: PredictorError,
    /// Mutants from the sites processed before the failure.
    pub partial: Box<MutantSet>,
}

/// Static validation plus the smoke simulation.
pub fn compile_check(model: &ModelIR) -> Result<(), String> {
    let report = validate(model);
    if !report.ok {
        let first = report.errors().next().map(|d| d.to_string()).unwrap_or_default();
        return Err(first);
    }
    smoke_run(model).map_err(|e| e.to_string())
}

struct Candidate {
    site: MaskSite,
    block_type: BlockType,
    replacement: PropertyValue,
    provenance: Provenance,
}

fn finish(base: &ModelIR, approach: Approach, candidates: Vec<Candidate>, discarded_identical: usize) -> MutantSet {
    let mut seen: HashSet<(String, SiteTarget, String)> = HashSet::new();
    let mut distinct = Vec::with_capacity(candidates.len());
    for c in candidates {
        let key = (c.site.block_id.clone(), c.site.target.clone(), c.replacement.canonical());
        if seen.insert(key) {
            distinct.push(c);
        }
    }
    let mut stats = GenerationStats {
        generated: distinct.len() + discarded_identical,
        discarded_identical,
        discarded_uncompilable: 0,
    };

    let compiles: Vec<bool> = distinct
        .par_iter()
        .map(|c| {
            base.apply_delta(&c.site.block_id, &c.site.target, c.replacement.clone())
                .map(|m| compile_check(&m).is_ok())
                .unwrap_or(false)
        })
        .collect();

    let mut mutants = Vec::new();
    for (c, ok) in distinct.into_iter().zip(compiles) {
        if !ok {
            stats.discarded_uncompilable += 1;
            continue;
        }
        let pattern = classify_change(c.block_type, &c.site.target, &c.site.original, &c.replacement);
        mutants.push(Mutant {
            id: format!("{}-{}-{:04}", base.name, approach.tag(), mutants.len() + 1),
            base_model: base.name.clone(),
            block_type: c.block_type,
            site: c.site,
            replacement: c.replacement,
            provenance: c.provenance,
            pattern,
        });
    }
    MutantSet { base_model: base.name.clone(), approach, mutants, stats, partial: false }
}

fn block_type_of(model: &ModelIR, id: &str) -> BlockType {
    model.block(id).map_or(BlockType::StateflowStub, |b| b.block_type)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlmConfig {
    pub top_k: usize,
    pub context_window: usize,
    pub include_names: bool,
}

impl Default for MlmConfig {
    fn default() -> Self {
        MlmConfig { top_k: DEFAULT_TOP_K, context_window: DEFAULT_CONTEXT_WINDOW, include_names: false }
    }
}

/// Mask every site, ask `predictor` for replacements and keep the top `k`
/// that differ from the original value.
pub fn generate_mlm(model: &ModelIR, predictor: &dyn Predictor, config: &MlmConfig) -> Result<MutantSet, GenerateError> {
    let fail = |source: PredictorError, done: Vec<Candidate>, identical: usize| GenerateError {
        source,
        partial: Box::new(MutantSet { partial: true, ..finish(model, Approach::Mlm, done, identical) }),
    };
    if config.top_k == 0 {
        return Err(fail(PredictorError::InvalidInput("k must be at least 1".into()), Vec::new(), 0));
    }
    let handshake = predictor.handshake().map_err(|e| fail(e, Vec::new(), 0))?;
    let mask_config = MaskConfig {
        placeholder: handshake.mask_token.clone(),
        context_window: config.context_window.min(handshake.max_input_tokens.saturating_sub(1) / 2),
        include_names: config.include_names,
    };
    let sites = enumerate_sites(model, config.include_names);
    let seqs: Vec<_> = sites
        .iter()
        .map(|s| mask(model, s, &mask_config).expect("enumerated sites are maskable"))
        .collect();
    // One extra prediction leaves room for the original value itself.
    let answers = predictor.predict_batch(&seqs, config.top_k + 1);

    let mut candidates = Vec::new();
    let mut identical = 0;
    for (site, answer) in sites.iter().zip(answers) {
        let predictions = match answer {
            Ok(p) => p,
            Err(e) => return Err(fail(e, candidates, identical)),
        };
        let block_type = block_type_of(model, &site.block_id);
        let kind = match &site.target {
            SiteTarget::Name => crate::ir::ValueKind::Text,
            SiteTarget::Property(k) => block_type.kind_of(k),
        };
        let mut taken = 0;
        for (rank, p) in predictions.iter().enumerate() {
            if taken == config.top_k {
                break;
            }
            let replacement = PropertyValue::from_token(kind, &p.token);
            if replacement.same_as(&site.original) {
                identical += 1;
                continue;
            }
            taken += 1;
            candidates.push(Candidate {
                site: site.clone(),
                block_type,
                replacement,
                provenance: Provenance::Mlm { rank: rank + 1, score: p.score },
            });
        }
    }
    Ok(finish(model, Approach::Mlm, candidates, identical))
}

/// Apply the rule catalog to every property site.
pub fn generate_operators(model: &ModelIR) -> MutantSet {
    let mut candidates = Vec::new();
    let mut identical = 0;
    for site in enumerate_sites(model, false) {
        let Some(block) = model.block(&site.block_id) else { continue };
        let mut proposals = operators::proposals(model, block, &site.target);
        proposals.sort_by(|a, b| a.operator.cmp(&b.operator));
        for p in proposals {
            if p.replacement.same_as(&site.original) {
                identical += 1;
                continue;
            }
            candidates.push(Candidate {
                site: site.clone(),
                block_type: block.block_type,
                replacement: p.replacement,
                provenance: Provenance::Operator { name: p.operator },
            });
        }
    }
    finish(model, Approach::Operators, candidates, identical)
}

/// Sites whose values differ between two models with the same blocks.
pub fn value_diff(a: &ModelIR, b: &ModelIR) -> Vec<(String, SiteTarget)> {
    let values = |m: &ModelIR| -> BTreeMap<(String, SiteTarget), String> {
        enumerate_sites(m, true)
            .into_iter()
            .map(|s| ((s.block_id, s.target), s.original.canonical()))
            .collect()
    };
    let (va, vb) = (values(a), values(b));
    let keys: std::collections::BTreeSet<_> = va.keys().chain(vb.keys()).cloned().collect();
    keys.into_iter().filter(|k| va.get(k) != vb.get(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Block;
    use crate::masking::MaskedSequence;
    use crate::predictor::{Prediction, PredictorHandshake};

    struct Fixed(Vec<Prediction>);

    impl Predictor for Fixed {
        fn handshake(&self) -> Result<PredictorHandshake, PredictorError> {
            Ok(PredictorHandshake { mask_token: "<MASK>".into(), max_input_tokens: 4096, model_id: "fixed".into() })
        }

        fn predict(&self, _: &MaskedSequence, top_k: usize) -> Result<Vec<Prediction>, PredictorError> {
            Ok(self.0.iter().take(top_k).cloned().collect())
        }
    }

    fn relational(op: &str) -> ModelIR {
        let mut m = ModelIR::new("rel", 1.0);
        m.add(Block::new("a", "a", BlockType::Inport))
            .add(Block::new("k", "k", BlockType::Constant).with("Value", PropertyValue::Number(0.5)))
            .add(Block::new("r", "r", BlockType::RelationalOperator).with("Operator", PropertyValue::symbol(op)))
            .add(Block::new("y", "y", BlockType::Outport))
            .connect("a", 0, "r", 0)
            .connect("k", 0, "r", 1)
            .connect("r", 0, "y", 0);
        m
    }

    #[test]
    fn relational_operator_mutants() {
        let set = generate_operators(&relational("<"));
        let ops: Vec<String> = set
            .mutants
            .iter()
            .filter(|m| m.site.target == SiteTarget::property("Operator"))
            .map(|m| m.replacement.token())
            .collect();
        assert_eq!(ops, ["==", "~=", "<=", ">", ">="]);
        assert!(set.mutants.iter().all(|m| m.pattern != MutationPattern::Unclassified));
    }

    #[test]
    fn zero_constant_negation_is_identical() {
        let mut m = ModelIR::new("zero", 1.0);
        m.add(Block::new("k", "k", BlockType::Constant).with("Value", PropertyValue::Number(0.0)))
            .add(Block::new("y", "y", BlockType::Outport))
            .connect("k", 0, "y", 0);
        let set = generate_operators(&m);
        let kept: Vec<String> = set.mutants.iter().map(|m| m.replacement.token()).collect();
        // negate (-0) and times-ten (0) both canonicalize to the original.
        assert_eq!(kept, ["-1", "1"]);
        assert_eq!(set.stats.discarded_identical, 2);
        assert_eq!(set.stats.generated, 4);
    }

    #[test]
    fn identity_predictions_are_discarded() {
        let set = generate_mlm(&relational("<"), &Fixed(vec![Prediction::new("<", 1.0)]), &MlmConfig::default()).unwrap();
        assert!(set.mutants.is_empty());
        // Two sites (Value and Operator), each answered with "<" once; on the
        // Value site "<" is a different (invalid) value.
        assert_eq!(set.stats.discarded_identical, 1);
        assert_eq!(set.stats.discarded_uncompilable, 1);
        assert_eq!(set.stats.generated, 2);
    }

    #[test]
    fn top_k_skips_the_original() {
        let preds = vec![
            Prediction::new("<", 0.5),
            Prediction::new(">", 0.2),
            Prediction::new("<=", 0.1),
            Prediction::new("==", 0.1),
        ];
        let cfg = MlmConfig { top_k: 2, ..MlmConfig::default() };
        let set = generate_mlm(&relational("<"), &Fixed(preds), &cfg).unwrap();
        let op: Vec<(String, Provenance)> = set
            .mutants
            .iter()
            .filter(|m| m.site.target == SiteTarget::property("Operator"))
            .map(|m| (m.replacement.token(), m.provenance.clone()))
            .collect();
        assert_eq!(
            op,
            [
                (">".to_string(), Provenance::Mlm { rank: 2, score: 0.2 }),
                ("<=".to_string(), Provenance::Mlm { rank: 3, score: 0.1 })
            ]
        );
        let s = set.stats;
        assert_eq!(s.generated, set.mutants.len() + s.discarded_identical + s.discarded_uncompilable);
    }

    #[test]
    fn k_zero_is_rejected() {
        let cfg = MlmConfig { top_k: 0, ..MlmConfig::default() };
        let err = generate_mlm(&relational("<"), &Fixed(vec![]), &cfg).unwrap_err();
        assert!(matches!(err.source, PredictorError::InvalidInput(_)));
    }

    #[test]
    fn report_round_trips() {
        let set = generate_operators(&relational(">="));
        let json = set.to_json();
        assert!(json.contains("\"compilable_fraction\""));
        assert!(json.contains("Mutate math, relational and logical operator blocks"));
        assert_eq!(MutantSet::from_json(&json).unwrap(), set);
    }

    #[test]
    fn each_mutant_changes_one_value() {
        let base = relational("<=");
        for m in generate_operators(&base).mutants {
            let model = m.materialize(&base).unwrap();
            assert_eq!(value_diff(&base, &model), vec![(m.site.block_id.clone(), m.site.target.clone())]);
        }
    }
}
