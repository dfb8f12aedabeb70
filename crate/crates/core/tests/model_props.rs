//! Invariants of rendering, deltas, ingestion, corpus masking and the
//! offline predictor over randomized models.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slmut::fixtures::{self, random_model};
use slmut::ingest::{build_corpus, parse_model, read_jsonl, write_jsonl, ModelFormat};
use slmut::ir::{render_text, render_with_spans, validate, ModelIR, PropertyValue};
use slmut::masking::{enumerate_sites, mask, tokenize, MaskConfig};
use slmut::predictor::{prediction_order, OfflinePredictor, Predictor};

/// A value of the same kind that prints differently from `v`.
fn other_value(v: &PropertyValue, salt: u64) -> PropertyValue {
    match v {
        PropertyValue::Number(x) => PropertyValue::Number(x + 1.0 + salt as f64),
        PropertyValue::Enum(s) => PropertyValue::symbol(format!("{s}_{salt}")),
        PropertyValue::Text(s) => PropertyValue::text(format!("{s}~{salt}")),
    }
}

fn strip_spans(model: &ModelIR) -> (String, Vec<String>) {
    let (text, spans) = render_with_spans(model);
    let mut skeleton = String::new();
    let mut literals = Vec::new();
    let mut cursor = 0;
    for s in &spans {
        skeleton.push_str(&text[cursor..s.start]);
        skeleton.push('\u{0}');
        literals.push(text[s.start..s.end].to_string());
        cursor = s.end;
    }
    skeleton.push_str(&text[cursor..]);
    (skeleton, literals)
}

fn to_xml(m: &ModelIR) -> String {
    fn esc(s: &str) -> String {
        s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
    }
    let mut out = format!("<Model Name=\"{}\" SampleTime=\"{}\">\n", esc(&m.name), m.sample_time);
    for b in &m.blocks {
        out.push_str(&format!(
            "  <Block BlockType=\"{}\" Name=\"{}\" SID=\"{}\">\n",
            b.block_type.as_str(),
            esc(&b.name),
            esc(&b.id)
        ));
        for (k, v) in &b.properties {
            out.push_str(&format!("    <P Name=\"{k}\">{}</P>\n", esc(&v.token())));
        }
        out.push_str("  </Block>\n");
    }
    for c in &m.connections {
        let name = |id: &str| esc(&m.block(id).map_or(id.to_string(), |b| b.name.clone()));
        out.push_str(&format!(
            "  <Line SrcBlock=\"{}\" SrcPort=\"{}\" DstBlock=\"{}\" DstPort=\"{}\"/>\n",
            name(&c.src_block),
            c.src_port + 1,
            name(&c.dst_block),
            c.dst_port + 1
        ));
    }
    out.push_str("</Model>\n");
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn delta_changes_exactly_one_value_occurrence(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let m = random_model(seed);
        let sites = enumerate_sites(&m, true);
        let site = &sites[pick.index(sites.len())];
        let mutated = m.apply_delta(&site.block_id, &site.target, other_value(&site.original, seed % 7)).unwrap();
        let (skel_a, lits_a) = strip_spans(&m);
        let (skel_b, lits_b) = strip_spans(&mutated);
        prop_assert_eq!(skel_a, skel_b);
        prop_assert_eq!(lits_a.iter().zip(&lits_b).filter(|(a, b)| a != b).count(), 1);
    }

    #[test]
    fn reapplying_the_original_restores_the_rendering(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let m = random_model(seed);
        let sites = enumerate_sites(&m, true);
        let site = &sites[pick.index(sites.len())];
        let there = m.apply_delta(&site.block_id, &site.target, other_value(&site.original, 3)).unwrap();
        let back = there.apply_delta(&site.block_id, &site.target, site.original.clone()).unwrap();
        prop_assert_eq!(render_text(&back), render_text(&m));
        let same = m.apply_delta(&site.block_id, &site.target, site.original.clone()).unwrap();
        prop_assert_eq!(render_text(&same), render_text(&m));
    }

    #[test]
    fn sites_address_their_literals(seed in any::<u64>()) {
        let m = random_model(seed);
        let text = render_text(&m);
        for site in enumerate_sites(&m, true) {
            let literal = &text[site.text_span.0..site.text_span.1];
            prop_assert_eq!(literal, site.original.canonical());
            let reparsed: serde_json::Value = serde_json::from_str(literal).unwrap();
            match &site.original {
                PropertyValue::Number(x) => prop_assert_eq!(reparsed.as_f64(), Some(*x)),
                other => prop_assert_eq!(reparsed.as_str(), other.as_str()),
            }
        }
    }

    #[test]
    fn truncated_windows_are_centred(seed in any::<u64>(), w in 1usize..12) {
        let m = random_model(seed);
        let cfg = MaskConfig { context_window: w, ..MaskConfig::default() };
        for site in enumerate_sites(&m, true) {
            let seq = mask(&m, &site, &cfg).unwrap();
            prop_assert_eq!(seq.placeholder_count(), 1);
            let full = render_text(&m);
            prop_assert_eq!(seq.unmask(&site.original), &full[seq.window.0..seq.window.1]);
            let toks = tokenize(&seq.text);
            if seq.window != (0, full.len()) {
                let i = toks.iter().position(|t| t.start <= seq.mask_offset && seq.mask_offset < t.end).unwrap();
                let (before, after) = (i, toks.len() - 1 - i);
                prop_assert!(before <= w && after <= w && (before == w || after == w), "{before} / {after}");
                if toks.len() == 2 * w + 1 {
                    let centre = w as f64;
                    prop_assert!((i as f64 - centre).abs() <= 1.0);
                }
            }
        }
    }

    #[test]
    fn xml_ingest_is_total(seed in any::<u64>(), cuts in prop::collection::vec(any::<prop::sample::Index>(), 0..3)) {
        let m = random_model(seed);
        let mut xml = to_xml(&m);
        if cuts.is_empty() {
            let parsed = parse_model(&xml, ModelFormat::Xml);
            prop_assert!(parsed.is_ok(), "{parsed:?}\n{xml}");
            let parsed = parsed.unwrap().model;
            prop_assert_eq!(parsed.blocks.len(), m.blocks.len());
            prop_assert_eq!(parsed.connections, m.connections);
        }
        for cut in cuts {
            let mut at = cut.index(xml.len());
            while !xml.is_char_boundary(at) {
                at -= 1;
            }
            xml.remove(at);
            let _ = parse_model(&xml, ModelFormat::Xml);
        }
    }

    #[test]
    fn corpus_masking_is_reversible(seeds in prop::collection::vec(any::<u64>(), 1..6), seed in any::<u64>(), rate in 0.05f64..0.95) {
        let models: Vec<ModelIR> = seeds.iter().map(|s| random_model(*s)).collect();
        let records = build_corpus(&models, rate, seed, "<MASK>").unwrap();
        prop_assert_eq!(records.len(), models.len());
        for (r, m) in records.iter().zip(&models) {
            prop_assert_eq!(&r.text, &render_text(m));
            prop_assert_eq!(r.unmask("<MASK>"), r.text.clone());
            prop_assert_eq!(tokenize(&r.masked_text).len(), tokenize(&r.text).len());
        }
        let jsonl = write_jsonl(&records);
        prop_assert_eq!(read_jsonl(&jsonl).unwrap(), records.clone());
        prop_assert_eq!(write_jsonl(&build_corpus(&models, rate, seed, "<MASK>").unwrap()), jsonl);
    }

    #[test]
    fn offline_predictions_are_deterministic_and_sane(seed in any::<u64>(), k in 1usize..8) {
        let corpus: Vec<ModelIR> = (0..5).map(|i| random_model(seed.wrapping_add(i))).collect();
        let mut a = OfflinePredictor::new();
        a.fit_models(&corpus);
        let mut b = OfflinePredictor::new();
        b.fit_models(corpus.iter().rev());
        let m = random_model(seed ^ 0x5eed);
        for site in enumerate_sites(&m, true) {
            let seq = mask(&m, &site, &MaskConfig::default()).unwrap();
            let pa = a.predict(&seq, k).unwrap();
            prop_assert_eq!(&pa, &b.predict(&seq, k).unwrap());
            prop_assert!(pa.len() <= k);
            for p in &pa {
                prop_assert!(p.score.is_finite() && p.score > 0.0 && p.score <= 1.0);
            }
            for w in pa.windows(2) {
                prop_assert_eq!(prediction_order(&w[0], &w[1]), std::cmp::Ordering::Less);
            }
        }
    }
}

#[test]
fn identity_deltas_keep_models_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut models: Vec<ModelIR> = fixtures::bench().into_iter().map(|b| b.model).collect();
    models.extend((0..200).map(random_model).filter(|m| validate(m).ok));
    let mut checked = 0;
    for m in &models {
        assert!(validate(m).ok);
        let sites = enumerate_sites(m, true);
        for _ in 0..5 {
            let s = &sites[rng.gen_range(0..sites.len())];
            let same = m.apply_delta(&s.block_id, &s.target, s.original.clone()).unwrap();
            assert!(validate(&same).ok);
            checked += 1;
        }
    }
    assert!(checked >= 20);
}

#[test]
fn hundred_token_model_masks_fifteen() {
    // 50 names plus 50 values: 100 maskable tokens.
    let mut m = ModelIR::new("hundred", 1.0);
    for i in 0..50 {
        m.add(
            slmut::ir::Block::new(format!("c{i:03}"), format!("c{i}"), slmut::ir::BlockType::Constant)
                .with("Value", PropertyValue::Number(i as f64)),
        );
    }
    for seed in 0..20 {
        let r = &build_corpus(std::slice::from_ref(&m), 0.15, seed, "<MASK>").unwrap()[0];
        assert!((13..=17).contains(&r.targets.len()), "{}", r.targets.len());
    }
}
