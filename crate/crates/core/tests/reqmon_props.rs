use std::collections::BTreeMap;

use proptest::prelude::*;
use slmut::reqmon::{check, Pattern, Predicate, Requirement, Rhs, Verdict};
use slmut::sim::SignalTrace;

const OPS: &[&str] = &["<", "<=", ">", ">=", "==", "~="];

fn predicate() -> impl Strategy<Value = Predicate> {
    (prop::sample::select(vec!["a", "b"]), prop::sample::select(OPS.to_vec()), prop_oneof![
        (-2i32..=2).prop_map(|c| Rhs::Const(c as f64)),
        Just(Rhs::Signal("b".to_string())),
    ])
        .prop_map(|(s, op, rhs)| Predicate::new(s, op, rhs))
}

fn requirement() -> impl Strategy<Value = Requirement> {
    prop_oneof![
        predicate().prop_map(|pred| Pattern::Always { pred }),
        predicate().prop_map(|pred| Pattern::Never { pred }),
        (predicate(), predicate(), 0usize..4)
            .prop_map(|(trigger, response, deadline)| Pattern::ImpliesWithin { trigger, response, deadline }),
    ]
    .prop_map(|pattern| Requirement { id: "r".into(), pattern })
}

fn trace(a: &[i32], b: &[i32], aborted_at: Option<usize>) -> SignalTrace {
    let mut signals = BTreeMap::new();
    signals.insert("a".to_string(), a.iter().map(|&x| x as f64).collect());
    signals.insert("b".to_string(), b.iter().map(|&x| x as f64).collect());
    SignalTrace { signals, aborted_at }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// Extending a trace never turns a violation into satisfaction, and the
    /// reported step stays the same.
    #[test]
    fn monotone_refinement(
        req in requirement(),
        values in prop::collection::vec((-2i32..=2, -2i32..=2), 0..25),
        cut in any::<prop::sample::Index>(),
    ) {
        let (a, b): (Vec<i32>, Vec<i32>) = values.into_iter().unzip();
        let p = if a.is_empty() { 0 } else { cut.index(a.len() + 1) };
        let prefix = check(&req, &trace(&a[..p], &b[..p], None)).unwrap();
        let full = check(&req, &trace(&a, &b, None)).unwrap();
        if let Verdict::Violated { step } = prefix {
            prop_assert_eq!(full, Verdict::Violated { step });
        }
    }

    #[test]
    fn check_is_pure(req in requirement(), values in prop::collection::vec((-2i32..=2, -2i32..=2), 0..25)) {
        let (a, b): (Vec<i32>, Vec<i32>) = values.into_iter().unzip();
        let t = trace(&a, &b, None);
        prop_assert_eq!(check(&req, &t).unwrap(), check(&req, &t.clone()).unwrap());
    }

    /// Aborting violates Always/Never outright; ImpliesWithin only while an
    /// obligation is still open.
    #[test]
    fn aborted_traces(req in requirement(), values in prop::collection::vec((-2i32..=2, -2i32..=2), 1..25)) {
        let (a, b): (Vec<i32>, Vec<i32>) = values.into_iter().unzip();
        let at = a.len();
        let complete = check(&req, &trace(&a, &b, None)).unwrap();
        let aborted = check(&req, &trace(&a, &b, Some(at))).unwrap();
        match (&req.pattern, complete) {
            (_, Verdict::Violated { step }) => prop_assert_eq!(aborted, Verdict::Violated { step }),
            (Pattern::ImpliesWithin { .. }, Verdict::Satisfied { vacuous_tail: false }) => {
                prop_assert_eq!(aborted, Verdict::Satisfied { vacuous_tail: false })
            }
            _ => prop_assert_eq!(aborted, Verdict::Violated { step: at }),
        }
    }
}
