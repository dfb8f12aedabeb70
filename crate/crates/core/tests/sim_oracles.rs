use proptest::prelude::*;
use slmut::fixtures;
use slmut::ir::{Block, BlockType, ModelIR, PropertyValue, SiteTarget};
use slmut::sim::{simulate, Signal, TestCase};

fn test_case(steps: usize, inputs: Vec<(&str, Signal)>) -> TestCase {
    TestCase {
        id: "t".into(),
        duration_steps: steps,
        inputs: inputs.into_iter().map(|(k, s)| (k.to_string(), s)).collect(),
    }
}

#[test]
fn forward_euler_integrator() {
    let mut m = ModelIR::new("euler", 0.1);
    m.add(Block::new("u", "u", BlockType::Inport))
        .add(Block::new("x", "x", BlockType::DiscreteIntegrator).with("InitialCondition", PropertyValue::Number(0.0)))
        .add(Block::new("y", "y", BlockType::Outport))
        .connect("u", 0, "x", 0)
        .connect("x", 0, "y", 0);
    let trace = simulate(&m, &test_case(10, vec![("u", Signal::Constant { value: 1.0 })])).unwrap();
    // x[t+1] = x[t] + 0.1 * 1, accumulated exactly as the recurrence does.
    let mut x = 0.0f64;
    let mut expected = Vec::new();
    for _ in 0..10 {
        expected.push(x);
        x += 0.1 * 1.0;
    }
    let got = trace.get("y").unwrap();
    assert_eq!(got, expected.as_slice());
    for (t, v) in got.iter().enumerate() {
        assert!((v - 0.1 * t as f64).abs() < 1e-12);
    }
}

fn delay_chain(n: usize) -> ModelIR {
    let mut m = ModelIR::new("chain", 1.0);
    m.add(Block::new("u", "u", BlockType::Inport));
    let mut prev = "u".to_string();
    for i in 0..n {
        let id = format!("d{i}");
        m.add(Block::new(&id, &id, BlockType::UnitDelay).with("InitialCondition", PropertyValue::Number(0.0)));
        m.connect(&prev, 0, &id, 0);
        prev = id;
    }
    m.add(Block::new("y", "y", BlockType::Outport)).connect(&prev, 0, "y", 0);
    m
}

fn mixed_model() -> ModelIR {
    let mut m = ModelIR::new("mixed", 0.5);
    m.add(Block::new("u", "u", BlockType::Inport))
        .add(Block::new("k", "k", BlockType::Constant).with("Value", PropertyValue::Number(0.25)))
        .add(Block::new("s", "s", BlockType::Sum).with("Signs", PropertyValue::symbol("+-+")))
        .add(Block::new("g", "g", BlockType::Gain).with("Gain", PropertyValue::Number(0.9)))
        .add(Block::new("d", "d", BlockType::UnitDelay).with("InitialCondition", PropertyValue::Number(1.0)))
        .add(Block::new("i", "i", BlockType::DiscreteIntegrator).with("InitialCondition", PropertyValue::Number(0.0)))
        .add(
            Block::new("sat", "sat", BlockType::Saturation)
                .with("UpperLimit", PropertyValue::Number(3.0))
                .with("LowerLimit", PropertyValue::Number(-3.0)),
        )
        .add(Block::new("y", "y", BlockType::Outport))
        .add(Block::new("z", "z", BlockType::Outport))
        .connect("u", 0, "s", 0)
        .connect("d", 0, "s", 1)
        .connect("k", 0, "s", 2)
        .connect("s", 0, "g", 0)
        .connect("g", 0, "d", 0)
        .connect("g", 0, "i", 0)
        .connect("i", 0, "sat", 0)
        .connect("sat", 0, "y", 0)
        .connect("d", 0, "z", 0);
    m
}

proptest! {
    #[test]
    fn unit_delay_chain_shifts_input(n in 1usize..=5, values in prop::collection::vec(-100.0f64..100.0, 1..30)) {
        let breakpoints: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
        let steps = values.len();
        let trace = simulate(&delay_chain(n), &test_case(steps, vec![("u", Signal::PiecewiseConstant { breakpoints })])).unwrap();
        let y = trace.get("y").unwrap();
        for t in 0..steps {
            let expected = if t < n { 0.0 } else { values[t - n] };
            prop_assert_eq!(y[t], expected);
        }
    }

    #[test]
    fn declaration_order_does_not_matter(perm in Just((0..9usize).collect::<Vec<_>>()).prop_shuffle(), slope in -2.0f64..2.0) {
        let m = mixed_model();
        let mut shuffled = m.clone();
        shuffled.blocks = perm.iter().map(|&i| m.blocks[i].clone()).collect();
        let t = test_case(40, vec![("u", Signal::Ramp { slope })]);
        prop_assert_eq!(simulate(&m, &t).unwrap(), simulate(&shuffled, &t).unwrap());
    }
}

#[test]
fn runs_are_bitwise_repeatable_across_threads() {
    let m = mixed_model();
    let t = test_case(200, vec![("u", Signal::Ramp { slope: 0.3 })]);
    let reference = simulate(&m, &t).unwrap();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let (m, t) = (m.clone(), t.clone());
            std::thread::spawn(move || simulate(&m, &t).unwrap())
        })
        .collect();
    for h in handles {
        let got = h.join().unwrap();
        for (a, b) in got.signals.values().flatten().zip(reference.signals.values().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

/// Independent recurrence for the two-tank fixture under constant inflow:
/// returns (level, high alarm) per step for thresholds `sh`.
fn tank_oracle(inflow: f64, sh: f64, steps: usize) -> Vec<(f64, bool)> {
    let mut level = 5.0f64;
    let mut out = Vec::new();
    for _ in 0..steps {
        let high = level >= sh;
        out.push((level, high));
        let drain = if high { 1.5 } else { 0.0 };
        level += 0.1 * (inflow - drain);
    }
    out
}

#[test]
fn two_tank_mutants_diverge_where_thresholds_cross() {
    let base = fixtures::model("two_tank.xml").unwrap();
    let t = test_case(80, vec![("inflow", Signal::Constant { value: 1.0 })]);
    let orig = simulate(&base, &t).unwrap();

    let oracle = tank_oracle(1.0, 8.0, 80);
    let levels: Vec<f64> = oracle.iter().map(|s| s.0).collect();
    assert_eq!(orig.get("level_out").unwrap(), levels.as_slice());
    let cross = oracle.iter().position(|s| s.1).expect("level reaches SH");

    // Raising SH from 8 to 9 leaves everything unchanged until the original
    // alarm first fires.
    let raised = base
        .apply_delta("sh_const", &SiteTarget::property("Value"), PropertyValue::Number(9.0))
        .unwrap();
    let high_orig = orig.get("high_out").unwrap();
    let high_mut = simulate(&raised, &t).unwrap().get("high_out").unwrap().to_vec();
    let first_diff = (0..80).find(|&i| high_orig[i] != high_mut[i]).unwrap();
    assert_eq!(first_diff, cross);

    // Swapping the high alarm's tag to SL_Input compares the level against 2
    // instead of 8; since the level starts at 5, the alarm differs at once.
    let swapped = base
        .apply_delta("sh_from", &SiteTarget::property("GotoTag"), PropertyValue::text("SL_Input"))
        .unwrap();
    let sw = simulate(&swapped, &t).unwrap();
    let oracle_sw = tank_oracle(1.0, 2.0, 80);
    assert_eq!(sw.get("level_out").unwrap(), oracle_sw.iter().map(|s| s.0).collect::<Vec<_>>().as_slice());
    assert_eq!(sw.get("high_out").unwrap()[0], 1.0);
    assert_eq!(high_orig[0], 0.0);
}
