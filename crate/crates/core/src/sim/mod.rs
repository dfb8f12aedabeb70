//! Fixed-step discrete-time interpreter.
//!
//! Every step evaluates all blocks once in topological order of the
//! delay-broken dataflow graph, then advances the state of delay-class
//! blocks. Signals are scalar doubles. A non-finite value anywhere aborts
//! the run.

mod signal;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ir::{BlockType, DataflowGraph, GotoResolution, ModelIR};

pub use signal::{Signal, SignalTrace, TestCase};

/// Steps of the post-mutation smoke run.
pub const SMOKE_STEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    NonFinite,
    UnresolvedFrom,
    MultipleGotoForTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{kind:?} at step {step} in block `{block}`")]
pub struct RuntimeFault {
    pub step: usize,
    pub block: String,
    pub kind: FaultKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Fault(#[from] RuntimeFault),
    #[error("test `{test}` has no stimulus for inport `{inport}`")]
    MissingInput { test: String, inport: String },
    #[error("model has an algebraic loop")]
    AlgebraicLoop,
    #[error("unknown probe block `{0}`")]
    UnknownProbe(String),
}

/// Outcome of a run that may have stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub trace: SignalTrace,
    pub fault: Option<RuntimeFault>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum DataType {
    Double,
    Single,
    Int32 { saturate: bool },
}

#[derive(Debug, Clone)]
enum Op {
    Inport,
    Outport,
    Constant(f64),
    Gain(f64),
    Sum(Vec<f64>),
    Product(Vec<bool>),
    Relational(String),
    Logical(String),
    Switch(f64),
    UnitDelay { initial: f64, period: usize },
    Integrator { initial: f64, period: usize, step: f64 },
    Saturation { lower: f64, upper: f64 },
    Goto,
    From(usize),
    Inert,
}

fn period_of(model: &ModelIR, sample_time: Option<f64>) -> (usize, f64) {
    match sample_time {
        Some(st) if st > 0.0 => (((st / model.sample_time).round() as usize).max(1), st),
        _ => (1, model.sample_time),
    }
}

fn compile_op(model: &ModelIR, i: usize, goto: Option<GotoResolution>) -> Result<Op, FaultKind> {
    let b = &model.blocks[i];
    let num = |k: &str| b.number(k).unwrap_or(0.0);
    Ok(match b.block_type {
        BlockType::Inport => Op::Inport,
        BlockType::Outport => Op::Outport,
        BlockType::Constant => Op::Constant(num("Value")),
        BlockType::Gain => Op::Gain(num("Gain")),
        BlockType::Sum => Op::Sum(
            b.string("Signs")
                .unwrap_or("+")
                .chars()
                .map(|c| if c == '-' { -1.0 } else { 1.0 })
                .collect(),
        ),
        BlockType::Product => Op::Product(b.string("Inputs").unwrap_or("*").chars().map(|c| c == '/').collect()),
        BlockType::RelationalOperator => Op::Relational(b.string("Operator").unwrap_or("==").to_string()),
        BlockType::LogicalOperator => Op::Logical(b.string("Operator").unwrap_or("AND").to_string()),
        BlockType::Switch => Op::Switch(num("Threshold")),
        BlockType::UnitDelay => {
            let (period, _) = period_of(model, b.number("SampleTime"));
            Op::UnitDelay { initial: num("InitialCondition"), period }
        }
        BlockType::DiscreteIntegrator => {
            let (period, step) = period_of(model, b.number("SampleTime"));
            Op::Integrator { initial: num("InitialCondition"), period, step }
        }
        BlockType::Saturation => Op::Saturation { lower: num("LowerLimit"), upper: num("UpperLimit") },
        BlockType::Goto => Op::Goto,
        BlockType::From => match goto {
            Some(GotoResolution::Resolved(g)) => Op::From(g),
            Some(GotoResolution::Multiple) => return Err(FaultKind::MultipleGotoForTag),
            _ => return Err(FaultKind::UnresolvedFrom),
        },
        BlockType::StateflowStub => Op::Inert,
    })
}

fn data_type(model: &ModelIR, i: usize) -> DataType {
    let b = &model.blocks[i];
    match b.string("OutDataTypeStr") {
        Some("single") => DataType::Single,
        Some("int32") => DataType::Int32 { saturate: b.string("SaturateOnIntegerOverflow") == Some("on") },
        _ => DataType::Double,
    }
}

fn convert(x: f64, dt: DataType) -> f64 {
    match dt {
        DataType::Double => x,
        DataType::Single => x as f32 as f64,
        DataType::Int32 { saturate: true } => x.trunc().clamp(i32::MIN as f64, i32::MAX as f64),
        DataType::Int32 { saturate: false } => {
            let m = x.trunc().rem_euclid(4_294_967_296.0);
            if m >= 2_147_483_648.0 {
                m - 4_294_967_296.0
            } else {
                m
            }
        }
    }
}

fn relational(op: &str, a: f64, b: f64) -> bool {
    match op {
        "==" => a == b,
        "~=" => a != b,
        "<" => a < b,
        "<=" => a <= b,
        ">" => a > b,
        ">=" => a >= b,
        _ => false,
    }
}

fn logical(op: &str, ins: &[f64]) -> bool {
    let t = |x: f64| x != 0.0;
    let a = ins.first().copied().is_some_and(t);
    let b = ins.get(1).copied().is_some_and(t);
    match op {
        "AND" => a && b,
        "OR" => a || b,
        "XOR" => a != b,
        "NAND" => !(a && b),
        "NOR" => !(a || b),
        "NOT" => !a,
        _ => false,
    }
}

fn bool_value(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Run `test` and record every Outport plus the requested probe blocks.
///
/// Runtime faults are returned inside [`Execution`] together with the
/// partial trace; only setup problems are errors.
pub fn execute(model: &ModelIR, test: &TestCase, probes: &[String]) -> Result<Execution, SimError> {
    let graph = DataflowGraph::build(model);
    let order = graph.topo_order().map_err(|_| SimError::AlgebraicLoop)?;
    let n = model.blocks.len();

    let mut stimulus: Vec<Option<&Signal>> = vec![None; n];
    for (i, b) in model.blocks.iter().enumerate() {
        if b.block_type == BlockType::Inport {
            let s = test.inputs.get(&b.id).ok_or_else(|| SimError::MissingInput {
                test: test.id.clone(),
                inport: b.id.clone(),
            })?;
            stimulus[i] = Some(s);
        }
    }

    let mut recorded: Vec<(String, usize)> = model
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| b.block_type == BlockType::Outport)
        .map(|(i, b)| (b.id.clone(), i))
        .collect();
    for p in probes {
        if recorded.iter().any(|(id, _)| id == p) {
            continue;
        }
        let i = model.block_index(p).ok_or_else(|| SimError::UnknownProbe(p.clone()))?;
        recorded.push((p.clone(), i));
    }
    let mut signals: BTreeMap<String, Vec<f64>> = recorded
        .iter()
        .map(|(id, _)| (id.clone(), Vec::with_capacity(test.duration_steps)))
        .collect();

    let mut ops = Vec::with_capacity(n);
    for i in 0..n {
        match compile_op(model, i, graph.goto[i]) {
            Ok(op) => ops.push(op),
            Err(kind) => {
                return Ok(Execution {
                    trace: SignalTrace { signals, aborted_at: Some(0) },
                    fault: Some(RuntimeFault { step: 0, block: model.blocks[i].id.clone(), kind }),
                })
            }
        }
    }
    let types: Vec<DataType> = (0..n).map(|i| data_type(model, i)).collect();

    let mut state: Vec<f64> = ops
        .iter()
        .map(|op| match op {
            Op::UnitDelay { initial, .. } | Op::Integrator { initial, .. } => *initial,
            _ => 0.0,
        })
        .collect();
    let mut value = vec![0.0f64; n];
    let mut ins: Vec<f64> = Vec::with_capacity(4);

    for step in 0..test.duration_steps {
        let fault = |i: usize| RuntimeFault { step, block: model.blocks[i].id.clone(), kind: FaultKind::NonFinite };
        for &i in &order {
            ins.clear();
            ins.extend(graph.inputs[i].iter().map(|src| src.map_or(0.0, |s| value[s])));
            let input = |k: usize| ins.get(k).copied().unwrap_or(0.0);
            let raw = match &ops[i] {
                Op::Inport => stimulus[i].map_or(0.0, |s| s.value_at(step)),
                Op::Outport | Op::Goto => input(0),
                Op::Constant(v) => *v,
                Op::Gain(k) => k * input(0),
                Op::Sum(signs) => signs.iter().zip(&ins).map(|(s, x)| s * x).sum(),
                Op::Product(divide) => divide
                    .iter()
                    .zip(&ins)
                    .fold(1.0, |acc, (d, x)| if *d { acc / x } else { acc * x }),
                Op::Relational(op) => bool_value(relational(op, input(0), input(1))),
                Op::Logical(op) => bool_value(logical(op, &ins)),
                Op::Switch(threshold) => {
                    if input(1) >= *threshold {
                        input(0)
                    } else {
                        input(2)
                    }
                }
                Op::UnitDelay { .. } | Op::Integrator { .. } => state[i],
                Op::Saturation { lower, upper } => input(0).max(*lower).min(*upper),
                Op::From(g) => value[*g],
                Op::Inert => 0.0,
            };
            let v = convert(raw, types[i]);
            if !v.is_finite() {
                return Ok(Execution {
                    trace: SignalTrace { signals, aborted_at: Some(step) },
                    fault: Some(fault(i)),
                });
            }
            value[i] = v;
        }

        for i in 0..n {
            let u = graph.inputs[i].first().copied().flatten().map_or(0.0, |s| value[s]);
            match ops[i] {
                Op::UnitDelay { period, .. } if step % period == 0 => state[i] = u,
                Op::Integrator { period, step: h, .. } if step % period == 0 => state[i] += h * u,
                _ => continue,
            }
            if !state[i].is_finite() {
                return Ok(Execution {
                    trace: SignalTrace { signals, aborted_at: Some(step) },
                    fault: Some(fault(i)),
                });
            }
        }

        for (id, i) in &recorded {
            signals.get_mut(id).expect("signal registered").push(value[*i]);
        }
    }

    Ok(Execution { trace: SignalTrace { signals, aborted_at: None }, fault: None })
}

/// Run to completion, treating any runtime fault as an error.
pub fn simulate(model: &ModelIR, test: &TestCase) -> Result<SignalTrace, SimError> {
    let exec = execute(model, test, &[])?;
    match exec.fault {
        Some(f) => Err(SimError::Fault(f)),
        None => Ok(exec.trace),
    }
}

/// Short run with every Inport held at 1.0; the dynamic half of the compile check.
pub fn smoke_run(model: &ModelIR) -> Result<(), SimError> {
    let test = TestCase {
        id: "smoke".into(),
        duration_steps: SMOKE_STEPS,
        inputs: model
            .ids_of(BlockType::Inport)
            .into_iter()
            .map(|id| (id.to_string(), Signal::Constant { value: 1.0 }))
            .collect(),
    };
    simulate(model, &test).map(|_| ())
}
