//! Feedthrough dependency graph shared by validation and simulation.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::{BlockType, ModelIR};

/// How a From block's tag resolves against the model's Goto blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GotoResolution {
    Resolved(usize),
    Missing,
    Multiple,
}

#[derive(Debug, Clone)]
pub struct DataflowGraph {
    /// Per block, per input port: the driving block index.
    pub inputs: Vec<Vec<Option<usize>>>,
    /// Per block: Goto resolution for From blocks, `None` otherwise.
    pub goto: Vec<Option<GotoResolution>>,
    /// Per block: blocks whose current-step output it needs.
    deps: Vec<Vec<usize>>,
    /// Ordering key so topological order does not depend on declaration order.
    ids: Vec<String>,
}

impl DataflowGraph {
    /// Builds the graph; connections to unknown blocks or ports are ignored.
    pub fn build(model: &ModelIR) -> DataflowGraph {
        let n = model.blocks.len();
        let index: BTreeMap<&str, usize> =
            model.blocks.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();

        let mut inputs: Vec<Vec<Option<usize>>> = model
            .blocks
            .iter()
            .map(|b| vec![None; b.input_count().unwrap_or(0)])
            .collect();
        for c in &model.connections {
            let (Some(&src), Some(&dst)) =
                (index.get(c.src_block.as_str()), index.get(c.dst_block.as_str()))
            else {
                continue;
            };
            if let Some(slot) = inputs[dst].get_mut(c.dst_port) {
                slot.get_or_insert(src);
            }
        }

        let mut gotos: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, b) in model.blocks.iter().enumerate() {
            if b.block_type == BlockType::Goto {
                if let Some(tag) = b.string("GotoTag") {
                    gotos.entry(tag).or_default().push(i);
                }
            }
        }
        let goto: Vec<Option<GotoResolution>> = model
            .blocks
            .iter()
            .map(|b| {
                (b.block_type == BlockType::From).then(|| {
                    match b.string("GotoTag").and_then(|t| gotos.get(t)).map(Vec::as_slice) {
                        Some([one]) => GotoResolution::Resolved(*one),
                        Some([]) | None => GotoResolution::Missing,
                        Some(_) => GotoResolution::Multiple,
                    }
                })
            })
            .collect();

        let mut deps = vec![Vec::new(); n];
        for (i, b) in model.blocks.iter().enumerate() {
            if b.block_type.is_delay() {
                continue;
            }
            deps[i].extend(inputs[i].iter().flatten().copied());
            if b.block_type == BlockType::From {
                // A From reads whatever feeds every Goto carrying its tag.
                if let Some(tag) = b.string("GotoTag") {
                    deps[i].extend(gotos.get(tag).into_iter().flatten().copied());
                }
            }
        }

        DataflowGraph {
            inputs,
            goto,
            deps,
            ids: model.blocks.iter().map(|b| b.id.clone()).collect(),
        }
    }

    /// Evaluation order, or the blocks involved in an algebraic loop.
    ///
    /// Among ready blocks the smallest id goes first, so the order is a
    /// function of model content only.
    pub fn topo_order(&self) -> Result<Vec<usize>, Vec<usize>> {
        let n = self.deps.len();
        let mut indegree = vec![0usize; n];
        let mut users = vec![Vec::new(); n];
        for (i, ds) in self.deps.iter().enumerate() {
            indegree[i] = ds.len();
            for &d in ds {
                users[d].push(i);
            }
        }
        let mut ready: BinaryHeap<Reverse<(&str, usize)>> = (0..n)
            .filter(|&i| indegree[i] == 0)
            .map(|i| Reverse((self.ids[i].as_str(), i)))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, i))) = ready.pop() {
            order.push(i);
            for &u in &users[i] {
                indegree[u] -= 1;
                if indegree[u] == 0 {
                    ready.push(Reverse((self.ids[u].as_str(), u)));
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }

        // Peel off blocks that only feed into the leftover set's sinks; what
        // remains lies on or between cycles.
        let mut alive: Vec<bool> = indegree.iter().map(|&d| d > 0).collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                if alive[i] && !users[i].iter().any(|&u| alive[u]) {
                    alive[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut members: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        members.sort_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        Err(members)
    }
}
