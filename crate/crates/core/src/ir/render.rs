//! Deterministic JSON rendering.
//!
//! Two views exist: [`render_text`] is the blocks-and-properties view fed to
//! predictors (no connections), [`render_ir_file`] is the full IR file.
//! Both use two-space indentation, blocks sorted by id, property keys in
//! declared order, and each block's property object on a single line.

use std::fmt::Write;

use super::{Block, ModelIR, SiteTarget};

/// Byte span of one maskable value literal inside rendered text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSpan {
    pub block_id: String,
    pub target: SiteTarget,
    pub start: usize,
    pub end: usize,
}

/// Shortest round-trip decimal; `-0` prints as `0`, non-finite as `null`.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        "null".to_string()
    } else if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization is infallible")
}

fn sorted_blocks(model: &ModelIR) -> Vec<&Block> {
    let mut blocks: Vec<&Block> = model.blocks.iter().collect();
    blocks.sort_by(|a, b| a.id.cmp(&b.id));
    blocks
}

struct Renderer {
    out: String,
    spans: Vec<ValueSpan>,
}

impl Renderer {
    fn push(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn value(&mut self, block: &Block, target: SiteTarget, literal: &str) {
        let start = self.out.len();
        self.out.push_str(literal);
        self.spans.push(ValueSpan {
            block_id: block.id.clone(),
            target,
            start,
            end: self.out.len(),
        });
    }

    fn block(&mut self, block: &Block, last: bool) {
        self.push("    {\n");
        let _ = writeln!(self.out, "      \"id\": {},", quote(&block.id));
        self.push("      \"name\": ");
        self.value(block, SiteTarget::Name, &quote(&block.name));
        self.push(",\n");
        let _ = writeln!(self.out, "      \"type\": {},", quote(block.block_type.as_str()));
        self.push("      \"properties\": {");
        for (i, key) in block.ordered_keys().into_iter().enumerate() {
            if i > 0 {
                self.push(", ");
            }
            self.push(&quote(key));
            self.push(": ");
            let literal = block.properties[key].canonical();
            self.value(block, SiteTarget::property(key), &literal);
        }
        self.push("}\n");
        self.push(if last { "    }\n" } else { "    },\n" });
    }

    fn model(model: &ModelIR, with_connections: bool) -> Renderer {
        let mut r = Renderer { out: String::new(), spans: Vec::new() };
        r.push("{\n");
        let _ = writeln!(r.out, "  \"name\": {},", quote(&model.name));
        let _ = writeln!(r.out, "  \"sample_time\": {},", format_number(model.sample_time));
        let blocks = sorted_blocks(model);
        let tail = if with_connections { "," } else { "" };
        if blocks.is_empty() {
            let _ = writeln!(r.out, "  \"blocks\": []{tail}");
        } else {
            r.push("  \"blocks\": [\n");
            let n = blocks.len();
            for (i, b) in blocks.into_iter().enumerate() {
                r.block(b, i + 1 == n);
            }
            let _ = writeln!(r.out, "  ]{tail}");
        }
        if with_connections {
            if model.connections.is_empty() {
                r.push("  \"connections\": []\n");
            } else {
                r.push("  \"connections\": [\n");
                let n = model.connections.len();
                for (i, c) in model.connections.iter().enumerate() {
                    let _ = write!(
                        r.out,
                        "    {{\"src\": {}, \"src_port\": {}, \"dst\": {}, \"dst_port\": {}}}",
                        quote(&c.src_block),
                        c.src_port,
                        quote(&c.dst_block),
                        c.dst_port
                    );
                    r.push(if i + 1 == n { "\n" } else { ",\n" });
                }
                r.push("  ]\n");
            }
        }
        r.push("}\n");
        r
    }
}

/// Blocks-and-properties view of a model.
pub fn render_text(model: &ModelIR) -> String {
    Renderer::model(model, false).out
}

/// [`render_text`] plus the spans of every name and property value literal,
/// in rendering order.
pub fn render_with_spans(model: &ModelIR) -> (String, Vec<ValueSpan>) {
    let r = Renderer::model(model, false);
    (r.out, r.spans)
}

/// Full IR file including the connection list.
pub fn render_ir_file(model: &ModelIR) -> String {
    Renderer::model(model, true).out
}
