//! Reader for the MDL-style XML subset.
//!
//! ```xml
//! <Model Name="tank" SampleTime="0.1">
//!   <Block BlockType="Goto" Name="g1" SID="3">
//!     <P Name="GotoTag">SL_Input</P>
//!   </Block>
//!   <Line SrcBlock="c1" SrcPort="1" DstBlock="g1" DstPort="1"/>
//! </Model>
//! ```
//!
//! `System` wrappers are transparent. Ports are 1-based as in the vendor
//! format. A `Line` may fan out through `Branch` children that carry their
//! own `DstBlock`/`DstPort`. Attributes outside the subset and elements other
//! than the ones above are ignored.

use std::collections::BTreeMap;

use roxmltree::{Document, Node};

use super::{IngestError, Parsed};
use crate::ir::{
    parse_finite, Block, BlockType, Connection, Diagnostic, Location, ModelIR, PropertyValue, Severity,
    ValueKind,
};

/// Presentation-only parameters that never reach the IR.
const LAYOUT_KEYS: &[&str] = &[
    "Position",
    "ZOrder",
    "BackgroundColor",
    "ForegroundColor",
    "FontName",
    "FontSize",
    "Orientation",
    "NamePlacement",
    "ShowName",
    "DropShadow",
    "Ports",
    "SFBlockType",
];

struct Ctx<'a> {
    doc: &'a Document<'a>,
}

impl Ctx<'_> {
    fn line(&self, node: Node) -> usize {
        self.doc.text_pos_at(node.range().start).row as usize
    }

    fn err(&self, node: Node, message: impl Into<String>) -> IngestError {
        IngestError::Parse { line: self.line(node), message: message.into() }
    }

    fn port(&self, node: Node, attr: &str) -> Result<usize, IngestError> {
        let raw = node.attribute(attr).unwrap_or("1");
        match raw.trim().parse::<usize>() {
            Ok(p) if p >= 1 => Ok(p - 1),
            _ => Err(self.err(node, format!("`{attr}` must be a 1-based port number, got `{raw}`"))),
        }
    }
}

fn params(node: Node) -> Vec<(String, String)> {
    node.children()
        .filter(|c| c.has_tag_name("P"))
        .filter_map(|p| {
            let key = p.attribute("Name")?;
            Some((key.to_string(), p.text().unwrap_or("").trim().to_string()))
        })
        .collect()
}

fn typed(kind: ValueKind, raw: &str) -> PropertyValue {
    match kind {
        ValueKind::Number => match parse_finite(raw) {
            Some(x) => PropertyValue::Number(x),
            None => PropertyValue::Text(raw.to_string()),
        },
        ValueKind::Enum(_) | ValueKind::Pattern(_) => PropertyValue::Enum(raw.to_string()),
        ValueKind::Text | ValueKind::Tag => PropertyValue::Text(raw.to_string()),
    }
}

fn collect<'a, 'i>(node: Node<'a, 'i>, blocks: &mut Vec<Node<'a, 'i>>, lines: &mut Vec<Node<'a, 'i>>) {
    for child in node.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "Block" => blocks.push(child),
            "Line" => lines.push(child),
            "System" => collect(child, blocks, lines),
            _ => {}
        }
    }
}

pub(super) fn parse(source: &str) -> Result<Parsed, IngestError> {
    let doc = Document::parse(source).map_err(|e| IngestError::Parse {
        line: e.pos().row as usize,
        message: e.to_string(),
    })?;
    let ctx = Ctx { doc: &doc };
    let root = doc.root_element();
    if !root.has_tag_name("Model") {
        return Err(ctx.err(root, format!("expected <Model>, found <{}>", root.tag_name().name())));
    }
    let sample_time = match root.attribute("SampleTime") {
        Some(raw) => parse_finite(raw).ok_or_else(|| ctx.err(root, format!("bad SampleTime `{raw}`")))?,
        None => 1.0,
    };
    let mut model = ModelIR::new(root.attribute("Name").unwrap_or("model"), sample_time);
    let mut diagnostics = Vec::new();

    let mut block_nodes = Vec::new();
    let mut line_nodes = Vec::new();
    collect(root, &mut block_nodes, &mut line_nodes);

    let mut id_by_name: BTreeMap<String, String> = BTreeMap::new();
    for node in block_nodes {
        let name = node
            .attribute("Name")
            .ok_or_else(|| ctx.err(node, "<Block> without a Name attribute"))?;
        let type_name = node
            .attribute("BlockType")
            .ok_or_else(|| ctx.err(node, format!("block `{name}` has no BlockType")))?;
        let id = node.attribute("SID").unwrap_or(name).to_string();
        let ps = params(node);
        let is_chart = ps.iter().any(|(k, v)| k == "SFBlockType" && v == "Chart");
        let block_type = match type_name.parse::<BlockType>() {
            Ok(t) => t,
            Err(_) => {
                if !is_chart {
                    diagnostics.push(Diagnostic {
                        severity: Severity::Warning,
                        location: Location::Block(id.clone()),
                        message: format!("unknown block type `{type_name}` treated as StateflowStub"),
                    });
                }
                BlockType::StateflowStub
            }
        };
        let mut block = Block::new(id.clone(), name, block_type);
        for (key, raw) in ps {
            if LAYOUT_KEYS.contains(&key.as_str()) {
                continue;
            }
            if block_type == BlockType::StateflowStub {
                block.properties.insert(key, PropertyValue::Text(raw));
            } else if let Some(spec) = block_type.property(&key) {
                block.properties.insert(key, typed(spec.kind, &raw));
            }
        }
        id_by_name.insert(name.to_string(), id);
        model.add(block);
    }

    let resolve = |node: Node, attr: &str| -> Result<String, IngestError> {
        let name = node
            .attribute(attr)
            .ok_or_else(|| ctx.err(node, format!("<{}> without {attr}", node.tag_name().name())))?;
        id_by_name
            .get(name)
            .cloned()
            .ok_or_else(|| ctx.err(node, format!("{attr} `{name}` names no block")))
    };

    for line in line_nodes {
        let src = resolve(line, "SrcBlock")?;
        let src_port = ctx.port(line, "SrcPort")?;
        let mut sinks = Vec::new();
        if line.attribute("DstBlock").is_some() {
            sinks.push(line);
        }
        sinks.extend(line.descendants().filter(|n| n.has_tag_name("Branch") && n.attribute("DstBlock").is_some()));
        if sinks.is_empty() {
            return Err(ctx.err(line, "<Line> has no destination"));
        }
        for sink in sinks {
            model.connections.push(Connection {
                src_block: src.clone(),
                src_port,
                dst_block: resolve(sink, "DstBlock")?,
                dst_port: ctx.port(sink, "DstPort")?,
            });
        }
    }

    Ok(Parsed { model, diagnostics })
}
