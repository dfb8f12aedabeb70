//! JSON IR reader. Accepts both the full IR file and the render view
//! (which simply lacks `connections`).

use serde_json::{Map, Value};

use super::{IngestError, Parsed};
use crate::ir::{Block, BlockType, Connection, Diagnostic, Location, ModelIR, PropertyValue, Severity};

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value, IngestError> {
    obj.get(key).ok_or_else(|| IngestError::Schema(format!("{ctx}: missing key `{key}`")))
}

fn string(obj: &Map<String, Value>, key: &str, ctx: &str) -> Result<String, IngestError> {
    field(obj, key, ctx)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| IngestError::Schema(format!("{ctx}: `{key}` must be a string")))
}

fn port(obj: &Map<String, Value>, key: &str, ctx: &str) -> Result<usize, IngestError> {
    field(obj, key, ctx)?
        .as_u64()
        .map(|p| p as usize)
        .ok_or_else(|| IngestError::Schema(format!("{ctx}: `{key}` must be a non-negative integer")))
}

fn value(block_type: BlockType, key: &str, v: &Value, ctx: &str) -> Result<PropertyValue, IngestError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(PropertyValue::Number)
            .ok_or_else(|| IngestError::Schema(format!("{ctx}: `{key}` is not representable"))),
        Value::String(s) if block_type.kind_of(key).is_symbolic() => Ok(PropertyValue::Enum(s.clone())),
        Value::String(s) => Ok(PropertyValue::Text(s.clone())),
        _ => Err(IngestError::Schema(format!(
            "{ctx}: property `{key}` must be a number or a string"
        ))),
    }
}

pub(super) fn parse(source: &str) -> Result<Parsed, IngestError> {
    let root: Value = serde_json::from_str(source).map_err(|e| IngestError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let obj = root
        .as_object()
        .ok_or_else(|| IngestError::Schema("top level must be an object".into()))?;

    let name = string(obj, "name", "model")?;
    let sample_time = field(obj, "sample_time", "model")?
        .as_f64()
        .ok_or_else(|| IngestError::Schema("model: `sample_time` must be a number".into()))?;
    let mut model = ModelIR::new(name, sample_time);
    let mut diagnostics = Vec::new();

    let blocks = field(obj, "blocks", "model")?
        .as_array()
        .ok_or_else(|| IngestError::Schema("model: `blocks` must be an array".into()))?;
    for (i, b) in blocks.iter().enumerate() {
        let ctx = format!("blocks[{i}]");
        let b = b
            .as_object()
            .ok_or_else(|| IngestError::Schema(format!("{ctx}: must be an object")))?;
        let id = string(b, "id", &ctx)?;
        let name = string(b, "name", &ctx)?;
        let type_name = string(b, "type", &ctx)?;
        let block_type = type_name.parse::<BlockType>().unwrap_or_else(|_| {
            diagnostics.push(Diagnostic {
                severity: Severity::Warning,
                location: Location::Block(id.clone()),
                message: format!("unknown block type `{type_name}` treated as StateflowStub"),
            });
            BlockType::StateflowStub
        });
        let mut block = Block::new(id, name, block_type);
        if let Some(props) = b.get("properties") {
            let props = props
                .as_object()
                .ok_or_else(|| IngestError::Schema(format!("{ctx}: `properties` must be an object")))?;
            for (key, v) in props {
                block.properties.insert(key.clone(), value(block_type, key, v, &ctx)?);
            }
        }
        model.add(block);
    }

    if let Some(conns) = obj.get("connections") {
        let conns = conns
            .as_array()
            .ok_or_else(|| IngestError::Schema("model: `connections` must be an array".into()))?;
        for (i, c) in conns.iter().enumerate() {
            let ctx = format!("connections[{i}]");
            let c = c
                .as_object()
                .ok_or_else(|| IngestError::Schema(format!("{ctx}: must be an object")))?;
            model.connections.push(Connection {
                src_block: string(c, "src", &ctx)?,
                src_port: port(c, "src_port", &ctx)?,
                dst_block: string(c, "dst", &ctx)?,
                dst_port: port(c, "dst_port", &ctx)?,
            });
        }
    }

    Ok(Parsed { model, diagnostics })
}
