//! JSON interchange format for stranded graphs, and DOT rendering.
//!
//! Slots are addressed as `"<vertex>.<pair>.<kind>"` with 1-based pairs and
//! kind `t` or `tbar`: `{"schema":1,"vertices":[{"id":0,"color":1}],
//! "propagators":[["0.2.tbar","0.2.t"]],"externals":["0.1.t","0.1.tbar"]}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Color, GraphError, SlotId, SlotKind, TensorGraph};

/// Interchange schema version emitted and accepted by this crate.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed slot address {0:?} (want \"v.pair.t|tbar\")")]
    BadSlot(String),
    #[error("unsupported schema version {0}")]
    BadVersion(u32),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    id: usize,
    color: u8,
}

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    #[serde(default = "default_version")]
    schema: u32,
    vertices: Vec<VertexRecord>,
    propagators: Vec<[String; 2]>,
    externals: Vec<String>,
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

fn slot_string(s: SlotId) -> String {
    format!(
        "{}.{}.{}",
        s.vertex(),
        s.pair() + 1,
        match s.kind() {
            SlotKind::T => "t",
            SlotKind::TBar => "tbar",
        }
    )
}

fn parse_slot(s: &str) -> Result<SlotId, SchemaError> {
    let parts: Vec<&str> = s.split('.').collect();
    let bad = || SchemaError::BadSlot(s.to_string());
    if parts.len() != 3 {
        return Err(bad());
    }
    let vertex: usize = parts[0].parse().map_err(|_| bad())?;
    let pair: u8 = parts[1].parse().map_err(|_| bad())?;
    if !(1..=2).contains(&pair) {
        return Err(bad());
    }
    let kind = match parts[2] {
        "t" => SlotKind::T,
        "tbar" => SlotKind::TBar,
        _ => return Err(bad()),
    };
    Ok(SlotId::new(vertex, pair - 1, kind))
}

/// Serialize a graph to the interchange JSON.
pub fn to_json(g: &TensorGraph) -> String {
    let record = GraphRecord {
        schema: SCHEMA_VERSION,
        vertices: g
            .vertex_colors()
            .iter()
            .enumerate()
            .map(|(id, c)| VertexRecord {
                id,
                color: c.index(),
            })
            .collect(),
        propagators: g
            .propagators()
            .iter()
            .map(|p| [slot_string(p.tbar), slot_string(p.t)])
            .collect(),
        externals: g.externals().iter().map(|&e| slot_string(e)).collect(),
    };
    serde_json::to_string_pretty(&record).expect("graph records serialize")
}

/// Parse a graph from the interchange JSON.
pub fn from_json(text: &str) -> Result<TensorGraph, SchemaError> {
    let record: GraphRecord = serde_json::from_str(text)?;
    if record.schema != SCHEMA_VERSION {
        return Err(SchemaError::BadVersion(record.schema));
    }
    let mut colors = vec![None; record.vertices.len()];
    for v in &record.vertices {
        if v.id >= colors.len() {
            return Err(SchemaError::BadSlot(format!("vertex id {}", v.id)));
        }
        colors[v.id] = Some(Color::new(v.color)?);
    }
    let colors: Vec<Color> = colors
        .into_iter()
        .map(|c| c.ok_or(SchemaError::BadSlot("missing vertex id".into())))
        .collect::<Result<_, _>>()?;
    let mut props = Vec::with_capacity(record.propagators.len());
    for [a, b] in &record.propagators {
        props.push((parse_slot(a)?, parse_slot(b)?));
    }
    let externals = record
        .externals
        .iter()
        .map(|e| parse_slot(e))
        .collect::<Result<_, _>>()?;
    Ok(TensorGraph::build(colors, props, externals)?)
}

/// DOT rendering: vertices as boxes, each propagator drawn as five parallel
/// strand edges, external legs as points.
pub fn to_dot(g: &TensorGraph) -> String {
    const PALETTE: [&str; 5] = ["red", "blue", "forestgreen", "orange", "purple"];
    let mut out = String::from("graph strands {\n  node [shape=box];\n");
    for (v, c) in g.vertex_colors().iter().enumerate() {
        out.push_str(&format!("  v{v} [label=\"V{}({})\"];\n", v, c.index()));
    }
    for (i, p) in g.propagators().iter().enumerate() {
        for color in Color::all() {
            out.push_str(&format!(
                "  v{} -- v{} [color={} tooltip=\"p{} strand {}\"];\n",
                p.tbar.vertex(),
                p.t.vertex(),
                PALETTE[color.idx()],
                i,
                color.index()
            ));
        }
    }
    for (i, e) in g.externals().iter().enumerate() {
        out.push_str(&format!("  x{i} [shape=point];\n"));
        out.push_str(&format!("  v{} -- x{i} [style=dashed];\n", e.vertex()));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon;
    use crate::sample;

    #[test]
    fn round_trip_witnesses() {
        for g in sample::witnesses() {
            let text = to_json(&g);
            let back = from_json(&text).unwrap();
            assert_eq!(
                canon::canonical_form(&g),
                canon::canonical_form(&back),
                "round trip changed the class"
            );
            // byte-identical re-serialization
            assert_eq!(text, to_json(&back));
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(from_json("{}").is_err());
        let bad = r#"{"schema":1,"vertices":[{"id":0,"color":9}],"propagators":[],"externals":[]}"#;
        assert!(from_json(bad).is_err());
        let bad2 = r#"{"schema":7,"vertices":[],"propagators":[],"externals":[]}"#;
        assert!(from_json(bad2).is_err());
    }

    #[test]
    fn dot_contains_strands() {
        let g = sample::melon_2pt(Color::new(1).unwrap());
        let dot = to_dot(&g);
        assert_eq!(dot.matches("v0 -- v0").count(), 5);
    }
}
