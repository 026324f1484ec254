//! Line-oriented native graph text:
//!
//! ```text
//! node <id> <type>
//! edge <id> <type> <src> <trg>
//! attr <id> <name> <literal>
//! ```
//!
//! Nodes come first, then edges, each followed by all of its attribute
//! lines in slot order. Reading then writing reproduces the input byte for
//! byte when the input was produced by [`write_native`].

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use core::fmt::Write;

use crate::error::GraphError;
use crate::graph::{ElementId, Graph};
use crate::types::{ElementKind, TypeGraph};
use crate::value::parse_literal;

pub fn write_native(g: &Graph) -> String {
    let mut out = String::new();
    let tg = g.model();
    let attrs = |out: &mut String, id: ElementId| {
        let ty = g.type_of(id).expect("live element");
        let vals = g.attributes(id).expect("live element");
        for (slot, v) in tg.attribute_slots(ty).iter().zip(vals) {
            let _ = writeln!(out, "attr {id} {} {v}", slot.name);
        }
    };
    for n in g.nodes() {
        let _ = writeln!(out, "node {n} {}", g.type_name(n).unwrap_or("?"));
        attrs(&mut out, n);
    }
    for e in g.edges() {
        let (s, t) = g.endpoints(e).expect("live edge");
        let _ = writeln!(out, "edge {e} {} {s} {t}", g.type_name(e).unwrap_or("?"));
        attrs(&mut out, e);
    }
    out
}

pub fn read_native(text: &str, model: Arc<TypeGraph>) -> Result<Graph, GraphError> {
    let mut g = Graph::new(model);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fail = |message: String| GraphError::Format { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (word, rest) = split_word(trimmed);
        match word {
            "node" => {
                let (id, rest) = split_word(rest);
                let (ty, rest) = split_word(rest);
                if !rest.is_empty() {
                    return Err(fail("trailing input after node declaration".into()));
                }
                let id = parse_id(id).map_err(&fail)?;
                let ty = g.model().resolve_kind(ty, ElementKind::Node)?;
                g.restore_node(id, ty).map_err(|e| relocate(e, line))?;
            }
            "edge" => {
                let (id, rest) = split_word(rest);
                let (ty, rest) = split_word(rest);
                let (src, rest) = split_word(rest);
                let (trg, rest) = split_word(rest);
                if !rest.is_empty() {
                    return Err(fail("trailing input after edge declaration".into()));
                }
                let id = parse_id(id).map_err(&fail)?;
                let src = parse_id(src).map_err(&fail)?;
                let trg = parse_id(trg).map_err(&fail)?;
                let ty = g.model().resolve_kind(ty, ElementKind::Edge)?;
                g.restore_edge(id, ty, src, trg).map_err(|e| relocate(e, line))?;
            }
            "attr" => {
                let (id, rest) = split_word(rest);
                let (name, literal) = split_word(rest);
                let id = parse_id(id).map_err(&fail)?;
                let ty = g.type_of(id).ok_or_else(|| fail(format!("unknown element {id}")))?;
                let kind = g
                    .model()
                    .attribute_kind(ty, name)
                    .cloned()
                    .ok_or_else(|| fail(format!("no attribute `{name}` on element {id}")))?;
                let value = parse_literal(literal, &kind, g.model()).map_err(&fail)?;
                g.set_attr(id, name, value).map_err(|e| relocate(e, line))?;
            }
            other => return Err(fail(format!("unknown record `{other}`"))),
        }
    }
    Ok(g)
}

fn relocate(e: GraphError, line: usize) -> GraphError {
    match e {
        GraphError::Format { message, .. } => GraphError::Format { line, message },
        other => other,
    }
}

fn split_word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], s[i..].trim_start()),
        None => (s, ""),
    }
}

fn parse_id(s: &str) -> Result<ElementId, String> {
    s.parse::<u64>()
        .ok()
        .filter(|&v| v > 0)
        .map(ElementId)
        .ok_or_else(|| format!("bad element id `{s}`"))
}
