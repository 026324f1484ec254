//! JSON encoding of debug events, graph snapshots and client commands.

use graftool_core::{AttributeValue, Delta, ElementId, Graph};
use serde_json::{json, Map, Value};

use crate::style::StyleRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Step,
    Continue,
    Abort,
    /// Resend the current graph without resuming.
    Snapshot,
    /// Optional first line of a raw client; otherwise ignored.
    Hello,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Step => "step",
            Command::Continue => "continue",
            Command::Abort => "abort",
            Command::Snapshot => "snapshot",
            Command::Hello => "hello",
        }
    }

    /// Accepts `{"command":"step"}` or a bare verb.
    pub fn parse(line: &str) -> Option<Command> {
        let line = line.trim();
        let verb = if line.starts_with('{') {
            let v: Value = serde_json::from_str(line).ok()?;
            v.get("command")?.as_str()?.to_string()
        } else {
            line.to_string()
        };
        Some(match verb.as_str() {
            "step" => Command::Step,
            "continue" => Command::Continue,
            "abort" => Command::Abort,
            "snapshot" => Command::Snapshot,
            "hello" => Command::Hello,
            _ => return None,
        })
    }

    pub fn to_json(self) -> String {
        json!({ "command": self.as_str() }).to_string()
    }
}

pub fn attr_json(v: &AttributeValue) -> Value {
    match v {
        AttributeValue::Int(i) => json!(i),
        AttributeValue::Float(f) if f.is_finite() => json!(f),
        AttributeValue::Boolean(b) => json!(b),
        AttributeValue::String(s) => json!(s),
        other => json!(other.to_text()),
    }
}

fn attrs(g: &Graph, id: ElementId) -> Value {
    let mut m = Map::new();
    if let (Some(ty), Ok(values)) = (g.type_of(id), g.attributes(id)) {
        for (slot, v) in g.model().attribute_slots(ty).iter().zip(values) {
            m.insert(slot.name.clone(), attr_json(v));
        }
    }
    Value::Object(m)
}

fn style(styles: &StyleRegistry, g: &Graph, id: ElementId) -> Value {
    let r = styles.resolve(g, id);
    let mut m = Map::new();
    let mut put = |k: &str, v: &Option<String>| {
        if let Some(v) = v {
            m.insert(k.into(), json!(v));
        }
    };
    put("color", &r.color);
    put("textColor", &r.text_color);
    put("borderColor", &r.border_color);
    put("shape", &r.shape);
    put("lineStyle", &r.line_style);
    put("labels", &r.labels);
    if !r.info_tags.is_empty() {
        m.insert("infoTags".into(), json!(r.info_tags));
    }
    if r.excluded {
        m.insert("excluded".into(), json!(true));
    }
    Value::Object(m)
}

pub fn node_json(g: &Graph, styles: &StyleRegistry, n: ElementId) -> Value {
    json!({
        "id": n.0,
        "type": g.type_name(n),
        "attrs": attrs(g, n),
        "style": style(styles, g, n),
    })
}

pub fn edge_json(g: &Graph, styles: &StyleRegistry, e: ElementId) -> Value {
    let (s, t) = g.endpoints(e).expect("live edge");
    json!({
        "id": e.0,
        "type": g.type_name(e),
        "src": s.0,
        "trg": t.0,
        "attrs": attrs(g, e),
        "style": style(styles, g, e),
    })
}

fn element_json(g: &Graph, styles: &StyleRegistry, id: ElementId) -> Value {
    if g.endpoints(id).is_some() {
        edge_json(g, styles, id)
    } else {
        node_json(g, styles, id)
    }
}

pub fn snapshot_json(g: &Graph, styles: &StyleRegistry) -> Value {
    let containment: Vec<Value> = styles
        .containment(g)
        .into_iter()
        .map(|(child, parent)| json!({ "parent": parent.0, "child": child.0 }))
        .collect();
    json!({
        "nodes": g.nodes().map(|n| node_json(g, styles, n)).collect::<Vec<_>>(),
        "edges": g.edges().map(|e| edge_json(g, styles, e)).collect::<Vec<_>>(),
        "containment": containment,
        "layout": styles.layout,
        "layoutOptions": styles.layout_options,
    })
}

/// Delta of one rewrite with full descriptions of created and retyped
/// elements so a viewer can patch its copy.
pub fn delta_json(g: &Graph, styles: &StyleRegistry, d: &Delta) -> Value {
    let live = |ids: &[ElementId]| -> Vec<Value> {
        ids.iter().filter(|&&x| g.is_live(x)).map(|&x| element_json(g, styles, x)).collect()
    };
    json!({
        "created": live(&d.created),
        "deleted": d.deleted.iter().map(|x| x.0).collect::<Vec<_>>(),
        "retyped": live(&d.retyped),
    })
}
