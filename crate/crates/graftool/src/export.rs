//! Graph exporters. Output is deterministic: elements in ascending id,
//! attributes in slot order.

use std::fmt::Write;
use std::path::Path;

use graftool_core::{write_native, AttributeValue, ElementId, Graph};

use crate::style::StyleRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Dot,
    Gxl,
    Native,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "dot" => Some(Format::Dot),
            "gxl" => Some(Format::Gxl),
            "native" | "grn" => Some(Format::Native),
            _ => None,
        }
    }
}

pub fn export(g: &Graph, styles: &StyleRegistry, format: Format) -> String {
    match format {
        Format::Dot => to_dot(g, styles),
        Format::Gxl => to_gxl(g),
        Format::Native => write_native(g),
    }
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn attr_text(g: &Graph, id: ElementId, name: &str) -> Option<String> {
    g.get_attr(id, name).ok().map(AttributeValue::to_text)
}

fn label(g: &Graph, styles: &StyleRegistry, id: ElementId) -> (String, Vec<String>) {
    let st = styles.resolve(g, id);
    let mut text = match st.labels.as_deref() {
        Some("off") => String::new(),
        Some("on") | None => format!("{}#{}", g.type_name(id).unwrap_or("?"), id),
        Some(fixed) => fixed.to_string(),
    };
    for tag in &st.info_tags {
        if let Some(v) = attr_text(g, id, tag) {
            let _ = write!(text, "\n{tag}={v}");
        }
    }
    let mut extra = Vec::new();
    let mut push = |k: &str, v: &Option<String>| {
        if let Some(v) = v {
            extra.push(format!("{k}={}", dot_quote(v)));
        }
    };
    push("color", &st.color);
    push("fontcolor", &st.text_color);
    push("shape", &st.shape);
    push("style", &st.line_style);
    if let Some(b) = &st.border_color {
        extra.push(format!("pencolor={}", dot_quote(b)));
    }
    (text, extra)
}

pub fn to_dot(g: &Graph, styles: &StyleRegistry) -> String {
    let mut out = String::from("digraph G {\n");
    if let Some(layout) = &styles.layout {
        let _ = writeln!(out, "  layout_hint={};", dot_quote(layout));
    }
    let hidden = |id| styles.resolve(g, id).excluded;
    for n in g.nodes().filter(|&n| !hidden(n)) {
        let (text, extra) = label(g, styles, n);
        let mut attrs = vec![format!("label={}", dot_quote(&text))];
        attrs.extend(extra);
        let _ = writeln!(out, "  n{n} [{}];", attrs.join(", "));
    }
    for e in g.edges().filter(|&e| !hidden(e)) {
        let (s, t) = g.endpoints(e).expect("live edge");
        if hidden(s) || hidden(t) {
            continue;
        }
        let (text, extra) = label(g, styles, e);
        let mut attrs = vec![format!("label={}", dot_quote(&text))];
        attrs.extend(extra);
        let _ = writeln!(out, "  n{s} -> n{t} [{}];", attrs.join(", "));
    }
    out.push_str("}\n");
    out
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn gxl_value(v: &AttributeValue, out: &mut String) {
    match v {
        AttributeValue::Int(i) => {
            let _ = write!(out, "<int>{i}</int>");
        }
        AttributeValue::Float(f) => {
            let _ = write!(out, "<float>{f:?}</float>");
        }
        AttributeValue::Boolean(b) => {
            let _ = write!(out, "<bool>{b}</bool>");
        }
        AttributeValue::String(s) => {
            let _ = write!(out, "<string>{}</string>", xml_escape(s));
        }
        AttributeValue::Enum { item, .. } => {
            let _ = write!(out, "<enum>{}</enum>", xml_escape(item));
        }
        AttributeValue::Set(items) | AttributeValue::Array(items) => {
            let tag = if matches!(v, AttributeValue::Set(_)) { "set" } else { "seq" };
            let _ = write!(out, "<{tag}>");
            for i in items {
                gxl_value(i, out);
            }
            let _ = write!(out, "</{tag}>");
        }
        AttributeValue::Map(entries) => {
            out.push_str("<set>");
            for (k, v) in entries {
                out.push_str("<tup>");
                gxl_value(k, out);
                gxl_value(v, out);
                out.push_str("</tup>");
            }
            out.push_str("</set>");
        }
    }
}

fn gxl_attrs(g: &Graph, id: ElementId, out: &mut String) {
    let ty = g.type_of(id).expect("live element");
    let values = g.attributes(id).expect("live element");
    for (slot, v) in g.model().attribute_slots(ty).iter().zip(values) {
        let _ = write!(out, "      <attr name=\"{}\">", xml_escape(&slot.name));
        gxl_value(v, out);
        out.push_str("</attr>\n");
    }
}

pub fn to_gxl(g: &Graph) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <gxl xmlns:xlink=\"http://www.w3.org/1999/xlink\">\n  \
         <graph id=\"G\" edgeids=\"true\" edgemode=\"directed\" hypergraph=\"false\">\n",
    );
    for n in g.nodes() {
        let _ = writeln!(out, "    <node id=\"n{n}\">");
        let _ = writeln!(out, "      <type xlink:href=\"#{}\"/>", xml_escape(g.type_name(n).unwrap_or("?")));
        gxl_attrs(g, n, &mut out);
        out.push_str("    </node>\n");
    }
    for e in g.edges() {
        let (s, t) = g.endpoints(e).expect("live edge");
        let _ = writeln!(out, "    <edge id=\"e{e}\" from=\"n{s}\" to=\"n{t}\">");
        let _ = writeln!(out, "      <type xlink:href=\"#{}\"/>", xml_escape(g.type_name(e).unwrap_or("?")));
        gxl_attrs(g, e, &mut out);
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</gxl>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::style::{Setting, StyleRule};
    use graftool_core::{parse_model, ElementKind};
    use std::sync::Arc;

    fn sample() -> Graph {
        let tg = Arc::new(parse_model("node class A { s:string; } edge class E { w:float; }").unwrap());
        let mut g = Graph::new(tg);
        let a = g.add_node("A").unwrap();
        let b = g.add_node("A").unwrap();
        g.set_attr(a, "s", AttributeValue::String("x<\"y\">".into())).unwrap();
        g.add_edge("E", a, b).unwrap();
        g
    }

    #[test]
    fn dot_has_one_statement_per_node() {
        let tg = Arc::new(parse_model("").unwrap());
        let mut g = Graph::new(tg);
        g.add_node("Node").unwrap();
        let dot = to_dot(&g, &StyleRegistry::default());
        assert_eq!(dot, "digraph G {\n  n1 [label=\"Node#1\"];\n}\n");
    }

    #[test]
    fn dot_carries_styles() {
        let g = sample();
        let styles = StyleRegistry {
            rules: vec![
                StyleRule { kind: ElementKind::Node, ty: "A".into(), only: false, setting: Setting::Color("red".into()) },
                StyleRule { kind: ElementKind::Node, ty: "A".into(), only: false, setting: Setting::InfoTag("s".into()) },
            ],
            ..Default::default()
        };
        let dot = to_dot(&g, &styles);
        assert!(dot.contains("n1 [label=\"A#1\\ns=x<\\\"y\\\">\", color=\"red\"];"), "{dot}");
        assert!(dot.contains("n1 -> n2 [label=\"E#3\"];"));
    }

    #[test]
    fn gxl_counts_typed_elements() {
        let g = sample();
        let gxl = to_gxl(&g);
        let doc = roxmltree::Document::parse(&gxl).unwrap();
        let count = |tag: &str| doc.descendants().filter(|n| n.has_tag_name(tag)).count();
        assert_eq!(count("node") + count("edge"), 3);
        assert_eq!(count("type"), 3);
        let s = doc.descendants().find(|n| n.has_tag_name("string")).unwrap();
        assert_eq!(s.text(), Some("x<\"y\">"));
        assert_eq!(gxl, to_gxl(&g.clone()));
    }
}
