//! Display hints set by `dump` and `debug set layout` commands. They affect
//! exports and the debugger view only, never the graph.

use std::collections::BTreeMap;

use graftool_core::{ElementId, ElementKind, Graph};

#[derive(Debug, Clone, PartialEq)]
pub enum Setting {
    Color(String),
    TextColor(String),
    BorderColor(String),
    Shape(String),
    LineStyle(String),
    /// `on`, `off` or fixed label text
    Labels(String),
    InfoTag(String),
    Exclude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StyleRule {
    pub kind: ElementKind,
    pub ty: String,
    /// Applies to the exact type only, not to subtypes.
    pub only: bool,
    pub setting: Setting,
}

/// Nodes of `parent_type` display the targets of their outgoing
/// `edge_type` edges as nested children.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    pub parent_type: String,
    pub edge_type: String,
    pub child_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Resolved {
    pub color: Option<String>,
    pub text_color: Option<String>,
    pub border_color: Option<String>,
    pub shape: Option<String>,
    pub line_style: Option<String>,
    pub labels: Option<String>,
    pub info_tags: Vec<String>,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StyleRegistry {
    pub rules: Vec<StyleRule>,
    pub groupings: Vec<Grouping>,
    pub layout: Option<String>,
    pub layout_options: BTreeMap<String, String>,
}

impl StyleRegistry {
    /// Folds every matching rule in registration order; later rules win.
    pub fn resolve(&self, g: &Graph, id: ElementId) -> Resolved {
        let mut r = Resolved::default();
        let (Some(ty), Some(kind)) = (g.type_name(id), g.kind_of(id)) else {
            return r;
        };
        for rule in &self.rules {
            let applies = rule.kind == kind
                && (rule.ty == ty || !rule.only && g.model().is_subtype(ty, &rule.ty).unwrap_or(false));
            if !applies {
                continue;
            }
            match &rule.setting {
                Setting::Color(c) => r.color = Some(c.clone()),
                Setting::TextColor(c) => r.text_color = Some(c.clone()),
                Setting::BorderColor(c) => r.border_color = Some(c.clone()),
                Setting::Shape(s) => r.shape = Some(s.clone()),
                Setting::LineStyle(s) => r.line_style = Some(s.clone()),
                Setting::Labels(l) => r.labels = Some(l.clone()),
                Setting::InfoTag(a) => {
                    if !r.info_tags.contains(a) {
                        r.info_tags.push(a.clone())
                    }
                }
                Setting::Exclude => r.excluded = true,
            }
        }
        r
    }

    /// Parent of each nested node under the registered groupings. The first
    /// grouping edge wins and edges that would close a cycle are ignored, so
    /// the result is a forest.
    pub fn containment(&self, g: &Graph) -> BTreeMap<ElementId, ElementId> {
        let mut parent: BTreeMap<ElementId, ElementId> = BTreeMap::new();
        let tg = g.model();
        let is = |id: ElementId, ty: &str| g.type_name(id).is_some_and(|t| tg.is_subtype(t, ty).unwrap_or(false));
        for grp in &self.groupings {
            for e in g.edges() {
                let Some((s, t)) = g.endpoints(e) else { continue };
                if !is(e, &grp.edge_type) || !is(s, &grp.parent_type) {
                    continue;
                }
                if grp.child_type.as_deref().is_some_and(|ct| !is(t, ct)) || parent.contains_key(&t) {
                    continue;
                }
                let mut up = Some(s);
                let mut cyclic = false;
                while let Some(x) = up {
                    if x == t {
                        cyclic = true;
                        break;
                    }
                    up = parent.get(&x).copied();
                }
                if !cyclic {
                    parent.insert(t, s);
                }
            }
        }
        parent
    }
}
