//! XMI instance import for models whose metamodel came from Ecore.
//!
//! Supported subset: one document, objects nested through containment
//! features, non-containment references written as `//@feature.i/@sub.j`
//! paths (`/k/@...` under an `xmi:XMI` envelope). Each object becomes a node,
//! each containment link and each reference target an edge whose `index`
//! attribute is its position in the feature's list.

use std::collections::BTreeMap;

use graftool_core::{AttrKind, AttributeValue, ElementId, Graph};
use roxmltree::{Document, Node};
use thiserror::Error;

use crate::ecore::{ClassInfo, Metamodel, RefInfo};

const XSI: &str = "http://www.w3.org/2001/XMLSchema-instance";
const XMI: &str = "http://www.omg.org/XMI";

#[derive(Debug, Error, PartialEq)]
pub enum XmiError {
    #[error("XML: {0}")]
    Xml(String),
    #[error("line {line}: {message}")]
    Invalid { line: u32, message: String },
    #[error(transparent)]
    Graph(#[from] graftool_core::GraphError),
}

/// Lookup over every imported metamodel.
pub struct Catalog<'a> {
    models: &'a [Metamodel],
}

impl<'a> Catalog<'a> {
    pub fn new(models: &'a [Metamodel]) -> Self {
        Catalog { models }
    }

    fn prefix(&self, key: &str) -> Option<&'a str> {
        self.models.iter().find_map(|m| m.prefixes.get(key)).map(String::as_str)
    }

    fn model_of(&self, class: &str) -> Option<&'a Metamodel> {
        self.models.iter().find(|m| m.classes.contains_key(class))
    }

    fn class(&self, class: &str) -> Option<&'a ClassInfo> {
        self.model_of(class).and_then(|m| m.class(class))
    }
}

struct Reader<'a, 'd, 'i> {
    cat: Catalog<'a>,
    g: &'a mut Graph,
    doc: &'d Document<'i>,
    paths: BTreeMap<String, ElementId>,
    /// (source object, reference, path list, line)
    pending: Vec<(ElementId, &'a RefInfo, String, u32)>,
    created: usize,
}

pub fn import_instance(text: &str, models: &[Metamodel], g: &mut Graph) -> Result<usize, XmiError> {
    let doc = Document::parse(text).map_err(|e| XmiError::Xml(e.to_string()))?;
    let root = doc.root_element();
    let roots: Vec<Node> = if root.tag_name().name() == "XMI" && root.tag_name().namespace() == Some(XMI) {
        root.children().filter(Node::is_element).collect()
    } else {
        vec![root]
    };
    let mut r = Reader {
        cat: Catalog::new(models),
        g,
        doc: &doc,
        paths: BTreeMap::new(),
        pending: Vec::new(),
        created: 0,
    };
    let single = roots.len() == 1;
    for (i, obj) in roots.iter().enumerate() {
        let class = r.root_class(*obj)?;
        let path = if single { "/".to_string() } else { format!("/{i}") };
        r.object(*obj, &class, path)?;
    }
    let pending = std::mem::take(&mut r.pending);
    for (src, rf, list, line) in pending {
        for (k, p) in list.split_whitespace().enumerate() {
            let target = r.resolve(p).ok_or_else(|| XmiError::Invalid {
                line,
                message: format!("unresolvable reference `{p}` in feature `{}`", rf.name),
            })?;
            r.link(src, target, rf, k, line)?;
        }
    }
    Ok(r.created)
}

impl<'a> Reader<'a, '_, '_> {
    fn line(&self, n: Node) -> u32 {
        self.doc.text_pos_at(n.range().start).row
    }

    fn fail<T>(&self, n: Node, message: String) -> Result<T, XmiError> {
        Err(XmiError::Invalid {
            line: self.line(n),
            message,
        })
    }

    /// Resolves a `prefix:Class` name against package prefixes.
    fn qualified(&self, n: Node, qname: &str) -> Result<String, XmiError> {
        let (pfx, local) = qname.split_once(':').unwrap_or(("", qname));
        let pkg = self
            .cat
            .prefix(pfx)
            .or_else(|| n.lookup_namespace_uri(Some(pfx)).and_then(|uri| self.cat.prefix(uri)));
        match pkg {
            Some(pkg) => Ok(format!("{pkg}_{local}")),
            None => self.fail(n, format!("unknown package prefix `{pfx}`")),
        }
    }

    fn root_class(&self, n: Node) -> Result<String, XmiError> {
        if let Some(t) = n.attribute((XSI, "type")) {
            return self.qualified(n, t);
        }
        let tag = n.tag_name();
        let pkg = tag
            .namespace()
            .and_then(|uri| self.cat.prefix(uri).or_else(|| n.lookup_prefix(uri).and_then(|p| self.cat.prefix(p))));
        match pkg {
            Some(pkg) => Ok(format!("{pkg}_{}", tag.name())),
            None => self.fail(n, format!("cannot resolve the package of <{}>", tag.name())),
        }
    }

    fn object(&mut self, n: Node, class: &str, path: String) -> Result<ElementId, XmiError> {
        let Some(model) = self.cat.model_of(class) else {
            return self.fail(n, format!("no class `{class}` in the imported metamodels"));
        };
        if model.class(class).is_some_and(|c| c.is_abstract) {
            return self.fail(n, format!("class `{class}` is abstract"));
        }
        let id = self.g.add_node(class)?;
        self.created += 1;
        self.paths.insert(path.clone(), id);

        for a in n.attributes() {
            if a.namespace().is_some() {
                continue;
            }
            if let Some(attr) = model.find_attribute(class, a.name()) {
                let v = self.value(n, &attr.kind, a.value())?;
                self.g.set_attr(id, &attr.mangled, v)?;
            } else if let Some(rf) = model.find_reference(class, a.name()) {
                self.pending.push((id, rf, a.value().to_string(), self.line(n)));
            } else {
                return self.fail(n, format!("class `{class}` has no feature `{}`", a.name()));
            }
        }

        let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
        let mut many_attr: BTreeMap<String, Vec<AttributeValue>> = BTreeMap::new();
        for child in n.children().filter(Node::is_element) {
            let fname = child.tag_name().name();
            if let Some(attr) = model.find_attribute(class, fname) {
                let AttrKind::Array(inner) = &attr.kind else {
                    return self.fail(child, format!("single-valued attribute `{fname}` given as element"));
                };
                let v = self.value(child, inner, child.text().unwrap_or(""))?;
                many_attr.entry(attr.mangled.clone()).or_default().push(v);
                continue;
            }
            let Some(rf) = model.find_reference(class, fname) else {
                return self.fail(child, format!("class `{class}` has no feature `{fname}`"));
            };
            if !rf.containment {
                // a reference spelled as an element with an href is outside the subset
                return self.fail(child, format!("non-containment reference `{fname}` written as an element"));
            }
            let k = counters.entry(fname).or_insert(0);
            let index = *k;
            *k += 1;
            let child_class = match child.attribute((XSI, "type")) {
                Some(t) => self.qualified(child, t)?,
                None => rf.target.clone(),
            };
            let is_sub = self.cat.model_of(&child_class).is_some_and(|m| m.is_subclass(&child_class, &rf.target))
                || self.cat.class(&child_class).is_some() && child_class == rf.target;
            if !is_sub {
                return self.fail(child, format!("`{child_class}` does not conform to `{}`", rf.target));
            }
            let child_path = if rf.many {
                format!("{path}/@{fname}.{index}")
            } else {
                format!("{path}/@{fname}")
            };
            let child_id = self.object(child, &child_class, child_path.clone())?;
            if !rf.many {
                // EMF tolerates an index even on single-valued features
                self.paths.insert(format!("{path}/@{fname}.0"), child_id);
            }
            self.link(id, child_id, rf, index, self.line(child))?;
        }
        for (name, items) in many_attr {
            self.g.set_attr(id, &name, AttributeValue::Array(items))?;
        }
        Ok(id)
    }

    fn link(&mut self, src: ElementId, trg: ElementId, rf: &RefInfo, index: usize, line: u32) -> Result<(), XmiError> {
        let e = self.g.add_edge(&rf.edge_type, src, trg)?;
        self.created += 1;
        self.g.set_attr(e, "index", AttributeValue::Int(index as i64)).map_err(|err| XmiError::Invalid {
            line,
            message: err.to_string(),
        })
    }

    fn resolve(&self, path: &str) -> Option<ElementId> {
        let path = path.strip_prefix('#').unwrap_or(path);
        self.paths.get(path).copied()
    }

    fn value(&self, n: Node, kind: &AttrKind, text: &str) -> Result<AttributeValue, XmiError> {
        let bad = || format!("`{text}` is not a valid {kind}");
        Ok(match kind {
            AttrKind::Int => match text.trim().parse() {
                Ok(v) => AttributeValue::Int(v),
                Err(_) => return self.fail(n, bad()),
            },
            AttrKind::Float => match text.trim().parse() {
                Ok(v) => AttributeValue::Float(v),
                Err(_) => return self.fail(n, bad()),
            },
            AttrKind::Boolean => match text.trim() {
                "true" => AttributeValue::Boolean(true),
                "false" => AttributeValue::Boolean(false),
                _ => return self.fail(n, bad()),
            },
            AttrKind::String => AttributeValue::String(text.to_string()),
            AttrKind::Enum(e) => {
                let known = self.g.model().enum_type(e).and_then(|d| d.item_value(text.trim())).is_some();
                if !known {
                    return self.fail(n, bad());
                }
                AttributeValue::Enum {
                    ty: e.clone(),
                    item: text.trim().to_string(),
                }
            }
            _ => return self.fail(n, format!("attributes of kind {kind} are not supported in XMI")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecore::import_ecore;
    use std::sync::Arc;

    const MM: &str = r##"<ecore:EPackage xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"
        xmlns:ecore="http://www.eclipse.org/emf/2002/Ecore" name="graph" nsURI="graph" nsPrefix="graph">
      <eClassifiers xsi:type="ecore:EClass" name="Graph">
        <eStructuralFeatures xsi:type="ecore:EReference" name="nodes" upperBound="-1" eType="#//Node" containment="true"/>
        <eStructuralFeatures xsi:type="ecore:EReference" name="edges" upperBound="-1" eType="#//Edge" containment="true"/>
      </eClassifiers>
      <eClassifiers xsi:type="ecore:EClass" name="Node">
        <eStructuralFeatures xsi:type="ecore:EAttribute" name="name" eType="ecore:EDataType http://www.eclipse.org/emf/2002/Ecore#//EString"/>
        <eStructuralFeatures xsi:type="ecore:EAttribute" name="tags" upperBound="-1" eType="ecore:EDataType http://www.eclipse.org/emf/2002/Ecore#//EInt"/>
        <eStructuralFeatures xsi:type="ecore:EReference" name="next" upperBound="-1" eType="#//Node"/>
      </eClassifiers>
      <eClassifiers xsi:type="ecore:EClass" name="Special" eSuperTypes="#//Node"/>
      <eClassifiers xsi:type="ecore:EClass" name="Edge">
        <eStructuralFeatures xsi:type="ecore:EReference" name="src" eType="#//Node"/>
        <eStructuralFeatures xsi:type="ecore:EReference" name="trg" eType="#//Node"/>
      </eClassifiers>
    </ecore:EPackage>"##;

    fn setup() -> (Vec<Metamodel>, Graph) {
        let mm = import_ecore(MM, "graph__ecore").unwrap();
        let g = Graph::new(Arc::new(mm.type_graph().unwrap()));
        (vec![mm], g)
    }

    #[test]
    fn objects_links_and_indices() {
        let (mms, mut g) = setup();
        let xmi = r#"<?xml version="1.0"?>
<graph:Graph xmi:version="2.0" xmlns:xmi="http://www.omg.org/XMI" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xmlns:graph="graph">
  <nodes name="a" next="//@nodes.1 //@nodes.0"><tags>3</tags><tags>4</tags></nodes>
  <nodes xsi:type="graph:Special" name="b"/>
  <edges src="//@nodes.0" trg="//@nodes.1"/>
</graph:Graph>"#;
        // 4 objects, 3 containment links, 2 next links, src and trg
        assert_eq!(import_instance(xmi, &mms, &mut g).unwrap(), 4 + 3 + 2 + 2);
        let next = g.model().lookup("graph_Node_next").unwrap();
        let links = g.elements_of_type(next, false);
        let idx: Vec<_> = links.iter().map(|&e| g.get_attr(e, "index").unwrap().clone()).collect();
        assert_eq!(idx, vec![AttributeValue::Int(0), AttributeValue::Int(1)]);
        let b = g.nodes().nth(2).unwrap();
        assert_eq!(g.type_name(b), Some("graph_Special"));
        let a = g.nodes().nth(1).unwrap();
        assert_eq!(
            g.get_attr(a, "_tags").unwrap(),
            &AttributeValue::Array(vec![AttributeValue::Int(3), AttributeValue::Int(4)])
        );
    }

    #[test]
    fn empty_document_imports_nothing_but_the_root() {
        let (mms, mut g) = setup();
        let xmi = r#"<xmi:XMI xmlns:xmi="http://www.omg.org/XMI"/>"#;
        assert_eq!(import_instance(xmi, &mms, &mut g).unwrap(), 0);
        assert_eq!(g.node_count(), 0);
    }

    #[test]
    fn errors_carry_lines() {
        let (mms, mut g) = setup();
        let bad_ref = "<graph:Graph xmlns:graph=\"graph\">\n<edges src=\"//@nodes.7\"/></graph:Graph>";
        assert!(matches!(import_instance(bad_ref, &mms, &mut g), Err(XmiError::Invalid { line: 2, .. })));
        let bad_attr = "<graph:Graph xmlns:graph=\"graph\"><nodes tags=\"x\"/></graph:Graph>";
        assert!(import_instance(bad_attr, &mms, &mut g).is_err());
        let unknown = "<graph:Graph xmlns:graph=\"graph\"><vertices/></graph:Graph>";
        assert!(import_instance(unknown, &mms, &mut g).is_err());
    }
}
