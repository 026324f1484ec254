//! Ecore metamodel import.
//!
//! Classes become node types named `<package>_<Class>` (nested packages
//! contribute every enclosing package name), attributes are prefixed with an
//! underscore, references become edge types `<package>_<Class>_<ref>` and
//! enums become enums named like classes. Every reference edge type carries
//! an `index:int` attribute holding the position inside the owning list.

use std::collections::BTreeMap;
use std::path::Path;

use graftool_core::{AttrKind, ElementKind, EnumDescriptor, TypeDescriptor, TypeGraph};
use roxmltree::{Document, Node};
use thiserror::Error;

const XSI: &str = "http://www.w3.org/2001/XMLSchema-instance";

#[derive(Debug, Error, PartialEq)]
pub enum EcoreError {
    #[error("XML: {0}")]
    Xml(String),
    #[error("unsupported Ecore feature {feature} at {context}")]
    Unsupported { feature: String, context: String },
    #[error("unresolved reference `{reference}` in {context}")]
    Unresolved { reference: String, context: String },
    #[error("malformed Ecore: {0}")]
    Malformed(String),
    #[error(transparent)]
    Type(#[from] graftool_core::TypeError),
}

/// Attribute of an imported class, by original and mangled name.
#[derive(Debug, Clone, PartialEq)]
pub struct AttrInfo {
    pub name: String,
    pub mangled: String,
    pub kind: AttrKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefInfo {
    pub name: String,
    pub edge_type: String,
    /// Mangled node type of the referenced class.
    pub target: String,
    pub containment: bool,
    pub many: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassInfo {
    pub mangled: String,
    pub is_abstract: bool,
    pub supertypes: Vec<String>,
    pub attributes: Vec<AttrInfo>,
    pub references: Vec<RefInfo>,
}

/// Result of importing one `.ecore` file. Keeps the Ecore-level view the
/// XMI reader needs next to the generated type declarations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metamodel {
    /// `<file stem>__ecore`
    pub name: String,
    /// nsPrefix, nsURI and name of every package → mangling prefix
    pub prefixes: BTreeMap<String, String>,
    pub classes: BTreeMap<String, ClassInfo>,
    pub enums: Vec<EnumDescriptor>,
    /// Things the import chose to ignore.
    pub notes: Vec<String>,
}

impl Metamodel {
    pub fn class(&self, mangled: &str) -> Option<&ClassInfo> {
        self.classes.get(mangled)
    }

    /// The class and all transitive superclasses, subclass first.
    pub fn lineage(&self, mangled: &str) -> Vec<&ClassInfo> {
        let mut out: Vec<&ClassInfo> = Vec::new();
        let mut todo = vec![mangled.to_string()];
        while let Some(c) = todo.pop() {
            if let Some(info) = self.classes.get(&c) {
                if out.iter().any(|o| o.mangled == info.mangled) {
                    continue;
                }
                out.push(info);
                todo.extend(info.supertypes.iter().rev().cloned());
            }
        }
        out
    }

    pub fn find_attribute(&self, class: &str, name: &str) -> Option<&AttrInfo> {
        self.lineage(class).into_iter().flat_map(|c| &c.attributes).find(|a| a.name == name)
    }

    pub fn find_reference(&self, class: &str, name: &str) -> Option<&RefInfo> {
        self.lineage(class).into_iter().flat_map(|c| &c.references).find(|r| r.name == name)
    }

    pub fn is_subclass(&self, sub: &str, sup: &str) -> bool {
        self.lineage(sub).iter().any(|c| c.mangled == sup)
    }

    /// Node, edge and enum declarations as a stand-alone type graph.
    pub fn type_graph(&self) -> Result<TypeGraph, EcoreError> {
        Ok(self.declarations().build()?)
    }

    fn declarations(&self) -> graftool_core::types::TypeGraphBuilder {
        let mut b = TypeGraph::builder();
        for e in &self.enums {
            b.add_enum(e.clone());
        }
        for c in self.classes.values() {
            let mut d = TypeDescriptor::new(ElementKind::Node, &c.mangled);
            d.supertypes = c.supertypes.clone();
            d.is_abstract = c.is_abstract;
            for a in &c.attributes {
                d.attributes.push((a.mangled.clone(), a.kind.clone()));
            }
            b.add_type(d);
            for r in &c.references {
                let mut e = TypeDescriptor::new(ElementKind::Edge, &r.edge_type).attr("index", AttrKind::Int);
                e.containment = r.containment;
                e.connect = Some((c.mangled.clone(), r.target.clone()));
                b.add_type(e);
            }
        }
        b
    }
}

/// Model name for an Ecore file: its stem followed by `__ecore`.
pub fn model_name(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    format!("{stem}__ecore")
}

pub fn import_ecore(text: &str, model_name: &str) -> Result<Metamodel, EcoreError> {
    let doc = Document::parse(text).map_err(|e| EcoreError::Xml(e.to_string()))?;
    let root = doc.root_element();
    let mut packages = Vec::new();
    match root.tag_name().name() {
        "EPackage" => packages.push(root),
        // several root packages wrapped in an XMI envelope
        "XMI" => packages.extend(root.children().filter(|c| c.is_element() && c.tag_name().name() == "EPackage")),
        other => {
            return Err(EcoreError::Malformed(format!("root element `{other}` is not an EPackage")));
        }
    }
    let mut mm = Metamodel {
        name: model_name.to_string(),
        ..Metamodel::default()
    };
    // first pass: names of every classifier, so references may point forward
    let mut scopes = Vec::new();
    for p in &packages {
        collect_package(*p, &[], &mut scopes, &mut mm)?;
    }
    let classifiers = classifier_index(&scopes)?;
    for (prefix, pkg_path, node) in &scopes {
        for c in node.children().filter(|c| c.is_element()) {
            match c.tag_name().name() {
                "eClassifiers" => {}
                "eSubpackages" => continue,
                "eAnnotations" => {
                    mm.notes.push(format!("annotations on package {} ignored", pkg_path.join("/")));
                    continue;
                }
                other => {
                    return Err(EcoreError::Unsupported {
                        feature: other.into(),
                        context: format!("package {}", pkg_path.join("/")),
                    })
                }
            }
            let name = required(c, "name")?;
            match xsi_type(c).as_deref() {
                Some("ecore:EClass") | None => {
                    let info = read_class(c, prefix, &classifiers, pkg_path, &mut mm)?;
                    mm.classes.insert(info.mangled.clone(), info);
                }
                Some("ecore:EEnum") => mm.enums.push(read_enum(c, &format!("{prefix}_{name}"))?),
                Some(other) => {
                    return Err(EcoreError::Unsupported {
                        feature: other.trim_start_matches("ecore:").into(),
                        context: format!("classifier {name}"),
                    })
                }
            }
        }
    }
    mm.type_graph()?;
    Ok(mm)
}

type Scope<'a, 'i> = (String, Vec<String>, Node<'a, 'i>);

fn collect_package<'a, 'i>(
    p: Node<'a, 'i>,
    outer: &[String],
    scopes: &mut Vec<Scope<'a, 'i>>,
    mm: &mut Metamodel,
) -> Result<(), EcoreError> {
    let name = required(p, "name")?;
    let mut path = outer.to_vec();
    path.push(name.to_string());
    let prefix = path.join("_");
    for key in ["nsPrefix", "nsURI"] {
        if let Some(ns) = p.attribute(key) {
            mm.prefixes.insert(ns.to_string(), prefix.clone());
        }
    }
    mm.prefixes.insert(name.to_string(), prefix.clone());
    scopes.push((prefix, path.clone(), p));
    for sub in p.children().filter(|c| c.is_element() && c.tag_name().name() == "eSubpackages") {
        collect_package(sub, &path, scopes, mm)?;
    }
    Ok(())
}

/// `#//a/b/C` path → mangled name, for every classifier.
fn classifier_index(scopes: &[Scope<'_, '_>]) -> Result<BTreeMap<String, String>, EcoreError> {
    let mut out = BTreeMap::new();
    for (prefix, path, node) in scopes {
        // the root package is implicit in `#//` paths
        let rel = path[1..].iter().map(|s| format!("{s}/")).collect::<String>();
        for c in node.children().filter(|c| c.is_element() && c.tag_name().name() == "eClassifiers") {
            let name = required(c, "name")?;
            out.insert(format!("#//{rel}{name}"), format!("{prefix}_{name}"));
        }
    }
    Ok(out)
}

fn xsi_type(n: Node<'_, '_>) -> Option<String> {
    n.attribute((XSI, "type")).map(str::to_string)
}

fn required<'a>(n: Node<'a, '_>, attr: &str) -> Result<&'a str, EcoreError> {
    n.attribute(attr).ok_or_else(|| {
        EcoreError::Malformed(format!(
            "<{}> at byte {} lacks `{attr}`",
            n.tag_name().name(),
            n.range().start
        ))
    })
}

fn resolve<'m>(
    reference: &str,
    classifiers: &'m BTreeMap<String, String>,
    context: &str,
) -> Result<&'m String, EcoreError> {
    classifiers.get(reference.trim()).ok_or_else(|| EcoreError::Unresolved {
        reference: reference.into(),
        context: context.into(),
    })
}

fn read_class(
    c: Node<'_, '_>,
    prefix: &str,
    classifiers: &BTreeMap<String, String>,
    pkg_path: &[String],
    mm: &mut Metamodel,
) -> Result<ClassInfo, EcoreError> {
    let name = required(c, "name")?;
    let mangled = format!("{prefix}_{name}");
    let context = format!("class {}", mangled);
    let flag = |a: &str| c.attribute(a) == Some("true");
    let mut info = ClassInfo {
        mangled: mangled.clone(),
        is_abstract: flag("abstract") || flag("interface"),
        supertypes: Vec::new(),
        attributes: Vec::new(),
        references: Vec::new(),
    };
    if let Some(sups) = c.attribute("eSuperTypes") {
        for s in sups.split_whitespace() {
            info.supertypes.push(resolve(s, classifiers, &context)?.clone());
        }
    }
    for f in c.children().filter(|c| c.is_element()) {
        match f.tag_name().name() {
            "eStructuralFeatures" => {}
            "eAnnotations" => {
                mm.notes.push(format!("annotations on {context} ignored"));
                continue;
            }
            other => {
                return Err(EcoreError::Unsupported {
                    feature: other.into(),
                    context,
                })
            }
        }
        if f.children().any(|g| g.is_element() && g.tag_name().name() == "eGenericType") {
            return Err(EcoreError::Unsupported {
                feature: "eGenericType".into(),
                context,
            });
        }
        let fname = required(f, "name")?;
        let etype = required(f, "eType")?;
        let upper = f.attribute("upperBound").unwrap_or("1");
        let many = upper == "-1" || upper.parse::<i64>().map(|u| u > 1).unwrap_or(false);
        if f.attribute("lowerBound").is_some() || f.attribute("upperBound").is_some() || f.attribute("ordered").is_some() {
            let note = "multiplicity bounds and ordering flags are not enforced".to_string();
            if !mm.notes.contains(&note) {
                mm.notes.push(note);
            }
        }
        match xsi_type(f).as_deref() {
            Some("ecore:EAttribute") => {
                let kind = data_kind(etype, classifiers, &format!("{context}.{fname}"), pkg_path)?;
                let kind = if many { AttrKind::array_of(kind)? } else { kind };
                info.attributes.push(AttrInfo {
                    name: fname.into(),
                    mangled: format!("_{fname}"),
                    kind,
                });
            }
            Some("ecore:EReference") => {
                if f.attribute("eOpposite").is_some() {
                    mm.notes.push(format!("opposite of {context}.{fname} imported as an independent edge type"));
                }
                info.references.push(RefInfo {
                    name: fname.into(),
                    edge_type: format!("{mangled}_{fname}"),
                    target: resolve(etype, classifiers, &format!("{context}.{fname}"))?.clone(),
                    containment: f.attribute("containment") == Some("true"),
                    many,
                });
            }
            other => {
                return Err(EcoreError::Unsupported {
                    feature: other.unwrap_or("untyped feature").trim_start_matches("ecore:").into(),
                    context: format!("{context}.{fname}"),
                })
            }
        }
    }
    Ok(info)
}

fn data_kind(
    etype: &str,
    classifiers: &BTreeMap<String, String>,
    context: &str,
    _pkg: &[String],
) -> Result<AttrKind, EcoreError> {
    if let Some(local) = etype.strip_prefix("#//") {
        let mangled = resolve(&format!("#//{local}"), classifiers, context)?;
        return Ok(AttrKind::Enum(mangled.clone()));
    }
    let builtin = etype.rsplit("#//").next().unwrap_or(etype);
    Ok(match builtin {
        "EString" => AttrKind::String,
        "EInt" | "EIntegerObject" | "ELong" | "ELongObject" | "EShort" | "EShortObject" | "EByte"
        | "EByteObject" | "EBigInteger" => AttrKind::Int,
        "EDouble" | "EDoubleObject" | "EFloat" | "EFloatObject" | "EBigDecimal" => AttrKind::Float,
        "EBoolean" | "EBooleanObject" => AttrKind::Boolean,
        other => {
            return Err(EcoreError::Unsupported {
                feature: format!("data type {other}"),
                context: context.into(),
            })
        }
    })
}

fn read_enum(c: Node<'_, '_>, mangled: &str) -> Result<EnumDescriptor, EcoreError> {
    let mut items = Vec::new();
    for (i, lit) in c
        .children()
        .filter(|l| l.is_element() && l.tag_name().name() == "eLiterals")
        .enumerate()
    {
        let name = required(lit, "name")?;
        let value = match lit.attribute("value") {
            Some(v) => v
                .parse()
                .map_err(|_| EcoreError::Malformed(format!("enum literal {mangled}::{name} value `{v}`")))?,
            None => i as i64,
        };
        items.push((name.to_string(), value));
    }
    Ok(EnumDescriptor {
        name: mangled.into(),
        items,
    })
}

/// Merges several imported metamodels and `.gm` type graphs into one.
pub fn merge_models(metamodels: &[Metamodel], extra: &[TypeGraph]) -> Result<TypeGraph, EcoreError> {
    let mut parts = Vec::new();
    for m in metamodels {
        parts.push(m.type_graph()?);
    }
    parts.extend(extra.iter().cloned());
    Ok(TypeGraph::merge(parts.iter())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const HELLO: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<ecore:EPackage xmi:version="2.0" xmlns:xmi="http://www.omg.org/XMI"
    xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"
    xmlns:ecore="http://www.eclipse.org/emf/2002/Ecore" name="helloworld" nsURI="http://helloworld" nsPrefix="helloworld">
  <eClassifiers xsi:type="ecore:EClass" name="Greeting">
    <eStructuralFeatures xsi:type="ecore:EAttribute" name="text" eType="ecore:EDataType http://www.eclipse.org/emf/2002/Ecore#//EString"/>
  </eClassifiers>
</ecore:EPackage>
"#;

    fn package(body: &str) -> String {
        format!(
            r#"<ecore:EPackage xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"
                xmlns:ecore="http://www.eclipse.org/emf/2002/Ecore" name="p" nsPrefix="pp">{body}</ecore:EPackage>"#
        )
    }

    #[test]
    fn greeting_class_is_mangled() {
        let mm = import_ecore(HELLO, "helloworld__ecore").unwrap();
        let tg = mm.type_graph().unwrap();
        assert_eq!(
            tg.all_attributes("helloworld_Greeting").unwrap(),
            vec![("_text".to_string(), AttrKind::String)]
        );
        assert_eq!(model_name(Path::new("dir/helloworld.ecore")), "helloworld__ecore");
    }

    #[test]
    fn empty_package_has_only_roots() {
        let mm = import_ecore(&package(""), "p__ecore").unwrap();
        assert_eq!(mm.type_graph().unwrap().types().count(), 2);
    }

    #[test]
    fn references_inheritance_and_enums() {
        let body = r##"
          <eClassifiers xsi:type="ecore:EClass" name="Graph">
            <eStructuralFeatures xsi:type="ecore:EReference" name="nodes" upperBound="-1" eType="#//Node" containment="true"/>
          </eClassifiers>
          <eClassifiers xsi:type="ecore:EClass" name="Part" abstract="true">
            <eStructuralFeatures xsi:type="ecore:EAttribute" name="color" eType="#//Color"/>
          </eClassifiers>
          <eClassifiers xsi:type="ecore:EClass" name="Node" eSuperTypes="#//Part">
            <eStructuralFeatures xsi:type="ecore:EAttribute" name="w" eType="ecore:EDataType http://www.eclipse.org/emf/2002/Ecore#//EDouble"/>
            <eStructuralFeatures xsi:type="ecore:EReference" name="next" eType="#//Node"/>
          </eClassifiers>
          <eClassifiers xsi:type="ecore:EEnum" name="Color">
            <eLiterals name="red"/><eLiterals name="blue" value="4"/>
          </eClassifiers>
          <eSubpackages name="sub"><eClassifiers xsi:type="ecore:EClass" name="Leaf" eSuperTypes="#//Node"/></eSubpackages>
        "##;
        let mm = import_ecore(&package(body), "p__ecore").unwrap();
        let tg = mm.type_graph().unwrap();
        assert!(tg.is_subtype("p_sub_Leaf", "p_Part").unwrap());
        assert!(tg.descriptor(tg.lookup("p_Part").unwrap()).is_abstract);
        let nodes = tg.descriptor(tg.lookup("p_Graph_nodes").unwrap());
        assert!(nodes.containment);
        assert_eq!(nodes.connect, Some(("p_Graph".into(), "p_Node".into())));
        assert_eq!(
            tg.all_attributes("p_sub_Leaf").unwrap(),
            vec![
                ("_color".to_string(), AttrKind::Enum("p_Color".into())),
                ("_w".to_string(), AttrKind::Float)
            ]
        );
        assert_eq!(tg.enum_type("p_Color").unwrap().item_value("blue"), Some(4));
        assert_eq!(mm.find_reference("p_sub_Leaf", "next").unwrap().edge_type, "p_Node_next");
        assert_eq!(mm.prefixes["pp"], "p");
        // one node type per class plus the root
        assert_eq!(tg.node_types().count(), 5);
    }

    #[test]
    fn unsupported_features_abort_by_name() {
        let op = package(r#"<eClassifiers xsi:type="ecore:EClass" name="A"><eOperations name="f"/></eClassifiers>"#);
        match import_ecore(&op, "p").unwrap_err() {
            EcoreError::Unsupported { feature, .. } => assert_eq!(feature, "eOperations"),
            e => panic!("{e}"),
        }
        let dt = package(r#"<eClassifiers xsi:type="ecore:EDataType" name="Date"/>"#);
        assert!(matches!(import_ecore(&dt, "p"), Err(EcoreError::Unsupported { .. })));
        let bad = package(r##"<eClassifiers xsi:type="ecore:EClass" name="A" eSuperTypes="#//Nope"/>"##);
        assert!(matches!(import_ecore(&bad, "p"), Err(EcoreError::Unresolved { .. })));
        assert!(matches!(import_ecore("<oops", "p"), Err(EcoreError::Xml(_))));
    }

    #[test]
    fn bounds_are_noted() {
        let body = r##"<eClassifiers xsi:type="ecore:EClass" name="A">
            <eStructuralFeatures xsi:type="ecore:EReference" name="r" lowerBound="1" eType="#//A"/></eClassifiers>"##;
        let mm = import_ecore(&package(body), "p").unwrap();
        assert_eq!(mm.notes.len(), 1);
    }
}
