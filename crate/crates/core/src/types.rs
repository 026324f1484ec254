//! The metamodel layer: node and edge types with multiple inheritance,
//! attribute declarations and enums.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::TypeError;

pub const NODE_ROOT: &str = "Node";
pub const EDGE_ROOT: &str = "Edge";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttrKind {
    Int,
    Float,
    Boolean,
    String,
    Enum(String),
    Set(Box<AttrKind>),
    Map(Box<AttrKind>, Box<AttrKind>),
    Array(Box<AttrKind>),
}

impl AttrKind {
    pub fn is_scalar(&self) -> bool {
        !matches!(self, AttrKind::Set(_) | AttrKind::Map(..) | AttrKind::Array(_))
    }

    pub fn set_of(elem: AttrKind) -> Result<AttrKind, TypeError> {
        if !elem.is_scalar() {
            return Err(TypeError::NestedContainer);
        }
        Ok(AttrKind::Set(Box::new(elem)))
    }

    pub fn array_of(elem: AttrKind) -> Result<AttrKind, TypeError> {
        if !elem.is_scalar() {
            return Err(TypeError::NestedContainer);
        }
        Ok(AttrKind::Array(Box::new(elem)))
    }

    pub fn map_of(key: AttrKind, value: AttrKind) -> Result<AttrKind, TypeError> {
        if !key.is_scalar() || !value.is_scalar() {
            return Err(TypeError::NestedContainer);
        }
        Ok(AttrKind::Map(Box::new(key), Box::new(value)))
    }

    fn check_nesting(&self) -> Result<(), TypeError> {
        match self {
            AttrKind::Set(e) | AttrKind::Array(e) if !e.is_scalar() => Err(TypeError::NestedContainer),
            AttrKind::Map(k, v) if !k.is_scalar() || !v.is_scalar() => Err(TypeError::NestedContainer),
            _ => Ok(()),
        }
    }

    fn enum_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            AttrKind::Enum(name) => out.push(name),
            AttrKind::Set(e) | AttrKind::Array(e) => e.enum_names(out),
            AttrKind::Map(k, v) => {
                k.enum_names(out);
                v.enum_names(out);
            }
            _ => {}
        }
    }
}

impl fmt::Display for AttrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrKind::Int => f.write_str("int"),
            AttrKind::Float => f.write_str("float"),
            AttrKind::Boolean => f.write_str("boolean"),
            AttrKind::String => f.write_str("string"),
            AttrKind::Enum(name) => f.write_str(name),
            AttrKind::Set(e) => write!(f, "set<{e}>"),
            AttrKind::Map(k, v) => write!(f, "map<{k},{v}>"),
            AttrKind::Array(e) => write!(f, "array<{e}>"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Node,
    Edge,
}

impl ElementKind {
    pub fn root(self) -> &'static str {
        match self {
            ElementKind::Node => NODE_ROOT,
            ElementKind::Edge => EDGE_ROOT,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Node => "node",
            ElementKind::Edge => "edge",
        }
    }
}

/// A node or edge class as declared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDescriptor {
    pub kind: ElementKind,
    pub name: String,
    pub supertypes: Vec<String>,
    pub attributes: Vec<(String, AttrKind)>,
    pub is_abstract: bool,
    /// Edge types only: the edge encodes a containment reference.
    pub containment: bool,
    /// Edge types only: recorded (source, target) node type constraint.
    pub connect: Option<(String, String)>,
}

impl TypeDescriptor {
    pub fn new(kind: ElementKind, name: impl Into<String>) -> Self {
        TypeDescriptor {
            kind,
            name: name.into(),
            supertypes: Vec::new(),
            attributes: Vec::new(),
            is_abstract: false,
            containment: false,
            connect: None,
        }
    }

    pub fn extends(mut self, sup: impl Into<String>) -> Self {
        self.supertypes.push(sup.into());
        self
    }

    pub fn attr(mut self, name: impl Into<String>, kind: AttrKind) -> Self {
        self.attributes.push((name.into(), kind));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumDescriptor {
    pub name: String,
    pub items: Vec<(String, i64)>,
}

impl EnumDescriptor {
    pub fn item_value(&self, item: &str) -> Option<i64> {
        self.items.iter().find(|(n, _)| n == item).map(|(_, v)| *v)
    }

    pub fn item_name(&self, value: i64) -> Option<&str> {
        self.items.iter().find(|(_, v)| *v == value).map(|(n, _)| n.as_str())
    }
}

/// Index of a type inside its [`TypeGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(pub u32);

impl TypeId {
    pub const NODE: TypeId = TypeId(0);
    pub const EDGE: TypeId = TypeId(1);

    fn idx(self) -> usize {
        self.0 as usize
    }
}

/// One slot of a type's flattened attribute list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrSlot {
    pub name: String,
    pub kind: AttrKind,
    pub declared_in: TypeId,
}

/// Resolved type hierarchy. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeGraph {
    types: Vec<TypeDescriptor>,
    by_name: BTreeMap<String, TypeId>,
    enums: Vec<EnumDescriptor>,
    enum_by_name: BTreeMap<String, usize>,
    ancestors: Vec<BTreeSet<TypeId>>,
    subtypes: Vec<Vec<TypeId>>,
    attrs: Vec<Vec<AttrSlot>>,
}

impl Default for TypeGraph {
    fn default() -> Self {
        TypeGraphBuilder::new()
            .build()
            .expect("empty type graph is always valid")
    }
}

impl TypeGraph {
    pub fn builder() -> TypeGraphBuilder {
        TypeGraphBuilder::new()
    }

    pub fn lookup(&self, name: &str) -> Option<TypeId> {
        self.by_name.get(name).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<TypeId, TypeError> {
        self.lookup(name)
            .ok_or_else(|| TypeError::UnknownType(name.to_string()))
    }

    pub fn resolve_kind(&self, name: &str, kind: ElementKind) -> Result<TypeId, TypeError> {
        let id = self.resolve(name)?;
        if self.kind(id) != kind {
            return Err(TypeError::WrongKind {
                ty: name.to_string(),
                expected: kind.as_str(),
            });
        }
        Ok(id)
    }

    pub fn descriptor(&self, id: TypeId) -> &TypeDescriptor {
        &self.types[id.idx()]
    }

    pub fn name(&self, id: TypeId) -> &str {
        &self.types[id.idx()].name
    }

    pub fn kind(&self, id: TypeId) -> ElementKind {
        self.types[id.idx()].kind
    }

    pub fn root(kind: ElementKind) -> TypeId {
        match kind {
            ElementKind::Node => TypeId::NODE,
            ElementKind::Edge => TypeId::EDGE,
        }
    }

    /// All types, roots first, then in declaration order.
    pub fn types(&self) -> impl Iterator<Item = (TypeId, &TypeDescriptor)> {
        self.types
            .iter()
            .enumerate()
            .map(|(i, d)| (TypeId(i as u32), d))
    }

    pub fn node_types(&self) -> impl Iterator<Item = (TypeId, &TypeDescriptor)> {
        self.types().filter(|(_, d)| d.kind == ElementKind::Node)
    }

    pub fn edge_types(&self) -> impl Iterator<Item = (TypeId, &TypeDescriptor)> {
        self.types().filter(|(_, d)| d.kind == ElementKind::Edge)
    }

    pub fn enums(&self) -> &[EnumDescriptor] {
        &self.enums
    }

    pub fn enum_type(&self, name: &str) -> Option<&EnumDescriptor> {
        self.enum_by_name.get(name).map(|&i| &self.enums[i])
    }

    pub fn is_subtype_id(&self, sub: TypeId, sup: TypeId) -> bool {
        self.ancestors[sub.idx()].contains(&sup)
    }

    /// True iff `sup` is reachable from `sub` through supertype declarations
    /// (reflexive). Both names must denote types of the same kind.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> Result<bool, TypeError> {
        let a = self.resolve(sub)?;
        let b = self.resolve(sup)?;
        if self.kind(a) != self.kind(b) {
            return Err(TypeError::WrongKind {
                ty: sup.to_string(),
                expected: self.kind(a).as_str(),
            });
        }
        Ok(self.is_subtype_id(a, b))
    }

    /// `id` and every type deriving from it, ascending.
    pub fn subtypes_of(&self, id: TypeId) -> &[TypeId] {
        &self.subtypes[id.idx()]
    }

    pub fn attribute_slots(&self, id: TypeId) -> &[AttrSlot] {
        &self.attrs[id.idx()]
    }

    pub fn attribute_index(&self, id: TypeId, name: &str) -> Option<usize> {
        self.attrs[id.idx()].iter().position(|s| s.name == name)
    }

    pub fn attribute_kind(&self, id: TypeId, name: &str) -> Option<&AttrKind> {
        self.attrs[id.idx()]
            .iter()
            .find(|s| s.name == name)
            .map(|s| &s.kind)
    }

    /// Attributes of `name` and its transitive supertypes, supertype first.
    pub fn all_attributes(&self, name: &str) -> Result<Vec<(String, AttrKind)>, TypeError> {
        let id = self.resolve(name)?;
        Ok(self.attrs[id.idx()]
            .iter()
            .map(|s| (s.name.clone(), s.kind.clone()))
            .collect())
    }

    /// Declarations with the roots stripped; feeding these back through a
    /// builder reproduces this graph.
    pub fn declarations(&self) -> (impl Iterator<Item = &TypeDescriptor>, &[EnumDescriptor]) {
        (self.types.iter().skip(2), &self.enums)
    }

    /// Union of several type graphs. Names must not collide.
    pub fn merge<'a>(parts: impl IntoIterator<Item = &'a TypeGraph>) -> Result<TypeGraph, TypeError> {
        let mut b = TypeGraphBuilder::new();
        for tg in parts {
            let (types, enums) = tg.declarations();
            for e in enums {
                b.add_enum(e.clone());
            }
            for t in types {
                b.add_type(t.clone());
            }
        }
        b.build()
    }
}

#[derive(Debug, Clone, Default)]
pub struct TypeGraphBuilder {
    types: Vec<TypeDescriptor>,
    enums: Vec<EnumDescriptor>,
}

impl TypeGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_type(&mut self, desc: TypeDescriptor) -> &mut Self {
        self.types.push(desc);
        self
    }

    pub fn add_enum(&mut self, desc: EnumDescriptor) -> &mut Self {
        self.enums.push(desc);
        self
    }

    pub fn with_type(mut self, desc: TypeDescriptor) -> Self {
        self.types.push(desc);
        self
    }

    pub fn build(self) -> Result<TypeGraph, TypeError> {
        let mut types = Vec::with_capacity(self.types.len() + 2);
        types.push(TypeDescriptor::new(ElementKind::Node, NODE_ROOT));
        types.push(TypeDescriptor::new(ElementKind::Edge, EDGE_ROOT));

        let mut by_name = BTreeMap::new();
        by_name.insert(NODE_ROOT.to_string(), TypeId::NODE);
        by_name.insert(EDGE_ROOT.to_string(), TypeId::EDGE);

        let mut enum_by_name = BTreeMap::new();
        for (i, e) in self.enums.iter().enumerate() {
            if by_name.contains_key(&e.name) || enum_by_name.insert(e.name.clone(), i).is_some() {
                return Err(TypeError::DuplicateName(e.name.clone()));
            }
            validate_enum(e)?;
        }

        for desc in self.types {
            if desc.name == NODE_ROOT || desc.name == EDGE_ROOT {
                return Err(TypeError::RootRedeclared(desc.name));
            }
            if by_name.contains_key(&desc.name) || enum_by_name.contains_key(&desc.name) {
                return Err(TypeError::DuplicateName(desc.name));
            }
            by_name.insert(desc.name.clone(), TypeId(types.len() as u32));
            types.push(desc);
        }

        // direct supertype ids; roots are implicit
        let mut supers: Vec<Vec<TypeId>> = Vec::with_capacity(types.len());
        for (i, desc) in types.iter().enumerate() {
            let mut ids = Vec::new();
            for sup in &desc.supertypes {
                let id = *by_name.get(sup).ok_or_else(|| TypeError::UnknownSupertype {
                    ty: desc.name.clone(),
                    sup: sup.clone(),
                })?;
                if types[id.idx()].kind != desc.kind {
                    return Err(TypeError::SupertypeKind {
                        ty: desc.name.clone(),
                        sup: sup.clone(),
                    });
                }
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
            if ids.is_empty() && i >= 2 {
                ids.push(TypeGraph::root(desc.kind));
            }
            supers.push(ids);
        }

        for desc in &types {
            for (_, kind) in &desc.attributes {
                kind.check_nesting()?;
                let mut names = Vec::new();
                kind.enum_names(&mut names);
                for n in names {
                    if !enum_by_name.contains_key(n) {
                        return Err(TypeError::UnknownEnum(n.to_string()));
                    }
                }
            }
            if let Some((src, trg)) = &desc.connect {
                for end in [src, trg] {
                    match by_name.get(end) {
                        Some(id) if types[id.idx()].kind == ElementKind::Node => {}
                        Some(_) => {
                            return Err(TypeError::WrongKind {
                                ty: end.clone(),
                                expected: "node",
                            })
                        }
                        None => return Err(TypeError::UnknownType(end.clone())),
                    }
                }
            }
        }

        let order = topo_order(&types, &supers)?;

        let n = types.len();
        let mut ancestors: Vec<BTreeSet<TypeId>> = alloc::vec![BTreeSet::new(); n];
        for &t in &order {
            let mut set = BTreeSet::new();
            set.insert(t);
            for s in &supers[t.idx()] {
                set.extend(ancestors[s.idx()].iter().copied());
            }
            ancestors[t.idx()] = set;
        }
        let mut subtypes: Vec<Vec<TypeId>> = alloc::vec![Vec::new(); n];
        for (i, anc) in ancestors.iter().enumerate() {
            for a in anc {
                subtypes[a.idx()].push(TypeId(i as u32));
            }
        }

        let mut attrs = Vec::with_capacity(n);
        for i in 0..n {
            attrs.push(flatten_attributes(&types, &supers, TypeId(i as u32))?);
        }

        Ok(TypeGraph {
            types,
            by_name,
            enums: self.enums,
            enum_by_name,
            ancestors,
            subtypes,
            attrs,
        })
    }
}

fn validate_enum(e: &EnumDescriptor) -> Result<(), TypeError> {
    let invalid = |reason: String| TypeError::InvalidEnum {
        name: e.name.clone(),
        reason,
    };
    if e.items.is_empty() {
        return Err(invalid("an enum needs at least one item".into()));
    }
    let mut names = BTreeSet::new();
    let mut values = BTreeSet::new();
    for (name, value) in &e.items {
        if !names.insert(name) {
            return Err(invalid(format!("item `{name}` declared twice")));
        }
        if !values.insert(value) {
            return Err(invalid(format!("value {value} used twice")));
        }
    }
    Ok(())
}

/// Supertypes before subtypes; reports a cycle by naming one type on it.
fn topo_order(types: &[TypeDescriptor], supers: &[Vec<TypeId>]) -> Result<Vec<TypeId>, TypeError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut marks = alloc::vec![Mark::New; types.len()];
    let mut order = Vec::with_capacity(types.len());
    for start in 0..types.len() {
        if marks[start] != Mark::New {
            continue;
        }
        // iterative DFS: (type, next supertype index)
        let mut stack = alloc::vec![(start, 0usize)];
        marks[start] = Mark::Active;
        while let Some(&mut (t, ref mut next)) = stack.last_mut() {
            if let Some(s) = supers[t].get(*next) {
                *next += 1;
                let s = s.idx();
                match marks[s] {
                    Mark::New => {
                        marks[s] = Mark::Active;
                        stack.push((s, 0));
                    }
                    Mark::Active => return Err(TypeError::InheritanceCycle(types[s].name.clone())),
                    Mark::Done => {}
                }
            } else {
                marks[t] = Mark::Done;
                order.push(TypeId(t as u32));
                stack.pop();
            }
        }
    }
    Ok(order)
}

fn flatten_attributes(
    types: &[TypeDescriptor],
    supers: &[Vec<TypeId>],
    id: TypeId,
) -> Result<Vec<AttrSlot>, TypeError> {
    fn visit(
        types: &[TypeDescriptor],
        supers: &[Vec<TypeId>],
        t: TypeId,
        seen: &mut BTreeSet<TypeId>,
        out: &mut Vec<AttrSlot>,
    ) {
        if !seen.insert(t) {
            return;
        }
        for &s in &supers[t.idx()] {
            visit(types, supers, s, seen, out);
        }
        for (name, kind) in &types[t.idx()].attributes {
            out.push(AttrSlot {
                name: name.clone(),
                kind: kind.clone(),
                declared_in: t,
            });
        }
    }
    let mut out = Vec::new();
    visit(types, supers, id, &mut BTreeSet::new(), &mut out);
    for (i, slot) in out.iter().enumerate() {
        if let Some(prev) = out[..i].iter().find(|p| p.name == slot.name) {
            return Err(TypeError::DuplicateAttribute {
                ty: types[id.idx()].name.clone(),
                attr: slot.name.clone(),
                first: types[prev.declared_in.idx()].name.clone(),
                second: types[slot.declared_in.idx()].name.clone(),
            });
        }
    }
    Ok(out)
}
