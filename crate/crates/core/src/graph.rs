//! The attributed, typed multigraph instance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{GraphError, TypeError};
use crate::types::{ElementKind, TypeGraph, TypeId};
use crate::value::AttributeValue;

/// Graph element identity. Allocated from a per-graph monotone counter and
/// never reused, so it survives retyping and outlives deletion as a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(pub u64);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    Exact,
    WithSubtypes,
}

#[derive(Debug, Clone, PartialEq)]
struct NodeRec {
    ty: TypeId,
    attrs: Vec<AttributeValue>,
    out: BTreeSet<ElementId>,
    inc: BTreeSet<ElementId>,
}

#[derive(Debug, Clone, PartialEq)]
struct EdgeRec {
    ty: TypeId,
    src: ElementId,
    trg: ElementId,
    attrs: Vec<AttributeValue>,
}

#[derive(Debug, Clone)]
pub struct Graph {
    model: Arc<TypeGraph>,
    nodes: BTreeMap<ElementId, NodeRec>,
    edges: BTreeMap<ElementId, EdgeRec>,
    by_type: Vec<BTreeSet<ElementId>>,
    next_id: u64,
}

impl PartialEq for Graph {
    /// Same model, same elements with the same ids, types, endpoints and values.
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Graph {
    pub fn new(model: Arc<TypeGraph>) -> Self {
        let n = model.types().count();
        Graph {
            model,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            by_type: alloc::vec![BTreeSet::new(); n],
            next_id: 1,
        }
    }

    pub fn model(&self) -> &TypeGraph {
        &self.model
    }

    pub fn model_arc(&self) -> &Arc<TypeGraph> {
        &self.model
    }

    fn fresh_id(&mut self) -> ElementId {
        let id = ElementId(self.next_id);
        self.next_id += 1;
        id
    }

    /// Next id the counter will hand out.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    fn default_attrs(&self, ty: TypeId) -> Vec<AttributeValue> {
        self.model
            .attribute_slots(ty)
            .iter()
            .map(|s| AttributeValue::default_for(&s.kind, &self.model))
            .collect()
    }

    fn check_concrete(&self, ty: TypeId) -> Result<(), GraphError> {
        if self.model.descriptor(ty).is_abstract {
            return Err(GraphError::AbstractType(self.model.name(ty).to_string()));
        }
        Ok(())
    }

    pub fn add_node(&mut self, ty: &str) -> Result<ElementId, GraphError> {
        let ty = self.model.resolve_kind(ty, ElementKind::Node)?;
        self.add_node_typed(ty)
    }

    pub fn add_node_typed(&mut self, ty: TypeId) -> Result<ElementId, GraphError> {
        self.check_kind(ty, ElementKind::Node)?;
        self.check_concrete(ty)?;
        let id = self.fresh_id();
        self.insert_node(id, ty);
        Ok(id)
    }

    fn insert_node(&mut self, id: ElementId, ty: TypeId) {
        let attrs = self.default_attrs(ty);
        self.nodes.insert(
            id,
            NodeRec {
                ty,
                attrs,
                out: BTreeSet::new(),
                inc: BTreeSet::new(),
            },
        );
        self.by_type[ty.0 as usize].insert(id);
    }

    pub fn add_edge(&mut self, ty: &str, src: ElementId, trg: ElementId) -> Result<ElementId, GraphError> {
        let ty = self.model.resolve_kind(ty, ElementKind::Edge)?;
        self.add_edge_typed(ty, src, trg)
    }

    pub fn add_edge_typed(&mut self, ty: TypeId, src: ElementId, trg: ElementId) -> Result<ElementId, GraphError> {
        self.check_kind(ty, ElementKind::Edge)?;
        self.check_concrete(ty)?;
        for end in [src, trg] {
            if !self.nodes.contains_key(&end) {
                return Err(GraphError::DeadElement(end));
            }
        }
        let id = self.fresh_id();
        self.insert_edge(id, ty, src, trg);
        Ok(id)
    }

    fn insert_edge(&mut self, id: ElementId, ty: TypeId, src: ElementId, trg: ElementId) {
        let attrs = self.default_attrs(ty);
        self.edges.insert(id, EdgeRec { ty, src, trg, attrs });
        self.by_type[ty.0 as usize].insert(id);
        if let Some(n) = self.nodes.get_mut(&src) {
            n.out.insert(id);
        }
        if let Some(n) = self.nodes.get_mut(&trg) {
            n.inc.insert(id);
        }
    }

    fn check_kind(&self, ty: TypeId, kind: ElementKind) -> Result<(), GraphError> {
        if self.model.kind(ty) != kind {
            return Err(TypeError::WrongKind {
                ty: self.model.name(ty).to_string(),
                expected: kind.as_str(),
            }
            .into());
        }
        Ok(())
    }

    /// Removes `n` and, SPO style, every edge incident to it. Returns the
    /// number of edges removed along with the node.
    pub fn delete_node(&mut self, n: ElementId) -> Result<usize, GraphError> {
        let rec = self.nodes.get(&n).ok_or(GraphError::DeadElement(n))?;
        let incident: BTreeSet<ElementId> = rec.out.union(&rec.inc).copied().collect();
        for e in &incident {
            self.delete_edge(*e)?;
        }
        let rec = self.nodes.remove(&n).ok_or(GraphError::DeadElement(n))?;
        self.by_type[rec.ty.0 as usize].remove(&n);
        Ok(incident.len())
    }

    pub fn delete_edge(&mut self, e: ElementId) -> Result<(), GraphError> {
        let rec = self.edges.remove(&e).ok_or(GraphError::DeadElement(e))?;
        self.by_type[rec.ty.0 as usize].remove(&e);
        if let Some(n) = self.nodes.get_mut(&rec.src) {
            n.out.remove(&e);
        }
        if let Some(n) = self.nodes.get_mut(&rec.trg) {
            n.inc.remove(&e);
        }
        Ok(())
    }

    /// Deletes a node or an edge; returns the count of implicitly removed edges.
    pub fn delete(&mut self, id: ElementId) -> Result<usize, GraphError> {
        if self.nodes.contains_key(&id) {
            self.delete_node(id)
        } else {
            self.delete_edge(id).map(|_| 0)
        }
    }

    pub fn retype_element(&mut self, id: ElementId, ty: &str) -> Result<ElementId, GraphError> {
        let ty = self.model.resolve(ty)?;
        self.retype_typed(id, ty)
    }

    /// Changes the type of `id` in place. Attributes present with equal name
    /// and kind on both types keep their values; the rest start at defaults.
    pub fn retype_typed(&mut self, id: ElementId, ty: TypeId) -> Result<ElementId, GraphError> {
        let kind = self.kind_of(id).ok_or(GraphError::DeadElement(id))?;
        self.check_kind(ty, kind)?;
        self.check_concrete(ty)?;
        let old_ty = self.type_of(id).ok_or(GraphError::DeadElement(id))?;
        let model = Arc::clone(&self.model);
        let old_slots = model.attribute_slots(old_ty);
        let mut attrs = self.default_attrs(ty);
        {
            let old_vals = match kind {
                ElementKind::Node => &self.nodes[&id].attrs,
                ElementKind::Edge => &self.edges[&id].attrs,
            };
            for (slot, new_val) in model.attribute_slots(ty).iter().zip(attrs.iter_mut()) {
                if let Some(i) = old_slots
                    .iter()
                    .position(|o| o.name == slot.name && o.kind == slot.kind)
                {
                    *new_val = old_vals[i].clone();
                }
            }
        }
        match kind {
            ElementKind::Node => {
                let rec = self.nodes.get_mut(&id).ok_or(GraphError::DeadElement(id))?;
                rec.ty = ty;
                rec.attrs = attrs;
            }
            ElementKind::Edge => {
                let rec = self.edges.get_mut(&id).ok_or(GraphError::DeadElement(id))?;
                rec.ty = ty;
                rec.attrs = attrs;
            }
        }
        self.by_type[old_ty.0 as usize].remove(&id);
        self.by_type[ty.0 as usize].insert(id);
        Ok(id)
    }

    /// Moves an edge onto new endpoints without changing its identity.
    pub fn redirect_edge(&mut self, e: ElementId, src: ElementId, trg: ElementId) -> Result<(), GraphError> {
        for end in [src, trg] {
            if !self.nodes.contains_key(&end) {
                return Err(GraphError::DeadElement(end));
            }
        }
        let rec = self.edges.get_mut(&e).ok_or(GraphError::DeadElement(e))?;
        let (old_src, old_trg) = (rec.src, rec.trg);
        rec.src = src;
        rec.trg = trg;
        if let Some(n) = self.nodes.get_mut(&old_src) {
            n.out.remove(&e);
        }
        if let Some(n) = self.nodes.get_mut(&old_trg) {
            n.inc.remove(&e);
        }
        if let Some(n) = self.nodes.get_mut(&src) {
            n.out.insert(e);
        }
        if let Some(n) = self.nodes.get_mut(&trg) {
            n.inc.insert(e);
        }
        Ok(())
    }

    fn attrs_of(&self, id: ElementId) -> Result<(TypeId, &Vec<AttributeValue>), GraphError> {
        if let Some(n) = self.nodes.get(&id) {
            Ok((n.ty, &n.attrs))
        } else if let Some(e) = self.edges.get(&id) {
            Ok((e.ty, &e.attrs))
        } else {
            Err(GraphError::DeadElement(id))
        }
    }

    pub fn get_attr(&self, id: ElementId, name: &str) -> Result<&AttributeValue, GraphError> {
        let (ty, attrs) = self.attrs_of(id)?;
        let idx = self
            .model
            .attribute_index(ty, name)
            .ok_or_else(|| GraphError::UnknownAttribute {
                ty: self.model.name(ty).to_string(),
                attr: name.to_string(),
            })?;
        Ok(&attrs[idx])
    }

    pub fn set_attr(&mut self, id: ElementId, name: &str, value: AttributeValue) -> Result<(), GraphError> {
        let ty = self.type_of(id).ok_or(GraphError::DeadElement(id))?;
        let idx = self
            .model
            .attribute_index(ty, name)
            .ok_or_else(|| GraphError::UnknownAttribute {
                ty: self.model.name(ty).to_string(),
                attr: name.to_string(),
            })?;
        let kind = &self.model.attribute_slots(ty)[idx].kind;
        if !value.conforms(kind) {
            return Err(GraphError::AttrKindMismatch {
                attr: name.to_string(),
                expected: kind.to_string(),
                found: value.kind_name(),
            });
        }
        let value = value.normalized();
        let slot = if let Some(n) = self.nodes.get_mut(&id) {
            &mut n.attrs[idx]
        } else if let Some(e) = self.edges.get_mut(&id) {
            &mut e.attrs[idx]
        } else {
            return Err(GraphError::DeadElement(id));
        };
        *slot = value;
        Ok(())
    }

    /// Attribute values in the type's flattened slot order.
    pub fn attributes(&self, id: ElementId) -> Result<&[AttributeValue], GraphError> {
        self.attrs_of(id).map(|(_, a)| a.as_slice())
    }

    pub fn count_elements(&self, ty: &str, mode: CountMode) -> Result<usize, GraphError> {
        let ty = self.model.resolve(ty)?;
        Ok(match mode {
            CountMode::Exact => self.by_type[ty.0 as usize].len(),
            CountMode::WithSubtypes => self
                .model
                .subtypes_of(ty)
                .iter()
                .map(|t| self.by_type[t.0 as usize].len())
                .sum(),
        })
    }

    pub fn is_live(&self, id: ElementId) -> bool {
        self.nodes.contains_key(&id) || self.edges.contains_key(&id)
    }

    pub fn kind_of(&self, id: ElementId) -> Option<ElementKind> {
        if self.nodes.contains_key(&id) {
            Some(ElementKind::Node)
        } else if self.edges.contains_key(&id) {
            Some(ElementKind::Edge)
        } else {
            None
        }
    }

    pub fn type_of(&self, id: ElementId) -> Option<TypeId> {
        self.nodes
            .get(&id)
            .map(|n| n.ty)
            .or_else(|| self.edges.get(&id).map(|e| e.ty))
    }

    pub fn type_name(&self, id: ElementId) -> Option<&str> {
        self.type_of(id).map(|t| self.model.name(t))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Live nodes, ascending id.
    pub fn nodes(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.nodes.keys().copied()
    }

    /// Live edges, ascending id.
    pub fn edges(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.edges.keys().copied()
    }

    pub fn endpoints(&self, e: ElementId) -> Option<(ElementId, ElementId)> {
        self.edges.get(&e).map(|r| (r.src, r.trg))
    }

    pub fn outgoing(&self, n: ElementId) -> impl Iterator<Item = ElementId> + '_ {
        self.nodes.get(&n).into_iter().flat_map(|r| r.out.iter().copied())
    }

    pub fn incoming(&self, n: ElementId) -> impl Iterator<Item = ElementId> + '_ {
        self.nodes.get(&n).into_iter().flat_map(|r| r.inc.iter().copied())
    }

    /// Elements whose type is `ty` or (optionally) one of its subtypes, ascending.
    pub fn elements_of_type(&self, ty: TypeId, with_subtypes: bool) -> Vec<ElementId> {
        if !with_subtypes {
            return self.by_type[ty.0 as usize].iter().copied().collect();
        }
        let subs = self.model.subtypes_of(ty);
        let populated: Vec<&BTreeSet<ElementId>> = subs
            .iter()
            .map(|t| &self.by_type[t.0 as usize])
            .filter(|s| !s.is_empty())
            .collect();
        match populated.as_slice() {
            [] => Vec::new(),
            [one] => one.iter().copied().collect(),
            many => {
                let mut all: Vec<ElementId> = many.iter().flat_map(|s| s.iter().copied()).collect();
                all.sort_unstable();
                all
            }
        }
    }

    /// Recreates an element under a given id. Used by loaders that must keep
    /// ids stable; the counter moves past `id`.
    pub fn restore_node(&mut self, id: ElementId, ty: TypeId) -> Result<(), GraphError> {
        self.check_kind(ty, ElementKind::Node)?;
        if self.is_live(id) || id.0 == 0 {
            return Err(GraphError::Format {
                line: 0,
                message: alloc::format!("element id {id} already in use"),
            });
        }
        self.insert_node(id, ty);
        self.next_id = self.next_id.max(id.0 + 1);
        Ok(())
    }

    pub fn restore_edge(&mut self, id: ElementId, ty: TypeId, src: ElementId, trg: ElementId) -> Result<(), GraphError> {
        self.check_kind(ty, ElementKind::Edge)?;
        if self.is_live(id) || id.0 == 0 {
            return Err(GraphError::Format {
                line: 0,
                message: alloc::format!("element id {id} already in use"),
            });
        }
        for end in [src, trg] {
            if !self.nodes.contains_key(&end) {
                return Err(GraphError::DeadElement(end));
            }
        }
        self.insert_edge(id, ty, src, trg);
        self.next_id = self.next_id.max(id.0 + 1);
        Ok(())
    }

    /// Checks the store's structural invariants; used by tests after rewrites.
    pub fn check_consistency(&self) -> Result<(), &'static str> {
        for (id, e) in &self.edges {
            let (Some(s), Some(t)) = (self.nodes.get(&e.src), self.nodes.get(&e.trg)) else {
                return Err("edge endpoint is not a live node");
            };
            if !s.out.contains(id) || !t.inc.contains(id) {
                return Err("incidence index out of sync");
            }
        }
        for n in self.nodes.values() {
            if n.out.iter().chain(n.inc.iter()).any(|e| !self.edges.contains_key(e)) {
                return Err("incidence refers to dead edge");
            }
        }
        let indexed: usize = self.by_type.iter().map(BTreeSet::len).sum();
        if indexed != self.nodes.len() + self.edges.len() {
            return Err("type index out of sync");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use alloc::string::String;

    fn graph(src: &str) -> Graph {
        Graph::new(Arc::new(parse_model(src).unwrap()))
    }

    #[test]
    fn add_nodes_and_edges() {
        let mut g = graph("");
        let a = g.add_node("Node").unwrap();
        let b = g.add_node("Node").unwrap();
        assert_ne!(a, b);
        assert_eq!(g.node_count(), 2);
        assert!(matches!(g.add_node("NoSuchType"), Err(GraphError::Type(TypeError::UnknownType(_)))));
        assert!(g.add_node("Edge").is_err());

        let loop_e = g.add_edge("Edge", a, a).unwrap();
        assert_eq!(g.endpoints(loop_e), Some((a, a)));
        let p1 = g.add_edge("Edge", a, b).unwrap();
        let p2 = g.add_edge("Edge", a, b).unwrap();
        assert_ne!(p1, p2);
        assert_eq!(g.outgoing(a).count(), 3);
        assert_eq!(g.delete_node(b).unwrap(), 2);
        assert_eq!(g.add_edge("Edge", a, b), Err(GraphError::DeadElement(b)));
    }

    #[test]
    fn delete_counts_incident_edges() {
        let mut g = graph("");
        let n = g.add_node("Node").unwrap();
        assert_eq!(g.delete_node(n).unwrap(), 0);
        let n = g.add_node("Node").unwrap();
        g.add_edge("Edge", n, n).unwrap();
        assert_eq!(g.delete_node(n).unwrap(), 1);
        assert_eq!(g.delete_node(n), Err(GraphError::DeadElement(n)));
        g.check_consistency().unwrap();
    }

    #[test]
    fn ids_are_not_recycled() {
        let mut g = graph("");
        let a = g.add_node("Node").unwrap();
        g.delete_node(a).unwrap();
        let b = g.add_node("Node").unwrap();
        assert!(b > a);
        assert!(g.get_attr(a, "x").is_err());
    }

    #[test]
    fn retype_keeps_shared_attributes() {
        let mut g = graph("node class A { x:int; } node class B extends A { y:string; } node class C { z:boolean; }");
        let n = g.add_node("A").unwrap();
        g.set_attr(n, "x", AttributeValue::Int(5)).unwrap();
        let m = g.add_node("A").unwrap();
        let e = g.add_edge("Edge", n, m).unwrap();
        assert_eq!(g.retype_element(n, "B").unwrap(), n);
        assert_eq!(g.get_attr(n, "x").unwrap(), &AttributeValue::Int(5));
        assert_eq!(g.get_attr(n, "y").unwrap(), &AttributeValue::String(String::new()));
        assert_eq!(g.outgoing(n).collect::<Vec<_>>(), [e]);

        g.retype_element(n, "C").unwrap();
        assert!(g.get_attr(n, "x").is_err());
        assert_eq!(g.get_attr(n, "z").unwrap(), &AttributeValue::Boolean(false));
        assert!(g.retype_element(n, "Edge").is_err());
        assert!(g.retype_element(e, "Node").is_err());
        assert_eq!(g.count_elements("A", CountMode::WithSubtypes).unwrap(), 1);
        g.check_consistency().unwrap();
    }

    #[test]
    fn attribute_access() {
        let mut g = graph("node class A { x:int; s:string; }");
        let n = g.add_node("A").unwrap();
        assert_eq!(g.get_attr(n, "x").unwrap(), &AttributeValue::Int(0));
        g.set_attr(n, "s", AttributeValue::String("héllo \"w\"".into())).unwrap();
        assert_eq!(g.get_attr(n, "s").unwrap().as_str(), Some("héllo \"w\""));
        assert!(matches!(
            g.set_attr(n, "x", AttributeValue::String("1".into())),
            Err(GraphError::AttrKindMismatch { .. })
        ));
        assert!(matches!(g.get_attr(n, "nope"), Err(GraphError::UnknownAttribute { .. })));
    }

    #[test]
    fn counting_with_and_without_subtypes() {
        let mut g = graph("node class A; node class B extends A;");
        assert_eq!(g.count_elements("A", CountMode::WithSubtypes).unwrap(), 0);
        for _ in 0..3 {
            g.add_node("A").unwrap();
        }
        for _ in 0..2 {
            g.add_node("B").unwrap();
        }
        assert_eq!(g.count_elements("A", CountMode::WithSubtypes).unwrap(), 5);
        assert_eq!(g.count_elements("A", CountMode::Exact).unwrap(), 3);
        assert_eq!(g.count_elements("Node", CountMode::WithSubtypes).unwrap(), 5);
        assert!(g.count_elements("Z", CountMode::Exact).is_err());
    }

    #[test]
    fn abstract_types_cannot_be_instantiated() {
        let mut g = graph("abstract node class A; node class B extends A;");
        assert!(matches!(g.add_node("A"), Err(GraphError::AbstractType(_))));
        let b = g.add_node("B").unwrap();
        assert!(g.retype_element(b, "A").is_err());
    }
}
