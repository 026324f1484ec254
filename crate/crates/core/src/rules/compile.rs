//! Resolution of rule syntax against a type graph: slots, search plans,
//! rewrite programs and diagnostics.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::ast::*;
use super::diag::{DiagCode, Diagnostic, RuleError, Severity, SourceMap};
use super::parser::{parse_rule_file, IncludeResolver};
use crate::error::Location;
use crate::expr::Term;
use crate::types::{AttrKind, ElementKind, TypeGraph, TypeId};
use crate::value::AttributeValue;

/// A variable inside a compiled rule: an element slot or a scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    Slot(usize),
    Scalar(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamKind {
    Element(ElementKind, TypeId),
    Scalar(AttrKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
    /// Element slot for element parameters; index into the scalar table otherwise.
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotOrigin {
    Param,
    Pattern,
    Created,
    /// Same element as the source slot, under a new type.
    Retyped(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub name: String,
    pub kind: ElementKind,
    pub ty: TypeId,
    pub pattern: usize,
    pub origin: SlotOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternKind {
    Top,
    Negative,
    Independent,
    Iterated,
    Multiple,
    Case(String),
}

/// An edge constraint `src -edge-> trg` over slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternEdge {
    pub edge: usize,
    pub src: usize,
    pub trg: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Enumerate candidates of a node slot by type.
    Node(usize),
    /// Enumerate outgoing edges of the bound source of `edges[i]`.
    Out(usize),
    /// Enumerate incoming edges of the bound target of `edges[i]`.
    In(usize),
    /// The edge slot of `edges[i]` is bound; bind or check its endpoints.
    Bound(usize),
    /// Evaluate condition `conds[i]`.
    Cond(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub kind: PatternKind,
    pub parent: Option<usize>,
    /// Slots declared by this pattern, in declaration order. For the top
    /// pattern the element parameters come first.
    pub locals: Vec<usize>,
    pub edges: Vec<PatternEdge>,
    pub conds: Vec<Term<Var>>,
    pub plan: Vec<Step>,
    pub negatives: Vec<usize>,
    pub independents: Vec<usize>,
    pub alternatives: Vec<Vec<usize>>,
    pub iterateds: Vec<usize>,
    pub rewrite: Option<Rewrite>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retype {
    pub target: usize,
    pub source: usize,
    pub ty: TypeId,
    /// New endpoints for a retyped edge, when written.
    pub ends: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eval {
    pub slot: usize,
    pub attr: String,
    pub value: Term<Var>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rewrite {
    pub mode: RewriteMode,
    pub create_nodes: Vec<usize>,
    pub create_edges: Vec<PatternEdge>,
    pub retypes: Vec<Retype>,
    pub evals: Vec<Eval>,
    pub emits: Vec<Vec<Term<Var>>>,
    pub returns: Vec<Term<Var>>,
    /// Explicit deletions plus, in replace mode, every unreferenced local.
    pub deletes: Vec<usize>,
    /// Pattern slots kept in place (replace mode bookkeeping).
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutKind {
    Element(ElementKind, TypeId),
    Scalar(AttrKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledRule {
    pub name: String,
    pub params: Vec<Param>,
    pub outputs: Vec<OutKind>,
    pub slots: Vec<Slot>,
    pub patterns: Vec<Pattern>,
    /// Unordered pairs of slots allowed to bind the same element.
    pub hom: BTreeSet<(usize, usize)>,
    pub diagnostics: Vec<Diagnostic>,
    pub ast: RuleAst,
}

impl CompiledRule {
    /// True when no error diagnostic was recorded; only such rules execute.
    pub fn is_well_formed(&self) -> bool {
        self.diagnostics.iter().all(|d| d.severity != Severity::Error)
    }

    pub fn scalar_count(&self) -> usize {
        self.params.iter().filter(|p| matches!(p.kind, ParamKind::Scalar(_))).count()
    }

    pub fn is_hom(&self, a: usize, b: usize) -> bool {
        self.hom.contains(&(a.min(b), a.max(b)))
    }

    /// Slots bound on entry to pattern `p`: parameters and all ancestor locals.
    pub fn entry_bound(&self, p: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut cur = self.patterns[p].parent;
        while let Some(q) = cur {
            out.extend(self.patterns[q].locals.iter().copied());
            cur = self.patterns[q].parent;
        }
        if p == 0 {
            for prm in &self.params {
                if let ParamKind::Element(..) = prm.kind {
                    out.insert(prm.index);
                }
            }
        }
        out
    }
}

/// Compiled rules over one model.
#[derive(Debug, Clone)]
pub struct RuleSet {
    model: Arc<TypeGraph>,
    models: Vec<String>,
    rules: Vec<CompiledRule>,
    by_name: BTreeMap<String, usize>,
}

impl RuleSet {
    /// Parses, splices includes and resolves in one go.
    pub fn parse(
        src: &str,
        file: &str,
        includes: &dyn IncludeResolver,
        model: Arc<TypeGraph>,
    ) -> Result<RuleSet, RuleError> {
        let (ast, map) = parse_rule_file(src, file, includes)?;
        RuleSet::new(&ast, &map, model)
    }

    /// Resolves a parsed file. Fails on unresolvable names, duplicates and
    /// arity errors; kind and mode problems are kept per rule and reported
    /// by [`RuleSet::check_rule`].
    pub fn new(file: &RuleFile, map: &SourceMap, model: Arc<TypeGraph>) -> Result<RuleSet, RuleError> {
        let mut rules = Vec::new();
        let mut by_name = BTreeMap::new();
        let mut fatal = Vec::new();
        for ast in &file.rules {
            if by_name.contains_key(&ast.name) {
                fatal.push(Diagnostic {
                    severity: Severity::Error,
                    code: DiagCode::Duplicate,
                    loc: map.resolve(ast.loc),
                    rule: Some(ast.name.clone()),
                    message: format!("rule `{}` is defined twice", ast.name),
                });
                continue;
            }
            let rule = Compiler::new(&model, map, ast).run();
            fatal.extend(rule.diagnostics.iter().filter(|d| is_fatal(d)).cloned());
            by_name.insert(ast.name.clone(), rules.len());
            rules.push(rule);
        }
        if !fatal.is_empty() {
            return Err(RuleError { diagnostics: fatal });
        }
        Ok(RuleSet {
            model,
            models: file.models.clone(),
            rules,
            by_name,
        })
    }

    pub fn model(&self) -> &Arc<TypeGraph> {
        &self.model
    }

    /// Model names from `using` declarations.
    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn rule(&self, name: &str) -> Option<&CompiledRule> {
        self.by_name.get(name).map(|&i| &self.rules[i])
    }

    pub fn rules(&self) -> impl Iterator<Item = &CompiledRule> {
        self.rules.iter()
    }

    /// Diagnostics of one rule; empty iff the rule is well formed.
    pub fn check_rule(&self, name: &str) -> Option<&[Diagnostic]> {
        self.rule(name).map(|r| r.diagnostics.as_slice())
    }

    /// All retained diagnostics, in rule order.
    pub fn diagnostics(&self) -> impl Iterator<Item = &Diagnostic> {
        self.rules.iter().flat_map(|r| r.diagnostics.iter())
    }
}

fn is_fatal(d: &Diagnostic) -> bool {
    d.severity == Severity::Error && !matches!(d.code, DiagCode::KindMismatch | DiagCode::Mode)
}

/// Static kind of an expression.
#[derive(Debug, Clone, PartialEq)]
enum Sk {
    Scalar(AttrKind),
    Element(ElementKind, TypeId),
    /// An error was already reported.
    Unknown,
}

struct Compiler<'a> {
    tg: &'a TypeGraph,
    map: &'a SourceMap,
    ast: &'a RuleAst,
    params: Vec<Param>,
    scalar_kinds: Vec<AttrKind>,
    outputs: Vec<OutKind>,
    slots: Vec<Slot>,
    patterns: Vec<Pattern>,
    hom: BTreeSet<(usize, usize)>,
    diags: Vec<Diagnostic>,
    scope: Vec<(String, Var)>,
    anon: usize,
}

impl<'a> Compiler<'a> {
    fn new(tg: &'a TypeGraph, map: &'a SourceMap, ast: &'a RuleAst) -> Self {
        Compiler {
            tg,
            map,
            ast,
            params: Vec::new(),
            scalar_kinds: Vec::new(),
            outputs: Vec::new(),
            slots: Vec::new(),
            patterns: Vec::new(),
            hom: BTreeSet::new(),
            diags: Vec::new(),
            scope: Vec::new(),
            anon: 0,
        }
    }

    fn diag(&mut self, code: DiagCode, loc: Location, message: String) {
        self.diags.push(Diagnostic {
            severity: Severity::Error,
            code,
            loc: self.map.resolve(loc),
            rule: Some(self.ast.name.clone()),
            message,
        });
    }

    fn run(mut self) -> CompiledRule {
        let ast = self.ast;
        self.patterns.push(Pattern {
            kind: PatternKind::Top,
            parent: None,
            locals: Vec::new(),
            edges: Vec::new(),
            conds: Vec::new(),
            plan: Vec::new(),
            negatives: Vec::new(),
            independents: Vec::new(),
            alternatives: Vec::new(),
            iterateds: Vec::new(),
            rewrite: None,
        });
        for p in &ast.params {
            self.param(p);
        }
        for o in &ast.outputs {
            let kind = if let Some(ty) = self.tg.lookup(o) {
                Some(OutKind::Element(self.tg.kind(ty), ty))
            } else {
                self.scalar_kind(o).map(OutKind::Scalar)
            };
            match kind {
                Some(k) => self.outputs.push(k),
                None => self.diag(DiagCode::UnknownType, ast.loc, format!("unknown output type `{o}`")),
            }
        }
        self.pattern_body(0, &ast.pattern);
        if !ast.outputs.is_empty() {
            let has_return = ast.pattern.rewrite.as_ref().is_some_and(|rw| {
                rw.stmts.iter().any(|s| matches!(s, RewriteStmt::Return(..)))
            });
            if !has_return {
                self.diag(
                    DiagCode::Arity,
                    ast.loc,
                    format!("rule declares {} outputs but returns nothing", ast.outputs.len()),
                );
            }
        }
        CompiledRule {
            name: ast.name.clone(),
            params: self.params,
            outputs: self.outputs,
            slots: self.slots,
            patterns: self.patterns,
            hom: self.hom,
            diagnostics: self.diags,
            ast: ast.clone(),
        }
    }

    fn scalar_kind(&self, name: &str) -> Option<AttrKind> {
        Some(match name {
            "int" => AttrKind::Int,
            "float" | "double" => AttrKind::Float,
            "boolean" => AttrKind::Boolean,
            "string" => AttrKind::String,
            other if self.tg.enum_type(other).is_some() => AttrKind::Enum(other.to_string()),
            _ => return None,
        })
    }

    fn param(&mut self, p: &ParamAst) {
        if self.lookup(&p.name).is_some() {
            self.diag(DiagCode::Duplicate, p.loc, format!("parameter `{}` declared twice", p.name));
            return;
        }
        let want = if p.is_edge { ElementKind::Edge } else { ElementKind::Node };
        match self.tg.lookup(&p.ty) {
            Some(ty) if self.tg.kind(ty) == want => {
                let slot = self.new_slot(p.name.clone(), want, ty, 0, SlotOrigin::Param);
                self.patterns[0].locals.push(slot);
                self.params.push(Param {
                    name: p.name.clone(),
                    kind: ParamKind::Element(want, ty),
                    index: slot,
                });
                self.scope.push((p.name.clone(), Var::Slot(slot)));
            }
            Some(_) => self.diag(
                DiagCode::UnknownType,
                p.loc,
                format!("`{}` is not a {} type", p.ty, want.as_str().to_ascii_lowercase()),
            ),
            None => match self.scalar_kind(&p.ty).filter(|_| !p.is_edge) {
                Some(kind) => {
                    let index = self.scalar_kinds.len();
                    self.scalar_kinds.push(kind.clone());
                    self.params.push(Param {
                        name: p.name.clone(),
                        kind: ParamKind::Scalar(kind),
                        index,
                    });
                    self.scope.push((p.name.clone(), Var::Scalar(index)));
                }
                None => self.diag(DiagCode::UnknownType, p.loc, format!("unknown type `{}`", p.ty)),
            },
        }
    }

    fn new_slot(&mut self, name: String, kind: ElementKind, ty: TypeId, pattern: usize, origin: SlotOrigin) -> usize {
        self.slots.push(Slot {
            name,
            kind,
            ty,
            pattern,
            origin,
        });
        self.slots.len() - 1
    }

    fn lookup(&self, name: &str) -> Option<Var> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn anon_name(&mut self, kind: ElementKind) -> String {
        self.anon += 1;
        match kind {
            ElementKind::Node => format!("_node{}", self.anon),
            ElementKind::Edge => format!("_edge{}", self.anon),
        }
    }

    fn resolve_type(&mut self, name: &str, kind: ElementKind, loc: Location) -> Option<TypeId> {
        match self.tg.lookup(name) {
            Some(ty) if self.tg.kind(ty) == kind => Some(ty),
            Some(_) => {
                self.diag(
                    DiagCode::UnknownType,
                    loc,
                    format!("`{name}` is not a {} type", kind.as_str().to_ascii_lowercase()),
                );
                None
            }
            None => {
                self.diag(DiagCode::UnknownType, loc, format!("unknown type `{name}`"));
                None
            }
        }
    }

    /// Looks up a visible element of the given kind.
    fn element_ref(&mut self, name: &str, kind: ElementKind, loc: Location) -> Option<usize> {
        match self.lookup(name) {
            Some(Var::Slot(s)) if self.slots[s].kind == kind => Some(s),
            Some(_) => {
                self.diag(
                    DiagCode::KindMismatch,
                    loc,
                    format!("`{name}` is not a {}", kind.as_str().to_ascii_lowercase()),
                );
                None
            }
            None => {
                self.diag(DiagCode::Undeclared, loc, format!("undeclared identifier `{name}`"));
                None
            }
        }
    }

    /// Declares a named or anonymous element in pattern `pat`.
    fn declare(
        &mut self,
        name: Option<&String>,
        ty: TypeId,
        kind: ElementKind,
        pat: usize,
        origin: SlotOrigin,
        loc: Location,
    ) -> usize {
        let name = match name {
            Some(n) => {
                if self.lookup(n).is_some() {
                    self.diag(DiagCode::Duplicate, loc, format!("`{n}` is already declared"));
                }
                n.clone()
            }
            None => self.anon_name(kind),
        };
        let slot = self.new_slot(name.clone(), kind, ty, pat, origin);
        self.scope.push((name, Var::Slot(slot)));
        slot
    }

    /// Resolves a node spec inside a pattern; returns its slot.
    fn pattern_node(&mut self, pat: usize, spec: Option<&NodeSpec>) -> Option<usize> {
        let Some(spec) = spec else {
            let slot = self.declare(None, TypeId::NODE, ElementKind::Node, pat, SlotOrigin::Pattern, Location::default());
            self.patterns[pat].locals.push(slot);
            return Some(slot);
        };
        if spec.retype_from.is_some() {
            self.diag(DiagCode::Retype, spec.loc, "retyping is only allowed in rewrite parts".into());
            return None;
        }
        match (&spec.name, &spec.ty) {
            (Some(name), None) => self.element_ref(name, ElementKind::Node, spec.loc),
            (name, Some(ty)) => {
                let ty = self.resolve_type(ty, ElementKind::Node, spec.loc)?;
                let slot = self.declare(name.as_ref(), ty, ElementKind::Node, pat, SlotOrigin::Pattern, spec.loc);
                self.patterns[pat].locals.push(slot);
                Some(slot)
            }
            (None, None) => None,
        }
    }

    fn pattern_graphlet(&mut self, pat: usize, g: &Graphlet) {
        match g {
            Graphlet::Node(spec) => {
                self.pattern_node(pat, Some(spec));
            }
            Graphlet::Edge { src, edge, trg, .. } => {
                let s = self.pattern_node(pat, src.as_ref());
                let t = self.pattern_node(pat, trg.as_ref());
                if edge.retype_from.is_some() {
                    self.diag(DiagCode::Retype, edge.loc, "retyping is only allowed in rewrite parts".into());
                    return;
                }
                let e = match (&edge.name, &edge.ty) {
                    (Some(name), None) => self.element_ref(name, ElementKind::Edge, edge.loc),
                    (name, ty) => {
                        let ty = match ty {
                            Some(ty) => self.resolve_type(ty, ElementKind::Edge, edge.loc),
                            None => Some(TypeId::EDGE),
                        };
                        ty.map(|ty| {
                            let slot =
                                self.declare(name.as_ref(), ty, ElementKind::Edge, pat, SlotOrigin::Pattern, edge.loc);
                            self.patterns[pat].locals.push(slot);
                            slot
                        })
                    }
                };
                if let (Some(edge), Some(src), Some(trg)) = (e, s, t) {
                    self.patterns[pat].edges.push(PatternEdge { edge, src, trg });
                }
            }
        }
    }

    fn in_condition(&self, mut pat: usize) -> bool {
        loop {
            if matches!(self.patterns[pat].kind, PatternKind::Negative | PatternKind::Independent) {
                return true;
            }
            match self.patterns[pat].parent {
                Some(p) => pat = p,
                None => return false,
            }
        }
    }

    fn new_pattern(&mut self, kind: PatternKind, parent: usize) -> usize {
        self.patterns.push(Pattern {
            kind,
            parent: Some(parent),
            locals: Vec::new(),
            edges: Vec::new(),
            conds: Vec::new(),
            plan: Vec::new(),
            negatives: Vec::new(),
            independents: Vec::new(),
            alternatives: Vec::new(),
            iterateds: Vec::new(),
            rewrite: None,
        });
        self.patterns.len() - 1
    }

    fn pattern_body(&mut self, pat: usize, ast: &PatternAst) {
        let mark = self.scope.len();
        for stmt in &ast.stmts {
            if let PatternStmt::Graphlet(g) = stmt {
                self.pattern_graphlet(pat, g);
            }
        }
        for stmt in &ast.stmts {
            match stmt {
                PatternStmt::Hom(names, loc) => self.hom_group(names, *loc),
                PatternStmt::If(conds) => {
                    for c in conds {
                        let (term, kind) = self.expr(c);
                        if !matches!(kind, Sk::Scalar(AttrKind::Boolean) | Sk::Unknown) {
                            self.diag(DiagCode::KindMismatch, c.loc, "condition is not boolean".into());
                        }
                        self.patterns[pat].conds.push(term);
                    }
                }
                _ => {}
            }
        }
        self.patterns[pat].plan = self.plan(pat);
        let conditional = self.in_condition(pat);
        for stmt in &ast.stmts {
            match stmt {
                PatternStmt::Nested(kind, body) => {
                    let pk = match kind {
                        NestedKind::Negative => PatternKind::Negative,
                        NestedKind::Independent => PatternKind::Independent,
                        NestedKind::Iterated => PatternKind::Iterated,
                        NestedKind::Multiple => PatternKind::Multiple,
                    };
                    if conditional {
                        self.diag(
                            DiagCode::Nesting,
                            body.loc,
                            format!(
                                "`{}` is not allowed inside a negative or independent pattern",
                                kind.keyword()
                            ),
                        );
                        continue;
                    }
                    let child = self.new_pattern(pk.clone(), pat);
                    self.pattern_body(child, body);
                    let p = &mut self.patterns[pat];
                    match pk {
                        PatternKind::Negative => p.negatives.push(child),
                        PatternKind::Independent => p.independents.push(child),
                        _ => p.iterateds.push(child),
                    }
                }
                PatternStmt::Alternative(cases, loc) => {
                    if conditional {
                        self.diag(
                            DiagCode::Nesting,
                            *loc,
                            "`alternative` is not allowed inside a negative or independent pattern".into(),
                        );
                        continue;
                    }
                    let mut ids = Vec::new();
                    let mut names = BTreeSet::new();
                    for (name, body) in cases {
                        if !names.insert(name.clone()) {
                            self.diag(DiagCode::Duplicate, body.loc, format!("case `{name}` appears twice"));
                        }
                        let child = self.new_pattern(PatternKind::Case(name.clone()), pat);
                        self.pattern_body(child, body);
                        ids.push(child);
                    }
                    self.patterns[pat].alternatives.push(ids);
                }
                _ => {}
            }
        }
        if let Some(rw) = &ast.rewrite {
            if conditional {
                self.diag(
                    DiagCode::Nesting,
                    rw.loc,
                    "negative and independent patterns cannot rewrite".into(),
                );
            } else {
                let r = self.rewrite(pat, rw);
                self.patterns[pat].rewrite = Some(r);
            }
        }
        self.scope.truncate(mark);
    }

    fn hom_group(&mut self, names: &[String], loc: Location) {
        let mut slots = Vec::new();
        for n in names {
            match self.lookup(n) {
                Some(Var::Slot(s)) => slots.push(s),
                Some(Var::Scalar(_)) => {
                    self.diag(DiagCode::KindMismatch, loc, format!("`{n}` is not a graph element"))
                }
                None => self.diag(DiagCode::Undeclared, loc, format!("undeclared identifier `{n}`")),
            }
        }
        for (i, &a) in slots.iter().enumerate() {
            for &b in &slots[i + 1..] {
                if self.slots[a].kind != self.slots[b].kind {
                    self.diag(
                        DiagCode::KindMismatch,
                        loc,
                        format!("hom mixes node and edge: `{}`, `{}`", self.slots[a].name, self.slots[b].name),
                    );
                    continue;
                }
                if a != b {
                    self.hom.insert((a.min(b), a.max(b)));
                }
            }
        }
    }

    /// Static search plan: bound edges, then edges reachable from bound
    /// nodes, then the next unbound node in declaration order.
    fn plan(&self, pat: usize) -> Vec<Step> {
        let p = &self.patterns[pat];
        let mut bound = self.entry_bound(pat);
        let mut plan = Vec::new();
        let mut edges_left: Vec<usize> = (0..p.edges.len()).collect();
        let mut conds_left: Vec<usize> = (0..p.conds.len()).collect();
        let ready = |bound: &BTreeSet<usize>, conds_left: &mut Vec<usize>, plan: &mut Vec<Step>| {
            conds_left.retain(|&c| {
                let mut vars = Vec::new();
                p.conds[c].vars(&mut vars);
                let ok = vars.iter().all(|v| match v {
                    Var::Slot(s) => bound.contains(s),
                    Var::Scalar(_) => true,
                });
                if ok {
                    plan.push(Step::Cond(c));
                }
                !ok
            });
        };
        ready(&bound, &mut conds_left, &mut plan);
        loop {
            let pick = edges_left
                .iter()
                .position(|&i| bound.contains(&p.edges[i].edge))
                .map(|k| (k, Step::Bound(edges_left[k])))
                .or_else(|| {
                    edges_left
                        .iter()
                        .position(|&i| bound.contains(&p.edges[i].src) && bound.contains(&p.edges[i].trg))
                        .map(|k| (k, Step::Out(edges_left[k])))
                })
                .or_else(|| {
                    edges_left.iter().enumerate().find_map(|(k, &i)| {
                        if bound.contains(&p.edges[i].src) {
                            Some((k, Step::Out(i)))
                        } else if bound.contains(&p.edges[i].trg) {
                            Some((k, Step::In(i)))
                        } else {
                            None
                        }
                    })
                });
            match pick {
                Some((k, step)) => {
                    let e = p.edges[edges_left.remove(k)];
                    bound.extend([e.edge, e.src, e.trg]);
                    plan.push(step);
                }
                None => {
                    let next = p
                        .locals
                        .iter()
                        .copied()
                        .find(|s| !bound.contains(s) && self.slots[*s].kind == ElementKind::Node);
                    match next {
                        Some(s) => {
                            bound.insert(s);
                            plan.push(Step::Node(s));
                        }
                        None => break,
                    }
                }
            }
            ready(&bound, &mut conds_left, &mut plan);
        }
        // conditions over names that never get bound cannot happen after resolution
        plan
    }

    fn entry_bound(&self, pat: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut cur = self.patterns[pat].parent;
        while let Some(q) = cur {
            out.extend(self.patterns[q].locals.iter().copied());
            cur = self.patterns[q].parent;
        }
        if pat == 0 {
            out.extend(self.patterns[0].locals.iter().copied().filter(|&s| self.slots[s].origin == SlotOrigin::Param));
        }
        out
    }

    /// Slot of the original pattern element a rewrite name stands for.
    fn origin(&self, mut slot: usize) -> usize {
        while let SlotOrigin::Retyped(src) = self.slots[slot].origin {
            slot = src;
        }
        slot
    }

    fn rewrite(&mut self, pat: usize, rw: &RewriteAst) -> Rewrite {
        let mark = self.scope.len();
        let mut out = Rewrite {
            mode: rw.mode,
            create_nodes: Vec::new(),
            create_edges: Vec::new(),
            retypes: Vec::new(),
            evals: Vec::new(),
            emits: Vec::new(),
            returns: Vec::new(),
            deletes: Vec::new(),
            kept: Vec::new(),
        };
        let mut referenced = BTreeSet::new();
        let mut retyped = BTreeSet::new();
        // structure first, so evals may name elements declared further down
        for stmt in &rw.stmts {
            if let RewriteStmt::Graphlet(g) = stmt {
                self.rewrite_graphlet(pat, g, &mut out, &mut referenced, &mut retyped);
            }
        }
        for stmt in &rw.stmts {
            match stmt {
                RewriteStmt::Graphlet(_) => {}
                RewriteStmt::Delete(names, loc) => {
                    if rw.mode == RewriteMode::Replace {
                        self.diag(
                            DiagCode::Mode,
                            *loc,
                            "`delete` is only allowed in modify mode; replace deletes what it does not mention".into(),
                        );
                    }
                    for n in names {
                        match self.lookup(n) {
                            Some(Var::Slot(s)) if matches!(self.slots[s].origin, SlotOrigin::Pattern | SlotOrigin::Param) => {
                                if !out.deletes.contains(&s) {
                                    out.deletes.push(s);
                                }
                            }
                            Some(_) => self.diag(
                                DiagCode::Mode,
                                *loc,
                                format!("`{n}` is not a matched element and cannot be deleted"),
                            ),
                            None => self.diag(DiagCode::Undeclared, *loc, format!("undeclared identifier `{n}`")),
                        }
                    }
                }
                RewriteStmt::Eval(assigns) => {
                    for a in assigns {
                        self.assignment(a, &mut out);
                    }
                }
                RewriteStmt::Emit(args, _) => {
                    let mut terms = Vec::new();
                    for e in args {
                        let (t, k) = self.expr(e);
                        if let Sk::Element(..) = k {
                            self.diag(DiagCode::KindMismatch, e.loc, "emit takes scalar values, not elements".into());
                        }
                        terms.push(t);
                    }
                    out.emits.push(terms);
                }
                RewriteStmt::Return(args, loc) => self.returns(pat, args, *loc, &mut out),
            }
        }
        let locals = self.patterns[pat].locals.clone();
        if rw.mode == RewriteMode::Replace {
            for s in locals {
                if referenced.contains(&s) {
                    out.kept.push(s);
                } else if !out.deletes.contains(&s) {
                    out.deletes.push(s);
                }
            }
        } else {
            out.kept = locals.into_iter().filter(|s| !out.deletes.contains(s)).collect();
        }
        self.scope.truncate(mark);
        out
    }

    fn returns(&mut self, pat: usize, args: &[Expr], loc: Location, out: &mut Rewrite) {
        if pat != 0 {
            self.diag(DiagCode::Nesting, loc, "`return` is only allowed in the rule's own rewrite part".into());
            return;
        }
        if !out.returns.is_empty() {
            self.diag(DiagCode::Duplicate, loc, "more than one `return`".into());
            return;
        }
        if args.len() != self.outputs.len() {
            self.diag(
                DiagCode::Arity,
                loc,
                format!("rule declares {} outputs but returns {}", self.outputs.len(), args.len()),
            );
        }
        for (i, e) in args.iter().enumerate() {
            let (t, k) = self.expr(e);
            let ok = match (self.outputs.get(i), &k) {
                (_, Sk::Unknown) | (None, _) => true,
                (Some(OutKind::Element(ek, ty)), Sk::Element(k2, t2)) => ek == k2 && self.tg.is_subtype_id(*t2, *ty),
                (Some(OutKind::Scalar(want)), Sk::Scalar(have)) => assignable(want, have),
                _ => false,
            };
            if !ok {
                self.diag(DiagCode::KindMismatch, e.loc, format!("return value {} has the wrong kind", i + 1));
            }
            out.returns.push(t);
        }
    }

    fn assignment(&mut self, a: &Assignment, out: &mut Rewrite) {
        let slot = match self.lookup(&a.target) {
            Some(Var::Slot(s)) => s,
            Some(Var::Scalar(_)) => {
                self.diag(DiagCode::KindMismatch, a.loc, format!("`{}` is not a graph element", a.target));
                return;
            }
            None => {
                self.diag(DiagCode::Undeclared, a.loc, format!("undeclared identifier `{}`", a.target));
                return;
            }
        };
        let ty = self.slots[slot].ty;
        let Some(kind) = self.tg.attribute_kind(ty, &a.attr).cloned() else {
            self.diag(
                DiagCode::UnknownAttribute,
                a.loc,
                format!("type `{}` has no attribute `{}`", self.tg.name(ty), a.attr),
            );
            return;
        };
        let (value, vk) = self.expr(&a.value);
        let ok = match &vk {
            Sk::Unknown => true,
            Sk::Scalar(have) => assignable(&kind, have),
            Sk::Element(..) => false,
        };
        if !ok {
            let have = match vk {
                Sk::Scalar(k) => kind_name(&k),
                _ => "element".into(),
            };
            self.diag(
                DiagCode::KindMismatch,
                a.value.loc,
                format!("cannot assign {have} to `{}.{}` of kind {}", a.target, a.attr, kind_name(&kind)),
            );
        }
        out.evals.push(Eval {
            slot,
            attr: a.attr.clone(),
            value,
        });
    }

    /// Resolves a node spec in a rewrite part, creating or retyping as written.
    fn rewrite_node(
        &mut self,
        pat: usize,
        spec: Option<&NodeSpec>,
        out: &mut Rewrite,
        referenced: &mut BTreeSet<usize>,
        retyped: &mut BTreeSet<usize>,
    ) -> Option<usize> {
        let Some(spec) = spec else {
            let slot = self.declare(None, TypeId::NODE, ElementKind::Node, pat, SlotOrigin::Created, Location::default());
            out.create_nodes.push(slot);
            return Some(slot);
        };
        match (&spec.name, &spec.ty, &spec.retype_from) {
            (Some(name), None, _) => {
                let s = self.element_ref(name, ElementKind::Node, spec.loc)?;
                referenced.insert(self.origin(s));
                Some(s)
            }
            (name, Some(ty), None) => {
                let ty = self.resolve_type(ty, ElementKind::Node, spec.loc)?;
                if self.tg.descriptor(ty).is_abstract {
                    self.diag(DiagCode::UnknownType, spec.loc, format!("cannot create abstract `{}`", self.tg.name(ty)));
                }
                let slot = self.declare(name.as_ref(), ty, ElementKind::Node, pat, SlotOrigin::Created, spec.loc);
                out.create_nodes.push(slot);
                Some(slot)
            }
            (name, Some(ty), Some(from)) => {
                let ty = self.resolve_type(ty, ElementKind::Node, spec.loc)?;
                let src = self.retype_source(from, ElementKind::Node, spec.loc, retyped)?;
                referenced.insert(src);
                let slot = self.declare(name.as_ref(), ty, ElementKind::Node, pat, SlotOrigin::Retyped(src), spec.loc);
                out.retypes.push(Retype {
                    target: slot,
                    source: src,
                    ty,
                    ends: None,
                });
                Some(slot)
            }
            (None, None, _) => None,
        }
    }

    fn retype_source(
        &mut self,
        from: &str,
        kind: ElementKind,
        loc: Location,
        retyped: &mut BTreeSet<usize>,
    ) -> Option<usize> {
        let s = self.element_ref(from, kind, loc)?;
        if !matches!(self.slots[s].origin, SlotOrigin::Pattern | SlotOrigin::Param) {
            self.diag(DiagCode::Retype, loc, format!("`{from}` is not a matched element and cannot be retyped"));
            return None;
        }
        if !retyped.insert(s) {
            self.diag(DiagCode::Retype, loc, format!("`{from}` is retyped twice"));
            return None;
        }
        Some(s)
    }

    fn rewrite_graphlet(
        &mut self,
        pat: usize,
        g: &Graphlet,
        out: &mut Rewrite,
        referenced: &mut BTreeSet<usize>,
        retyped: &mut BTreeSet<usize>,
    ) {
        let (src, edge, trg) = match g {
            Graphlet::Node(spec) => {
                self.rewrite_node(pat, Some(spec), out, referenced, retyped);
                return;
            }
            Graphlet::Edge { src, edge, trg, .. } => (src, edge, trg),
        };
        let creating = edge.ty.is_some() && edge.retype_from.is_none() || edge.name.is_none() && edge.ty.is_none();
        // endpoints of references and retypes are optional; new edges need both
        let ends_written = src.is_some() && trg.is_some();
        let s = if src.is_some() || creating {
            self.rewrite_node(pat, src.as_ref(), out, referenced, retyped)
        } else {
            None
        };
        let t = if trg.is_some() || creating {
            self.rewrite_node(pat, trg.as_ref(), out, referenced, retyped)
        } else {
            None
        };
        match (&edge.name, &edge.ty, &edge.retype_from) {
            (Some(name), None, _) => {
                let Some(e) = self.element_ref(name, ElementKind::Edge, edge.loc) else {
                    return;
                };
                referenced.insert(self.origin(e));
                if let (Some(s), Some(t)) = (s, t) {
                    let (os, ot) = (self.origin(s), self.origin(t));
                    let oe = self.origin(e);
                    let declared: Vec<(usize, usize)> = self
                        .patterns
                        .iter()
                        .flat_map(|p| p.edges.iter())
                        .filter(|pe| pe.edge == oe)
                        .map(|pe| (pe.src, pe.trg))
                        .collect();
                    if !declared.is_empty() && !declared.contains(&(os, ot)) {
                        self.diag(
                            DiagCode::Mode,
                            edge.loc,
                            format!("`{name}` is kept with different endpoints; retype it to redirect"),
                        );
                    }
                }
            }
            (name, ty, None) => {
                let ty = match ty {
                    Some(ty) => self.resolve_type(ty, ElementKind::Edge, edge.loc),
                    None => Some(TypeId::EDGE),
                };
                let Some(ty) = ty else { return };
                if self.tg.descriptor(ty).is_abstract {
                    self.diag(DiagCode::UnknownType, edge.loc, format!("cannot create abstract `{}`", self.tg.name(ty)));
                }
                let slot = self.declare(name.as_ref(), ty, ElementKind::Edge, pat, SlotOrigin::Created, edge.loc);
                if let (Some(src), Some(trg)) = (s, t) {
                    out.create_edges.push(PatternEdge { edge: slot, src, trg });
                }
            }
            (name, Some(ty), Some(from)) => {
                let Some(ty) = self.resolve_type(ty, ElementKind::Edge, edge.loc) else {
                    return;
                };
                let Some(source) = self.retype_source(from, ElementKind::Edge, edge.loc, retyped) else {
                    return;
                };
                referenced.insert(source);
                if src.is_some() != trg.is_some() {
                    self.diag(
                        DiagCode::Retype,
                        edge.loc,
                        "a retyped edge names both endpoints or neither".into(),
                    );
                }
                let slot = self.declare(name.as_ref(), ty, ElementKind::Edge, pat, SlotOrigin::Retyped(source), edge.loc);
                let ends = match (s, t) {
                    (Some(s), Some(t)) if ends_written => Some((s, t)),
                    _ => None,
                };
                out.retypes.push(Retype {
                    target: slot,
                    source,
                    ty,
                    ends,
                });
            }
            (_, None, Some(_)) => unreachable!("parser requires a type before `<`"),
        }
    }

    fn expr(&mut self, e: &Expr) -> (Term<Var>, Sk) {
        match &e.kind {
            ExprKind::Int(v) => (Term::Lit(AttributeValue::Int(*v)), Sk::Scalar(AttrKind::Int)),
            ExprKind::Float(v) => (Term::Lit(AttributeValue::Float(*v)), Sk::Scalar(AttrKind::Float)),
            ExprKind::Str(s) => (Term::Lit(AttributeValue::String(s.clone())), Sk::Scalar(AttrKind::String)),
            ExprKind::Bool(b) => (Term::Lit(AttributeValue::Boolean(*b)), Sk::Scalar(AttrKind::Boolean)),
            ExprKind::EnumItem(ty, item) => {
                let lit = Term::Lit(AttributeValue::Enum {
                    ty: ty.clone(),
                    item: item.clone(),
                });
                match self.tg.enum_type(ty) {
                    None => {
                        self.diag(DiagCode::UnknownEnum, e.loc, format!("unknown enum `{ty}`"));
                        (lit, Sk::Unknown)
                    }
                    Some(en) if en.item_value(item).is_none() => {
                        self.diag(DiagCode::UnknownEnum, e.loc, format!("enum `{ty}` has no item `{item}`"));
                        (lit, Sk::Unknown)
                    }
                    Some(_) => (lit, Sk::Scalar(AttrKind::Enum(ty.clone()))),
                }
            }
            ExprKind::Name(n) => match self.lookup(n) {
                Some(Var::Slot(s)) => (Term::Var(Var::Slot(s)), Sk::Element(self.slots[s].kind, self.slots[s].ty)),
                Some(Var::Scalar(i)) => (Term::Var(Var::Scalar(i)), Sk::Scalar(self.scalar_kinds[i].clone())),
                None => {
                    self.diag(DiagCode::Undeclared, e.loc, format!("undeclared identifier `{n}`"));
                    (Term::Lit(AttributeValue::Boolean(false)), Sk::Unknown)
                }
            },
            ExprKind::Attr(n, attr) => match self.lookup(n) {
                Some(Var::Slot(s)) => {
                    let ty = self.slots[s].ty;
                    let term = Term::Attr(Var::Slot(s), attr.clone());
                    match self.tg.attribute_kind(ty, attr) {
                        Some(k) => (term, Sk::Scalar(k.clone())),
                        None => {
                            self.diag(
                                DiagCode::UnknownAttribute,
                                e.loc,
                                format!("type `{}` has no attribute `{attr}`", self.tg.name(ty)),
                            );
                            (term, Sk::Unknown)
                        }
                    }
                }
                Some(Var::Scalar(i)) => {
                    self.diag(DiagCode::KindMismatch, e.loc, format!("`{n}` is a scalar and has no attributes"));
                    (Term::Attr(Var::Scalar(i), attr.clone()), Sk::Unknown)
                }
                None => {
                    self.diag(DiagCode::Undeclared, e.loc, format!("undeclared identifier `{n}`"));
                    (Term::Lit(AttributeValue::Boolean(false)), Sk::Unknown)
                }
            },
            ExprKind::Unary(op, inner) => {
                let (t, k) = self.expr(inner);
                let k = match (op, k) {
                    (_, Sk::Unknown) => Sk::Unknown,
                    (UnOp::Not, Sk::Scalar(AttrKind::Boolean)) => Sk::Scalar(AttrKind::Boolean),
                    (UnOp::Neg, Sk::Scalar(k @ (AttrKind::Int | AttrKind::Float))) => Sk::Scalar(k),
                    (_, _) => {
                        self.diag(DiagCode::KindMismatch, e.loc, "operand of unary operator has the wrong kind".into());
                        Sk::Unknown
                    }
                };
                (Term::Unary(*op, Box::new(t)), k)
            }
            ExprKind::Binary(op, l, r) => {
                let (lt, lk) = self.expr(l);
                let (rt, rk) = self.expr(r);
                let k = self.binary_kind(*op, &lk, &rk, e.loc);
                (Term::Binary(*op, Box::new(lt), Box::new(rt)), k)
            }
        }
    }

    fn binary_kind(&mut self, op: BinOp, l: &Sk, r: &Sk, loc: Location) -> Sk {
        use AttrKind::*;
        if matches!(l, Sk::Unknown) || matches!(r, Sk::Unknown) {
            return match op {
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::And | BinOp::Or => {
                    Sk::Scalar(Boolean)
                }
                _ => Sk::Unknown,
            };
        }
        let numeric = |k: &AttrKind| matches!(k, Int | Float);
        let result = match (op, l, r) {
            (BinOp::Eq | BinOp::Ne, Sk::Element(a, _), Sk::Element(b, _)) if a == b => Some(Boolean),
            (BinOp::Eq | BinOp::Ne, Sk::Scalar(a), Sk::Scalar(b)) if a == b || numeric(a) && numeric(b) => {
                Some(Boolean)
            }
            (_, Sk::Scalar(a), Sk::Scalar(b)) => match op {
                BinOp::Add if *a == String || *b == String => {
                    let scalar = |k: &AttrKind| k.is_scalar();
                    (scalar(a) && scalar(b)).then_some(String)
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem if numeric(a) && numeric(b) => {
                    Some(if *a == Int && *b == Int { Int } else { Float })
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
                    if numeric(a) && numeric(b) || *a == String && *b == String =>
                {
                    Some(Boolean)
                }
                BinOp::And | BinOp::Or if *a == Boolean && *b == Boolean => Some(Boolean),
                _ => None,
            },
            _ => None,
        };
        match result {
            Some(k) => Sk::Scalar(k),
            None => {
                let name = |k: &Sk| match k {
                    Sk::Scalar(k) => kind_name(k),
                    _ => "element".to_string(),
                };
                self.diag(
                    DiagCode::KindMismatch,
                    loc,
                    format!("`{}` is not defined on {} and {}", op.symbol(), name(l), name(r)),
                );
                Sk::Unknown
            }
        }
    }
}

fn assignable(want: &AttrKind, have: &AttrKind) -> bool {
    want == have || *want == AttrKind::Float && *have == AttrKind::Int
}

fn kind_name(k: &AttrKind) -> String {
    match k {
        AttrKind::Int => "int".into(),
        AttrKind::Float => "float".into(),
        AttrKind::Boolean => "boolean".into(),
        AttrKind::String => "string".into(),
        AttrKind::Enum(e) => e.clone(),
        AttrKind::Set(_) => "set".into(),
        AttrKind::Map(..) => "map".into(),
        AttrKind::Array(_) => "array".into(),
    }
}
