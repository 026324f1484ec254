//! Backtracking matcher driven by the static search plans of compiled rules.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{EvalError, MatchError};
use crate::expr::{eval_term, Value};
use crate::graph::{ElementId, Graph};
use crate::rules::compile::{CompiledRule, ParamKind, PatternKind, Step, Var};
use crate::value::AttributeValue;

/// One match of a pattern: its own bindings plus sub-matches of its nested
/// alternatives and iterated constructs.
#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    /// Index of the matched pattern within the rule.
    pub pattern: usize,
    /// `(slot, element)` for every local of the pattern, parameters included.
    pub bindings: Vec<(usize, ElementId)>,
    /// The chosen case of each alternative, in declaration order.
    pub alternatives: Vec<Match>,
    /// Instances of each iterated or multiple construct, in declaration order.
    pub iterated: Vec<Vec<Match>>,
    /// Rule arguments this match was found with (top-level matches only).
    pub inputs: Vec<Value>,
}

impl Match {
    /// Every element bound anywhere in the match tree.
    pub fn elements(&self) -> Vec<ElementId> {
        let mut out = Vec::new();
        self.visit(&mut |m| out.extend(m.bindings.iter().map(|&(_, id)| id)));
        out
    }

    /// Pattern-element names and their elements, across nested sub-matches.
    pub fn named_bindings(&self, rule: &CompiledRule) -> Vec<(String, ElementId)> {
        let mut out = Vec::new();
        self.visit(&mut |m| {
            out.extend(m.bindings.iter().map(|&(s, id)| (rule.slots[s].name.clone(), id)));
        });
        out
    }

    fn visit(&self, f: &mut dyn FnMut(&Match)) {
        f(self);
        for a in &self.alternatives {
            a.visit(f);
        }
        for it in &self.iterated {
            for m in it {
                m.visit(f);
            }
        }
    }
}

struct Ctx<'a> {
    g: &'a Graph,
    rule: &'a CompiledRule,
    scalars: Vec<AttributeValue>,
}

struct State {
    slots: Vec<Option<ElementId>>,
    /// Elements held by earlier instances of an iterated pattern.
    frozen: Vec<(usize, ElementId)>,
}

type Sink<'s> = dyn FnMut(&mut State, Match) -> Result<bool, EvalError> + 's;

impl Ctx<'_> {
    fn lookup(&self, st: &State, v: &Var) -> Option<Value> {
        match *v {
            Var::Slot(s) => st.slots[s].map(Value::Element),
            Var::Scalar(i) => self.scalars.get(i).cloned().map(Value::Scalar),
        }
    }

    fn type_ok(&self, slot: usize, x: ElementId) -> bool {
        let want = self.rule.slots[slot].ty;
        self.g
            .type_of(x)
            .is_some_and(|t| self.g.model().kind(t) == self.rule.slots[slot].kind && self.g.model().is_subtype_id(t, want))
    }

    /// Isomorphism: `x` may bind `slot` unless another slot already holds it
    /// without a hom declaration, or an earlier iterated instance owns it.
    fn can_bind(&self, st: &State, slot: usize, x: ElementId) -> bool {
        if !self.type_ok(slot, x) {
            return false;
        }
        for (t, b) in st.slots.iter().enumerate() {
            if t != slot && *b == Some(x) && !self.rule.is_hom(slot, t) {
                return false;
            }
        }
        let pattern = self.rule.slots[slot].pattern;
        !st.frozen.iter().any(|&(p, y)| p == pattern && y == x)
    }

    /// Binds `slot` to `x` (or checks an existing binding) and continues.
    fn with_bound(
        &self,
        st: &mut State,
        slot: usize,
        x: ElementId,
        k: &mut dyn FnMut(&mut State) -> Result<bool, EvalError>,
    ) -> Result<bool, EvalError> {
        match st.slots[slot] {
            Some(y) => {
                if y == x {
                    k(st)
                } else {
                    Ok(true)
                }
            }
            None => {
                if !self.can_bind(st, slot, x) {
                    return Ok(true);
                }
                st.slots[slot] = Some(x);
                let r = k(st);
                st.slots[slot] = None;
                r
            }
        }
    }

    /// Enumerates matches of pattern `pat` from plan step `step`; `sink`
    /// returns false to stop the enumeration.
    fn search(&self, st: &mut State, pat: usize, step: usize, sink: &mut Sink<'_>) -> Result<bool, EvalError> {
        let p = &self.rule.patterns[pat];
        let Some(&s) = p.plan.get(step) else {
            return self.finish(st, pat, sink);
        };
        let g = self.g;
        match s {
            Step::Cond(c) => {
                let v = eval_term(&p.conds[c], g, &|v| self.lookup(st, v))?;
                match v {
                    Value::Scalar(AttributeValue::Boolean(true)) => self.search(st, pat, step + 1, sink),
                    Value::Scalar(AttributeValue::Boolean(false)) => Ok(true),
                    other => Err(EvalError::KindMismatch(format!("condition evaluated to {other}"))),
                }
            }
            Step::Node(slot) => {
                let ty = self.rule.slots[slot].ty;
                for x in g.elements_of_type(ty, true) {
                    if !self.with_bound(st, slot, x, &mut |st| self.search(st, pat, step + 1, sink))? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Step::Out(i) | Step::In(i) => {
                let pe = p.edges[i];
                let out = matches!(s, Step::Out(_));
                let anchor = st.slots[if out { pe.src } else { pe.trg }].expect("planned anchor is bound");
                let cands: Vec<ElementId> = if out {
                    g.outgoing(anchor).collect()
                } else {
                    g.incoming(anchor).collect()
                };
                for e in cands {
                    let (src, trg) = g.endpoints(e).expect("live edge");
                    let other = if out { (pe.trg, trg) } else { (pe.src, src) };
                    let go = self.with_bound(st, pe.edge, e, &mut |st| {
                        self.with_bound(st, other.0, other.1, &mut |st| self.search(st, pat, step + 1, sink))
                    })?;
                    if !go {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Step::Bound(i) => {
                let pe = p.edges[i];
                let e = st.slots[pe.edge].expect("planned edge is bound");
                let Some((src, trg)) = g.endpoints(e) else {
                    return Ok(true);
                };
                self.with_bound(st, pe.src, src, &mut |st| {
                    self.with_bound(st, pe.trg, trg, &mut |st| self.search(st, pat, step + 1, sink))
                })
            }
        }
    }

    /// All locals are bound: check nested conditions, then collect
    /// alternatives and iterated instances, then report the match.
    fn finish(&self, st: &mut State, pat: usize, sink: &mut Sink<'_>) -> Result<bool, EvalError> {
        let p = &self.rule.patterns[pat];
        for &n in &p.negatives {
            if self.first(st, n)?.is_some() {
                return Ok(true);
            }
        }
        for &n in &p.independents {
            if self.first(st, n)?.is_none() {
                return Ok(true);
            }
        }
        let mut alternatives = Vec::new();
        let mut ok = true;
        for cases in &p.alternatives {
            let mut chosen = None;
            for &c in cases {
                if let Some(m) = self.first(st, c)? {
                    chosen = Some(m);
                    break;
                }
            }
            match chosen {
                Some(m) => {
                    bind_tree(st, &m, true);
                    alternatives.push(m);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        let frozen_mark = st.frozen.len();
        let mut iterated = Vec::new();
        if ok {
            for &it in &p.iterateds {
                let mut instances = Vec::new();
                while let Some(m) = self.first(st, it)? {
                    let empty = m.bindings.is_empty();
                    st.frozen.extend(m.bindings.iter().map(|&(_, x)| (it, x)));
                    instances.push(m);
                    if empty {
                        break;
                    }
                }
                if instances.is_empty() && self.rule.patterns[it].kind == PatternKind::Multiple {
                    ok = false;
                    break;
                }
                iterated.push(instances);
            }
        }
        let result = if ok {
            let bindings = p
                .locals
                .iter()
                .map(|&s| (s, st.slots[s].expect("locals are bound when a pattern completes")))
                .collect();
            sink(
                st,
                Match {
                    pattern: pat,
                    bindings,
                    alternatives: alternatives.clone(),
                    iterated,
                    inputs: Vec::new(),
                },
            )
        } else {
            Ok(true)
        };
        st.frozen.truncate(frozen_mark);
        for m in &alternatives {
            bind_tree(st, m, false);
        }
        result
    }

    fn first(&self, st: &mut State, pat: usize) -> Result<Option<Match>, EvalError> {
        let mut found = None;
        self.search(st, pat, 0, &mut |_, m| {
            found = Some(m);
            Ok(false)
        })?;
        Ok(found)
    }
}

/// Sets or clears the slots of a sub-match tree (its alternatives included;
/// iterated instances never stay bound).
fn bind_tree(st: &mut State, m: &Match, bind: bool) {
    for &(s, x) in &m.bindings {
        st.slots[s] = if bind { Some(x) } else { None };
    }
    for a in &m.alternatives {
        bind_tree(st, a, bind);
    }
}

/// Checks rule arguments against the parameter list and splits them into
/// pre-bound element slots and scalar values.
fn prepare(g: &Graph, rule: &CompiledRule, inputs: &[Value]) -> Result<(State, Vec<AttributeValue>), MatchError> {
    if inputs.len() != rule.params.len() {
        return Err(MatchError::Arity {
            rule: rule.name.clone(),
            expected: rule.params.len(),
            found: inputs.len(),
        });
    }
    let mut st = State {
        slots: alloc::vec![None; rule.slots.len()],
        frozen: Vec::new(),
    };
    let mut scalars = alloc::vec![AttributeValue::Int(0); rule.scalar_count()];
    let tg = g.model();
    for (p, v) in rule.params.iter().zip(inputs) {
        let bad = |reason: String| MatchError::BadArgument {
            rule: rule.name.clone(),
            param: p.name.clone(),
            reason,
        };
        match (&p.kind, v) {
            (ParamKind::Element(kind, ty), Value::Element(x)) => {
                let t = g.type_of(*x).ok_or_else(|| bad(format!("element {x} is not in the graph")))?;
                if tg.kind(t) != *kind || !tg.is_subtype_id(t, *ty) {
                    return Err(bad(format!(
                        "element {x} has type {}, expected {}",
                        tg.name(t),
                        tg.name(*ty)
                    )));
                }
                st.slots[p.index] = Some(*x);
            }
            (ParamKind::Scalar(kind), Value::Scalar(s)) => {
                let s = match (kind, s) {
                    (crate::types::AttrKind::Float, AttributeValue::Int(i)) => AttributeValue::Float(*i as f64),
                    _ => s.clone(),
                };
                if !s.conforms(kind) {
                    return Err(bad(format!("{} value does not fit", s.kind_name())));
                }
                scalars[p.index] = s;
            }
            (ParamKind::Element(..), Value::Scalar(_)) => return Err(bad("expected a graph element".into())),
            (ParamKind::Scalar(_), Value::Element(_)) => return Err(bad("expected a scalar value".into())),
        }
    }
    Ok((st, scalars))
}

/// Finds matches of `rule` in ascending search order, at most `limit`.
pub fn find_matches(
    g: &Graph,
    rule: &CompiledRule,
    inputs: &[Value],
    limit: Option<usize>,
) -> Result<Vec<Match>, MatchError> {
    let (mut st, scalars) = prepare(g, rule, inputs)?;
    let mut out = Vec::new();
    if limit == Some(0) {
        return Ok(out);
    }
    // parameters bound to one element need a hom declaration
    let params: Vec<usize> = rule
        .params
        .iter()
        .filter(|p| matches!(p.kind, ParamKind::Element(..)))
        .map(|p| p.index)
        .collect();
    for (i, &a) in params.iter().enumerate() {
        for &b in &params[i + 1..] {
            if st.slots[a] == st.slots[b] && !rule.is_hom(a, b) {
                return Ok(out);
            }
        }
    }
    let ctx = Ctx { g, rule, scalars };
    ctx.search(&mut st, 0, 0, &mut |_, mut m| {
        m.inputs = inputs.to_vec();
        out.push(m);
        Ok(limit.is_none_or(|l| out.len() < l))
    })?;
    Ok(out)
}

/// The first match in search order, if any.
pub fn first_match(g: &Graph, rule: &CompiledRule, inputs: &[Value]) -> Result<Option<Match>, MatchError> {
    Ok(find_matches(g, rule, inputs, Some(1))?.pop())
}
