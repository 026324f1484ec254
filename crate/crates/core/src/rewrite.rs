//! Application of a rule's rewrite parts to a match.
//!
//! All frames of a match (the rule itself, chosen alternative cases and
//! iterated instances) run phase by phase: creation, retyping, evaluation,
//! emission, deletion.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{ApplyError, EvalError, RewriteError};
use crate::expr::{eval_term, Value};
use crate::graph::{ElementId, Graph};
use crate::matcher::{find_matches, Match};
use crate::rules::compile::{CompiledRule, Rewrite, SlotOrigin, Var};
use crate::types::{AttrKind, ElementKind};
use crate::value::AttributeValue;

/// Structural effect of one application.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Delta {
    pub created: Vec<ElementId>,
    /// Explicitly and implicitly deleted elements, incident edges included.
    pub deleted: Vec<ElementId>,
    pub retyped: Vec<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RewriteOutcome {
    pub returns: Vec<Value>,
    /// One chunk per executed `emit`, in execution order.
    pub emitted: Vec<String>,
    pub delta: Delta,
}

struct Frame<'r> {
    rewrite: Option<&'r Rewrite>,
    slots: Vec<Option<ElementId>>,
}

fn frames<'r>(rule: &'r CompiledRule, m: &Match, parent: &[Option<ElementId>], out: &mut Vec<Frame<'r>>) {
    let mut slots = parent.to_vec();
    for &(s, x) in &m.bindings {
        slots[s] = Some(x);
    }
    let rewrite = rule.patterns[m.pattern].rewrite.as_ref();
    if let Some(rw) = rewrite {
        // retype targets are the same elements as their sources
        for r in &rw.retypes {
            slots[r.target] = slots[r.source];
        }
    }
    let me = out.len();
    out.push(Frame { rewrite, slots });
    let snapshot = out[me].slots.clone();
    for a in &m.alternatives {
        frames(rule, a, &snapshot, out);
    }
    for it in &m.iterated {
        for inst in it {
            frames(rule, inst, &snapshot, out);
        }
    }
}

fn lookup(slots: &[Option<ElementId>], scalars: &[AttributeValue], v: &Var) -> Option<Value> {
    match *v {
        Var::Slot(s) => slots[s].map(Value::Element),
        Var::Scalar(i) => scalars.get(i).cloned().map(Value::Scalar),
    }
}

/// Applies the rewrite parts of `rule` along match `m`.
pub fn apply(g: &mut Graph, rule: &CompiledRule, m: &Match) -> Result<RewriteOutcome, RewriteError> {
    if !rule.is_well_formed() {
        return Err(RewriteError::IllFormed(rule.name.clone()));
    }
    if let Some(dead) = m.elements().into_iter().find(|&x| !g.is_live(x)) {
        return Err(RewriteError::StaleMatch(dead));
    }
    let scalars: Vec<AttributeValue> = {
        let mut v = alloc::vec![AttributeValue::Int(0); rule.scalar_count()];
        for (p, input) in rule.params.iter().zip(&m.inputs) {
            if let (crate::rules::compile::ParamKind::Scalar(_), Value::Scalar(s)) = (&p.kind, input) {
                v[p.index] = s.clone();
            }
        }
        v
    };
    let mut fs = Vec::new();
    frames(rule, m, &alloc::vec![None; rule.slots.len()], &mut fs);
    let mut out = RewriteOutcome::default();
    let eval_err = |source: EvalError| RewriteError::Eval {
        rule: rule.name.clone(),
        source,
    };

    for f in fs.iter_mut() {
        let Some(rw) = f.rewrite else { continue };
        for &s in &rw.create_nodes {
            let id = g.add_node_typed(rule.slots[s].ty)?;
            f.slots[s] = Some(id);
            out.delta.created.push(id);
        }
        for pe in &rw.create_edges {
            let (src, trg) = (f.slots[pe.src], f.slots[pe.trg]);
            let (Some(src), Some(trg)) = (src, trg) else {
                return Err(eval_err(EvalError::Unbound(rule.slots[pe.src].name.clone())));
            };
            let id = g.add_edge_typed(rule.slots[pe.edge].ty, src, trg)?;
            f.slots[pe.edge] = Some(id);
            out.delta.created.push(id);
        }
    }

    for f in &fs {
        let Some(rw) = f.rewrite else { continue };
        for r in &rw.retypes {
            let id = f.slots[r.source].expect("retype source is matched");
            g.retype_typed(id, r.ty)?;
            if let Some((s, t)) = r.ends {
                let (Some(s), Some(t)) = (f.slots[s], f.slots[t]) else {
                    return Err(eval_err(EvalError::Unbound(rule.slots[s].name.clone())));
                };
                g.redirect_edge(id, s, t)?;
            }
            out.delta.retyped.push(id);
        }
    }

    for f in &fs {
        let Some(rw) = f.rewrite else { continue };
        for ev in &rw.evals {
            let v = eval_term(&ev.value, g, &|v| lookup(&f.slots, &scalars, v)).map_err(eval_err)?;
            let target = f.slots[ev.slot].ok_or_else(|| eval_err(EvalError::Unbound(rule.slots[ev.slot].name.clone())))?;
            let v = match v {
                Value::Scalar(v) => v,
                Value::Element(_) => {
                    return Err(eval_err(EvalError::KindMismatch("cannot assign an element to an attribute".into())))
                }
            };
            let ty = g.type_of(target).expect("eval target is live");
            let v = match (g.model().attribute_kind(ty, &ev.attr), v) {
                (Some(AttrKind::Float), AttributeValue::Int(i)) => AttributeValue::Float(i as f64),
                (_, v) => v,
            };
            g.set_attr(target, &ev.attr, v)?;
        }
    }
    if let Some(rw) = fs.first().and_then(|f| f.rewrite) {
        for t in &rw.returns {
            let v = eval_term(t, g, &|v| lookup(&fs[0].slots, &scalars, v)).map_err(eval_err)?;
            out.returns.push(v);
        }
    }

    for f in &fs {
        let Some(rw) = f.rewrite else { continue };
        for args in &rw.emits {
            let mut chunk = String::new();
            for t in args {
                match eval_term(t, g, &|v| lookup(&f.slots, &scalars, v)).map_err(eval_err)? {
                    Value::Scalar(s) => chunk.push_str(&s.to_text()),
                    Value::Element(x) => {
                        return Err(eval_err(EvalError::KindMismatch(alloc::format!("cannot emit element {x}"))))
                    }
                }
            }
            out.emitted.push(chunk);
        }
    }

    for f in &fs {
        let Some(rw) = f.rewrite else { continue };
        for &s in &rw.deletes {
            debug_assert!(!matches!(rule.slots[s].origin, SlotOrigin::Created | SlotOrigin::Retyped(_)));
            let Some(id) = f.slots[s] else { continue };
            if !g.is_live(id) {
                continue;
            }
            if g.kind_of(id) == Some(ElementKind::Node) {
                let mut incident: Vec<ElementId> = g.outgoing(id).chain(g.incoming(id)).collect();
                incident.sort();
                incident.dedup();
                g.delete_node(id)?;
                out.delta.deleted.extend(incident);
            } else {
                g.delete_edge(id)?;
            }
            out.delta.deleted.push(id);
        }
    }
    debug_assert_eq!(g.check_consistency(), Ok(()));
    Ok(out)
}

/// Collects every match first, then applies them in order. Matches that
/// lost an element to an earlier application are skipped.
pub fn apply_all(g: &mut Graph, rule: &CompiledRule, inputs: &[Value]) -> Result<Vec<RewriteOutcome>, ApplyError> {
    if !rule.is_well_formed() {
        return Err(RewriteError::IllFormed(rule.name.clone()).into());
    }
    let matches = find_matches(g, rule, inputs, None)?;
    let mut outcomes = Vec::new();
    for m in &matches {
        if m.elements().iter().any(|&x| !g.is_live(x)) {
            continue;
        }
        outcomes.push(apply(g, rule, m)?);
    }
    Ok(outcomes)
}

/// Matches once and applies the first match, if there is one.
pub fn apply_first(g: &mut Graph, rule: &CompiledRule, inputs: &[Value]) -> Result<Option<RewriteOutcome>, ApplyError> {
    if !rule.is_well_formed() {
        return Err(RewriteError::IllFormed(rule.name.clone()).into());
    }
    match find_matches(g, rule, inputs, Some(1))?.pop() {
        Some(m) => Ok(Some(apply(g, rule, &m)?)),
        None => Ok(None),
    }
}
