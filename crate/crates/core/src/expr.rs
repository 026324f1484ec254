//! Expression evaluation over graph elements and scalar values.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;

use crate::error::EvalError;
use crate::graph::{ElementId, Graph};
use crate::rules::ast::{BinOp, Expr, ExprKind, UnOp};
use crate::value::AttributeValue;

/// A runtime value: a graph element or an attribute-kind scalar.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Element(ElementId),
    Scalar(AttributeValue),
}

impl Value {
    pub fn as_element(&self) -> Option<ElementId> {
        match self {
            Value::Element(id) => Some(*id),
            Value::Scalar(_) => None,
        }
    }

    pub fn as_scalar(&self) -> Option<&AttributeValue> {
        match self {
            Value::Scalar(v) => Some(v),
            Value::Element(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Element(id) => write!(f, "#{id}"),
            Value::Scalar(v) => write!(f, "{v}"),
        }
    }
}

impl From<AttributeValue> for Value {
    fn from(v: AttributeValue) -> Self {
        Value::Scalar(v)
    }
}

impl From<ElementId> for Value {
    fn from(id: ElementId) -> Self {
        Value::Element(id)
    }
}

/// Expression tree whose variable references are of type `R`: names for
/// ad-hoc evaluation, resolved indices inside compiled rules.
#[derive(Debug, Clone, PartialEq)]
pub enum Term<R> {
    Lit(AttributeValue),
    Var(R),
    Attr(R, String),
    Unary(UnOp, Box<Term<R>>),
    Binary(BinOp, Box<Term<R>>, Box<Term<R>>),
}

impl<R> Term<R> {
    /// Every variable the term reads.
    pub fn vars(&self, out: &mut alloc::vec::Vec<R>)
    where
        R: Clone,
    {
        match self {
            Term::Lit(_) => {}
            Term::Var(r) | Term::Attr(r, _) => out.push(r.clone()),
            Term::Unary(_, a) => a.vars(out),
            Term::Binary(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

impl Term<String> {
    /// Converts a parsed expression; enum items become enum values.
    pub fn from_ast(e: &Expr) -> Self {
        match &e.kind {
            ExprKind::Int(v) => Term::Lit(AttributeValue::Int(*v)),
            ExprKind::Float(v) => Term::Lit(AttributeValue::Float(*v)),
            ExprKind::Str(s) => Term::Lit(AttributeValue::String(s.clone())),
            ExprKind::Bool(b) => Term::Lit(AttributeValue::Boolean(*b)),
            ExprKind::EnumItem(ty, item) => Term::Lit(AttributeValue::Enum {
                ty: ty.clone(),
                item: item.clone(),
            }),
            ExprKind::Name(n) => Term::Var(n.clone()),
            ExprKind::Attr(n, a) => Term::Attr(n.clone(), a.clone()),
            ExprKind::Unary(op, a) => Term::Unary(*op, Box::new(Term::from_ast(a))),
            ExprKind::Binary(op, a, b) => Term::Binary(*op, Box::new(Term::from_ast(a)), Box::new(Term::from_ast(b))),
        }
    }
}

/// Evaluates `term`, looking variables up with `lookup`.
pub fn eval_term<R: fmt::Debug>(
    term: &Term<R>,
    g: &Graph,
    lookup: &dyn Fn(&R) -> Option<Value>,
) -> Result<Value, EvalError> {
    let var = |r: &R| lookup(r).ok_or_else(|| EvalError::Unbound(format!("{r:?}")));
    match term {
        Term::Lit(v) => Ok(Value::Scalar(v.clone())),
        Term::Var(r) => var(r),
        Term::Attr(r, attr) => match var(r)? {
            Value::Element(id) => Ok(Value::Scalar(g.get_attr(id, attr)?.clone())),
            Value::Scalar(v) => Err(EvalError::KindMismatch(format!(
                "attribute access `.{attr}` on {} value",
                v.kind_name()
            ))),
        },
        Term::Unary(op, a) => unary(*op, eval_term(a, g, lookup)?),
        Term::Binary(op, a, b) => {
            let a = eval_term(a, g, lookup)?;
            let b = eval_term(b, g, lookup)?;
            binary(*op, a, b)
        }
    }
}

/// Evaluates a parsed expression with variables bound by name.
pub fn eval_expr(g: &Graph, bindings: &dyn Fn(&str) -> Option<Value>, e: &Expr) -> Result<Value, EvalError> {
    let term = Term::from_ast(e);
    eval_term(&term, g, &|name: &String| bindings(name))
}

fn scalar(v: Value, what: &str) -> Result<AttributeValue, EvalError> {
    match v {
        Value::Scalar(s) => Ok(s),
        Value::Element(id) => Err(EvalError::KindMismatch(format!("element #{id} used as {what}"))),
    }
}

fn mismatch(op: BinOp, a: &AttributeValue, b: &AttributeValue) -> EvalError {
    EvalError::KindMismatch(format!(
        "`{}` not defined on {} and {}",
        op.symbol(),
        a.kind_name(),
        b.kind_name()
    ))
}

fn unary(op: UnOp, v: Value) -> Result<Value, EvalError> {
    let v = scalar(v, "operand")?;
    let r = match (op, &v) {
        (UnOp::Not, AttributeValue::Boolean(b)) => AttributeValue::Boolean(!b),
        (UnOp::Neg, AttributeValue::Int(i)) => AttributeValue::Int(i.checked_neg().ok_or(EvalError::Overflow)?),
        (UnOp::Neg, AttributeValue::Float(f)) => AttributeValue::Float(-f),
        _ => {
            let sym = if op == UnOp::Not { "!" } else { "-" };
            return Err(EvalError::KindMismatch(format!("`{sym}` not defined on {}", v.kind_name())));
        }
    };
    Ok(Value::Scalar(r))
}

fn as_float(v: &AttributeValue) -> Option<f64> {
    match v {
        AttributeValue::Int(i) => Some(*i as f64),
        AttributeValue::Float(f) => Some(*f),
        _ => None,
    }
}

fn equal(a: &Value, b: &Value) -> Result<bool, EvalError> {
    use AttributeValue::*;
    match (a, b) {
        (Value::Element(x), Value::Element(y)) => Ok(x == y),
        (Value::Scalar(x), Value::Scalar(y)) => match (x, y) {
            (Int(_) | Float(_), Int(_) | Float(_)) if core::mem::discriminant(x) != core::mem::discriminant(y) => {
                Ok(as_float(x) == as_float(y))
            }
            (Enum { ty: t1, .. }, Enum { ty: t2, .. }) if t1 != t2 => Err(mismatch(BinOp::Eq, x, y)),
            _ if core::mem::discriminant(x) == core::mem::discriminant(y) => Ok(x == y),
            _ => Err(mismatch(BinOp::Eq, x, y)),
        },
        _ => Err(EvalError::KindMismatch("comparing an element with a scalar".to_string())),
    }
}

fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, EvalError> {
    use AttributeValue::*;
    match op {
        BinOp::Eq => return Ok(Value::Scalar(Boolean(equal(&a, &b)?))),
        BinOp::Ne => return Ok(Value::Scalar(Boolean(!equal(&a, &b)?))),
        _ => {}
    }
    let a = scalar(a, "operand")?;
    let b = scalar(b, "operand")?;
    let r = match op {
        BinOp::Add => match (&a, &b) {
            (Int(x), Int(y)) => Int(x.checked_add(*y).ok_or(EvalError::Overflow)?),
            (String(_), _) | (_, String(_)) => String(a.to_text() + &b.to_text()),
            _ => Float(numeric(op, &a, &b)?.0 + numeric(op, &a, &b)?.1),
        },
        BinOp::Sub | BinOp::Mul => match (&a, &b) {
            (Int(x), Int(y)) => {
                let r = if op == BinOp::Sub { x.checked_sub(*y) } else { x.checked_mul(*y) };
                Int(r.ok_or(EvalError::Overflow)?)
            }
            _ => {
                let (x, y) = numeric(op, &a, &b)?;
                Float(if op == BinOp::Sub { x - y } else { x * y })
            }
        },
        BinOp::Div | BinOp::Rem => match (&a, &b) {
            (Int(_), Int(0)) => return Err(EvalError::DivisionByZero),
            (Int(x), Int(y)) => {
                let r = if op == BinOp::Div { x.checked_div(*y) } else { x.checked_rem(*y) };
                Int(r.ok_or(EvalError::Overflow)?)
            }
            _ => {
                let (x, y) = numeric(op, &a, &b)?;
                Float(if op == BinOp::Div { x / y } else { x % y })
            }
        },
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let ord = match (&a, &b) {
                (Int(x), Int(y)) => Some(x.cmp(y)),
                (String(x), String(y)) => Some(x.as_bytes().cmp(y.as_bytes())),
                _ => {
                    let (x, y) = numeric(op, &a, &b)?;
                    x.partial_cmp(&y)
                }
            };
            Boolean(match ord {
                None => false,
                Some(o) => match op {
                    BinOp::Lt => o == Ordering::Less,
                    BinOp::Le => o != Ordering::Greater,
                    BinOp::Gt => o == Ordering::Greater,
                    _ => o != Ordering::Less,
                },
            })
        }
        BinOp::And | BinOp::Or => match (&a, &b) {
            (Boolean(x), Boolean(y)) => Boolean(if op == BinOp::And { *x && *y } else { *x || *y }),
            _ => return Err(mismatch(op, &a, &b)),
        },
        BinOp::Eq | BinOp::Ne => unreachable!("handled above"),
    };
    Ok(Value::Scalar(r))
}

fn numeric(op: BinOp, a: &AttributeValue, b: &AttributeValue) -> Result<(f64, f64), EvalError> {
    match (as_float(a), as_float(b)) {
        (Some(x), Some(y)) => Ok((x, y)),
        _ => Err(mismatch(op, a, b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parser::Parser;
    use crate::types::TypeGraph;
    use alloc::sync::Arc;
    use alloc::vec::Vec;

    fn eval_src(src: &str, g: &Graph, vars: &[(&str, Value)]) -> Result<Value, EvalError> {
        let toks = crate::lexer::tokenize(src).unwrap();
        let mut p = Parser {
            cur: crate::lexer::Cursor::new(toks),
        };
        let e = p.expr().unwrap();
        let vars: Vec<(String, Value)> = vars.iter().map(|(n, v)| (n.to_string(), v.clone())).collect();
        eval_expr(
            g,
            &|name| vars.iter().find(|(n, _)| n == name).map(|(_, v)| v.clone()),
            &e,
        )
    }

    fn empty() -> Graph {
        Graph::new(Arc::new(TypeGraph::builder().build().unwrap()))
    }

    fn s(v: &str) -> Value {
        Value::Scalar(AttributeValue::String(v.into()))
    }

    #[test]
    fn concatenates_strings() {
        let g = empty();
        assert_eq!(eval_src("\"Hello \" + name", &g, &[("name", s("World"))]), Ok(s("Hello World")));
    }

    #[test]
    fn integer_arithmetic() {
        let g = empty();
        let int = |v| Ok(Value::Scalar(AttributeValue::Int(v)));
        assert_eq!(eval_src("7 % 3", &g, &[]), int(1));
        assert_eq!(eval_src("-7 / 2", &g, &[]), int(-3));
        assert_eq!(eval_src("1 + 2 * 3 - 4", &g, &[]), int(3));
        assert_eq!(eval_src("1 / 0", &g, &[]), Err(EvalError::DivisionByZero));
        assert_eq!(eval_src("9223372036854775807 + 1", &g, &[]), Err(EvalError::Overflow));
    }

    #[test]
    fn comparisons_and_logic() {
        let g = empty();
        let b = |v| Ok(Value::Scalar(AttributeValue::Boolean(v)));
        assert_eq!(eval_src("\"B\" < \"a\"", &g, &[]), b(true));
        assert_eq!(eval_src("1 < 2 && !(2 <= 1) || false", &g, &[]), b(true));
        assert_eq!(eval_src("1 == 1.0", &g, &[]), b(true));
        assert!(matches!(eval_src("1 == \"1\"", &g, &[]), Err(EvalError::KindMismatch(_))));
        assert!(matches!(eval_src("x", &g, &[]), Err(EvalError::Unbound(_))));
    }

    #[test]
    fn reads_attributes() {
        let tg = Arc::new(crate::parse_model("node class P { name: string; }").unwrap());
        let mut g = Graph::new(tg);
        let p = g.add_node("P").unwrap();
        g.set_attr(p, "name", AttributeValue::String("Ann".into())).unwrap();
        assert_eq!(
            eval_src("\"hi \" + p.name", &g, &[("p", Value::Element(p))]),
            Ok(s("hi Ann"))
        );
        assert_eq!(
            eval_src("p == q", &g, &[("p", Value::Element(p)), ("q", Value::Element(p))]),
            Ok(Value::Scalar(AttributeValue::Boolean(true)))
        );
    }
}
