//! Pretty printer for rule syntax trees. Parsing the output yields a tree that
//! prints identically.

use alloc::string::String;
use core::fmt::Write;

use super::ast::*;
use crate::value::escape_string;

pub fn print_rule_file(file: &RuleFile) -> String {
    let mut out = String::new();
    if !file.models.is_empty() {
        let _ = writeln!(out, "using {};", file.models.join(", "));
    }
    for rule in &file.rules {
        out.push('\n');
        print_rule(rule, &mut out);
    }
    out
}

pub fn print_rule(rule: &RuleAst, out: &mut String) {
    let _ = write!(out, "rule {}", rule.name);
    if !rule.params.is_empty() {
        out.push('(');
        for (i, p) in rule.params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            if p.is_edge {
                let _ = write!(out, "-{}:{}->", p.name, p.ty);
            } else {
                let _ = write!(out, "{}:{}", p.name, p.ty);
            }
        }
        out.push(')');
    }
    if !rule.outputs.is_empty() {
        let _ = write!(out, " : ({})", rule.outputs.join(", "));
    }
    out.push(' ');
    print_pattern(&rule.pattern, 0, out);
    out.push('\n');
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_pattern(p: &PatternAst, depth: usize, out: &mut String) {
    out.push_str("{\n");
    for stmt in &p.stmts {
        indent(depth + 1, out);
        match stmt {
            PatternStmt::Graphlet(g) => {
                print_graphlet(g, out);
                out.push(';');
            }
            PatternStmt::If(conds) => {
                out.push_str("if {");
                for c in conds {
                    out.push(' ');
                    print_expr(c, out);
                    out.push(';');
                }
                out.push_str(" }");
            }
            PatternStmt::Hom(names, _) => {
                let _ = write!(out, "hom({});", names.join(", "));
            }
            PatternStmt::Nested(kind, body) => {
                let _ = write!(out, "{} ", kind.keyword());
                print_pattern(body, depth + 1, out);
            }
            PatternStmt::Alternative(cases, _) => {
                out.push_str("alternative {\n");
                for (name, body) in cases {
                    indent(depth + 2, out);
                    let _ = write!(out, "{name} ");
                    print_pattern(body, depth + 2, out);
                    out.push('\n');
                }
                indent(depth + 1, out);
                out.push('}');
            }
        }
        out.push('\n');
    }
    if let Some(rw) = &p.rewrite {
        indent(depth + 1, out);
        print_rewrite(rw, depth + 1, out);
        out.push('\n');
    }
    indent(depth, out);
    out.push('}');
}

fn print_rewrite(rw: &RewriteAst, depth: usize, out: &mut String) {
    out.push_str(match rw.mode {
        RewriteMode::Replace => "replace {",
        RewriteMode::Modify => "modify {",
    });
    if rw.stmts.is_empty() {
        out.push('}');
        return;
    }
    out.push('\n');
    for stmt in &rw.stmts {
        indent(depth + 1, out);
        match stmt {
            RewriteStmt::Graphlet(g) => {
                print_graphlet(g, out);
                out.push(';');
            }
            RewriteStmt::Delete(names, _) => {
                let _ = write!(out, "delete({});", names.join(", "));
            }
            RewriteStmt::Eval(assigns) => {
                out.push_str("eval {");
                for a in assigns {
                    let _ = write!(out, " {}.{} = ", a.target, a.attr);
                    print_expr(&a.value, out);
                    out.push(';');
                }
                out.push_str(" }");
            }
            RewriteStmt::Emit(args, _) | RewriteStmt::Return(args, _) => {
                out.push_str(if matches!(stmt, RewriteStmt::Emit(..)) {
                    "emit("
                } else {
                    "return("
                });
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    print_expr(a, out);
                }
                out.push_str(");");
            }
        }
        out.push('\n');
    }
    indent(depth, out);
    out.push('}');
}

fn print_node(n: &NodeSpec, out: &mut String) {
    if let Some(name) = &n.name {
        out.push_str(name);
    }
    print_type(&n.ty, &n.retype_from, out);
}

fn print_type(ty: &Option<String>, from: &Option<String>, out: &mut String) {
    if let Some(ty) = ty {
        let _ = write!(out, ":{ty}");
        if let Some(from) = from {
            let _ = write!(out, "<{from}>");
        }
    }
}

fn print_graphlet(g: &Graphlet, out: &mut String) {
    match g {
        Graphlet::Node(n) => print_node(n, out),
        Graphlet::Edge {
            src,
            edge,
            trg,
            reversed,
        } => {
            let (first, second) = if *reversed { (trg, src) } else { (src, trg) };
            if let Some(n) = first {
                print_node(n, out);
                out.push(' ');
            }
            out.push_str(if *reversed { "<-" } else { "-" });
            if let Some(name) = &edge.name {
                out.push_str(name);
            }
            print_type(&edge.ty, &edge.retype_from, out);
            out.push_str(if *reversed { "-" } else { "->" });
            if let Some(n) = second {
                out.push(' ');
                print_node(n, out);
            }
        }
    }
}

pub fn print_expr(e: &Expr, out: &mut String) {
    print_expr_prec(e, 0, out);
}

fn print_expr_prec(e: &Expr, min: u8, out: &mut String) {
    match &e.kind {
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Float(v) => {
            let _ = write!(out, "{v:?}");
        }
        ExprKind::Str(s) => escape_string(s, out),
        ExprKind::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ExprKind::EnumItem(ty, item) => {
            let _ = write!(out, "{ty}::{item}");
        }
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::Attr(n, a) => {
            let _ = write!(out, "{n}.{a}");
        }
        ExprKind::Unary(op, inner) => {
            out.push(match op {
                UnOp::Not => '!',
                UnOp::Neg => '-',
            });
            // a negated literal would fold on reparse, so keep it grouped
            let literal = matches!(inner.kind, ExprKind::Int(_) | ExprKind::Float(_));
            let grouped = literal || matches!(inner.kind, ExprKind::Binary(..) | ExprKind::Unary(..));
            if grouped {
                out.push('(');
                print_expr_prec(inner, 0, out);
                out.push(')');
            } else {
                print_expr_prec(inner, 0, out);
            }
        }
        ExprKind::Binary(op, l, r) => {
            let prec = op.precedence();
            let wrap = prec < min;
            if wrap {
                out.push('(');
            }
            print_expr_prec(l, prec, out);
            let _ = write!(out, " {} ", op.symbol());
            // left-associative: a right operand of equal precedence needs parentheses
            print_expr_prec(r, prec + 1, out);
            if wrap {
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parser::parse_rule_text;

    const SAMPLE: &str = r#"
using a, b;
rule r(x:N, -p:E->, k:int) : (N, int) {
    x -e:E-> y:N; y <-- :M; -:E-> z;
    if { x.v + 1 * (k - 2) > -3 && !(x.s == "q\"\n") || T::a != x.t; }
    hom(x, y);
    negative { x --> ; }
    alternative { One { y -f:E-> x; } Two { } }
    iterated { x --> w:N; replace { } }
    multiple { x --> u:N; modify { u; eval { u.v = 1.5 - (2 - 3); } } }
    modify { x2:M<x>; y -g:E2<e>-> x2; n:N; delete(z); emit("a", k); return(n, k - -1); }
}
rule s { }
"#;

    #[test]
    fn print_parse_is_a_fixpoint() {
        let first = print_rule_file(&parse_rule_text(SAMPLE).unwrap());
        let second = print_rule_file(&parse_rule_text(&first).unwrap());
        assert_eq!(first, second);
    }

    #[test]
    fn keeps_operator_grouping() {
        let f = parse_rule_text("rule r { if { a - (b - c) == (a - b) - c; } }").unwrap();
        let out = print_rule_file(&f);
        assert!(out.contains("a - (b - c) == a - b - c"), "{out}");
    }
}
