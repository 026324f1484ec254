//! Recursive-descent parser for `.grg`/`.gri` rule files.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use super::diag::{DiagCode, Diagnostic, RuleError, Severity, SourceMap};
use crate::error::SyntaxError;
use crate::lexer::{tokenize, Cursor, Tok};

/// Supplies the text of `#include`d files by name.
pub trait IncludeResolver {
    fn resolve(&self, name: &str) -> Option<String>;
}

impl<F: Fn(&str) -> Option<String>> IncludeResolver for F {
    fn resolve(&self, name: &str) -> Option<String> {
        self(name)
    }
}

/// Resolver for sources that include nothing.
pub struct NoIncludes;

impl IncludeResolver for NoIncludes {
    fn resolve(&self, _: &str) -> Option<String> {
        None
    }
}

/// Splices `#include "file"` lines textually. The returned map points each
/// output line back at its file and line.
pub fn preprocess(
    src: &str,
    file: &str,
    includes: &dyn IncludeResolver,
) -> Result<(String, SourceMap), RuleError> {
    let mut out = String::new();
    let mut map = SourceMap::default();
    let mut stack = alloc::vec![file.to_string()];
    splice(src, file, includes, &mut stack, &mut out, &mut map)?;
    Ok((out, map))
}

fn splice(
    src: &str,
    file: &str,
    includes: &dyn IncludeResolver,
    stack: &mut Vec<String>,
    out: &mut String,
    map: &mut SourceMap,
) -> Result<(), RuleError> {
    for (i, line) in src.lines().enumerate() {
        let lineno = i as u32 + 1;
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix("#include") {
            let fail = |code, message: String| RuleError {
                diagnostics: alloc::vec![Diagnostic {
                    severity: Severity::Error,
                    code,
                    loc: super::diag::SourceLoc {
                        file: file.to_string(),
                        line: lineno,
                        col: (line.len() - trimmed.len()) as u32 + 1,
                    },
                    rule: None,
                    message,
                }],
            };
            let name = rest.trim();
            let name = name
                .strip_prefix('"')
                .and_then(|n| n.strip_suffix('"'))
                .ok_or_else(|| fail(DiagCode::Syntax, "expected `#include \"file\"`".into()))?;
            if stack.iter().any(|f| f == name) {
                return Err(fail(
                    DiagCode::IncludeCycle,
                    format!("include cycle: {} -> {name}", stack.join(" -> ")),
                ));
            }
            let text = includes
                .resolve(name)
                .ok_or_else(|| fail(DiagCode::IncludeMissing, format!("cannot include `{name}`")))?;
            stack.push(name.to_string());
            splice(&text, name, includes, stack, out, map)?;
            stack.pop();
        } else {
            out.push_str(line);
            out.push('\n');
            map.push_line(file, lineno);
        }
    }
    Ok(())
}

/// Parses a rule file (after include splicing) into its syntax tree.
pub fn parse_rule_file(src: &str, file: &str, includes: &dyn IncludeResolver) -> Result<(RuleFile, SourceMap), RuleError> {
    let (text, map) = preprocess(src, file, includes)?;
    let syntax = |e: SyntaxError| RuleError {
        diagnostics: alloc::vec![Diagnostic {
            severity: Severity::Error,
            code: DiagCode::Syntax,
            loc: map.resolve(e.loc),
            rule: None,
            message: e.message,
        }],
    };
    let toks = tokenize(&text).map_err(syntax)?;
    let mut p = Parser { cur: Cursor::new(toks) };
    let ast = p.file().map_err(syntax)?;
    Ok((ast, map))
}

/// Parses source text that contains no includes; locations are in `src`.
pub fn parse_rule_text(src: &str) -> Result<RuleFile, SyntaxError> {
    let mut p = Parser {
        cur: Cursor::new(tokenize(src)?),
    };
    p.file()
}

pub(crate) struct Parser {
    pub(crate) cur: Cursor,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn file(&mut self) -> PResult<RuleFile> {
        let mut file = RuleFile::default();
        while !self.cur.at(&Tok::Eof) {
            if self.cur.eat_keyword("using") {
                loop {
                    file.models.push(self.cur.ident()?);
                    if !self.cur.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.cur.expect(&Tok::Semi)?;
            } else if self.cur.at_keyword("rule") {
                file.rules.push(self.rule()?);
            } else {
                return Err(self.cur.unexpected("`rule` or `using`"));
            }
        }
        Ok(file)
    }

    fn rule(&mut self) -> PResult<RuleAst> {
        let loc = self.cur.loc();
        self.cur.expect_keyword("rule")?;
        let name = self.cur.ident()?;
        let mut params = Vec::new();
        if self.cur.eat(&Tok::LParen) {
            while !self.cur.at(&Tok::RParen) {
                params.push(self.param()?);
                if !self.cur.eat(&Tok::Comma) {
                    break;
                }
            }
            self.cur.expect(&Tok::RParen)?;
        }
        let mut outputs = Vec::new();
        if self.cur.eat(&Tok::Colon) {
            self.cur.expect(&Tok::LParen)?;
            while !self.cur.at(&Tok::RParen) {
                outputs.push(self.cur.ident()?);
                if !self.cur.eat(&Tok::Comma) {
                    break;
                }
            }
            self.cur.expect(&Tok::RParen)?;
        }
        let pattern = self.braced_pattern()?;
        Ok(RuleAst {
            name,
            loc,
            params,
            outputs,
            pattern,
        })
    }

    fn param(&mut self) -> PResult<ParamAst> {
        let loc = self.cur.loc();
        if self.cur.eat(&Tok::Minus) {
            let name = self.cur.ident()?;
            self.cur.expect(&Tok::Colon)?;
            let ty = self.cur.ident()?;
            self.cur.expect(&Tok::Arrow)?;
            return Ok(ParamAst {
                name,
                ty,
                is_edge: true,
                loc,
            });
        }
        let name = self.cur.ident()?;
        self.cur.expect(&Tok::Colon)?;
        let ty = self.cur.ident()?;
        Ok(ParamAst {
            name,
            ty,
            is_edge: false,
            loc,
        })
    }

    fn braced_pattern(&mut self) -> PResult<PatternAst> {
        let loc = self.cur.loc();
        self.cur.expect(&Tok::LBrace)?;
        let mut pat = PatternAst {
            loc,
            ..PatternAst::default()
        };
        loop {
            if self.cur.eat(&Tok::RBrace) {
                return Ok(pat);
            }
            if self.cur.at_keyword("replace") || self.cur.at_keyword("modify") {
                if pat.rewrite.is_some() {
                    return Err(self.cur.error("a pattern has at most one rewrite part"));
                }
                pat.rewrite = Some(self.rewrite()?);
                continue;
            }
            if pat.rewrite.is_some() {
                return Err(self.cur.error("the rewrite part must close the pattern"));
            }
            pat.stmts.push(self.pattern_stmt()?);
        }
    }

    fn pattern_stmt(&mut self) -> PResult<PatternStmt> {
        let loc = self.cur.loc();
        let nested = [
            ("negative", NestedKind::Negative),
            ("independent", NestedKind::Independent),
            ("iterated", NestedKind::Iterated),
            ("multiple", NestedKind::Multiple),
        ];
        if let Tok::Ident(word) = self.cur.peek().clone() {
            // keywords only count when followed by their syntax, so they stay usable as names
            let next = self.cur.peek_at(1).clone();
            if word == "if" && next == Tok::LBrace {
                self.cur.next();
                self.cur.next();
                let mut conds = Vec::new();
                while !self.cur.eat(&Tok::RBrace) {
                    conds.push(self.expr()?);
                    if !self.cur.eat(&Tok::Semi) {
                        self.cur.expect(&Tok::RBrace)?;
                        break;
                    }
                }
                return Ok(PatternStmt::If(conds));
            }
            if word == "hom" && next == Tok::LParen {
                self.cur.next();
                self.cur.next();
                let mut names = Vec::new();
                while !self.cur.at(&Tok::RParen) {
                    names.push(self.cur.ident()?);
                    if !self.cur.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.cur.expect(&Tok::RParen)?;
                self.cur.expect(&Tok::Semi)?;
                return Ok(PatternStmt::Hom(names, loc));
            }
            if let Some(&(_, kind)) = nested.iter().find(|(kw, _)| *kw == word) {
                if next == Tok::LBrace {
                    self.cur.next();
                    return Ok(PatternStmt::Nested(kind, self.braced_pattern()?));
                }
            }
            if word == "alternative" && (next == Tok::LBrace || matches!(next, Tok::Ident(_))) {
                self.cur.next();
                if matches!(self.cur.peek(), Tok::Ident(_)) {
                    // optional name, ignored
                    self.cur.next();
                }
                self.cur.expect(&Tok::LBrace)?;
                let mut cases = Vec::new();
                while !self.cur.eat(&Tok::RBrace) {
                    let name = self.cur.ident()?;
                    cases.push((name, self.braced_pattern()?));
                }
                if cases.is_empty() {
                    return Err(SyntaxError {
                        loc,
                        message: "an alternative needs at least one case".into(),
                    });
                }
                return Ok(PatternStmt::Alternative(cases, loc));
            }
        }
        let g = self.graphlet()?;
        self.cur.expect(&Tok::Semi)?;
        Ok(PatternStmt::Graphlet(g))
    }

    fn rewrite(&mut self) -> PResult<RewriteAst> {
        let loc = self.cur.loc();
        let mode = if self.cur.eat_keyword("replace") {
            RewriteMode::Replace
        } else {
            self.cur.expect_keyword("modify")?;
            RewriteMode::Modify
        };
        self.cur.expect(&Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.cur.eat(&Tok::RBrace) {
            stmts.push(self.rewrite_stmt()?);
        }
        Ok(RewriteAst { mode, stmts, loc })
    }

    fn rewrite_stmt(&mut self) -> PResult<RewriteStmt> {
        let loc = self.cur.loc();
        if let Tok::Ident(word) = self.cur.peek().clone() {
            let next = self.cur.peek_at(1).clone();
            match (word.as_str(), &next) {
                ("delete", Tok::LParen) => {
                    self.cur.next();
                    self.cur.next();
                    let mut names = Vec::new();
                    while !self.cur.at(&Tok::RParen) {
                        names.push(self.cur.ident()?);
                        if !self.cur.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.cur.expect(&Tok::RParen)?;
                    self.cur.expect(&Tok::Semi)?;
                    return Ok(RewriteStmt::Delete(names, loc));
                }
                ("eval", Tok::LBrace) => {
                    self.cur.next();
                    self.cur.next();
                    let mut assigns = Vec::new();
                    while !self.cur.eat(&Tok::RBrace) {
                        let aloc = self.cur.loc();
                        let target = self.cur.ident()?;
                        self.cur.expect(&Tok::Dot)?;
                        let attr = self.cur.ident()?;
                        self.cur.expect(&Tok::Assign)?;
                        let value = self.expr()?;
                        self.cur.expect(&Tok::Semi)?;
                        assigns.push(Assignment {
                            target,
                            attr,
                            value,
                            loc: aloc,
                        });
                    }
                    return Ok(RewriteStmt::Eval(assigns));
                }
                ("emit", Tok::LParen) | ("return", Tok::LParen) => {
                    self.cur.next();
                    self.cur.next();
                    let mut args = Vec::new();
                    while !self.cur.at(&Tok::RParen) {
                        args.push(self.expr()?);
                        if !self.cur.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.cur.expect(&Tok::RParen)?;
                    self.cur.expect(&Tok::Semi)?;
                    if word == "emit" {
                        if args.is_empty() {
                            return Err(SyntaxError {
                                loc,
                                message: "emit needs at least one argument".into(),
                            });
                        }
                        return Ok(RewriteStmt::Emit(args, loc));
                    }
                    return Ok(RewriteStmt::Return(args, loc));
                }
                _ => {}
            }
        }
        let g = self.graphlet()?;
        self.cur.expect(&Tok::Semi)?;
        Ok(RewriteStmt::Graphlet(g))
    }

    /// `node`, `node edge node`, `edge node`, `node edge`, or `edge`.
    fn graphlet(&mut self) -> PResult<Graphlet> {
        let first = if self.at_edge_start() {
            None
        } else {
            Some(self.node_spec()?)
        };
        if !self.at_edge_start() {
            return match first {
                Some(n) => Ok(Graphlet::Node(n)),
                None => Err(self.cur.unexpected("node or edge")),
            };
        }
        let (edge, reversed) = self.edge_spec()?;
        let second = if matches!(self.cur.peek(), Tok::Ident(_) | Tok::Colon) {
            Some(self.node_spec()?)
        } else {
            None
        };
        let (src, trg) = if reversed { (second, first) } else { (first, second) };
        Ok(Graphlet::Edge {
            src,
            edge,
            trg,
            reversed,
        })
    }

    fn at_edge_start(&self) -> bool {
        match self.cur.peek() {
            Tok::Minus | Tok::Arrow => true,
            Tok::Lt => matches!(self.cur.peek_at(1), Tok::Minus | Tok::Arrow),
            _ => false,
        }
    }

    fn node_spec(&mut self) -> PResult<NodeSpec> {
        let loc = self.cur.loc();
        let name = match self.cur.peek() {
            Tok::Ident(_) => Some(self.cur.ident()?),
            _ => None,
        };
        let (ty, retype_from) = if self.cur.eat(&Tok::Colon) {
            self.type_with_retype()?
        } else {
            (None, None)
        };
        if name.is_none() && ty.is_none() {
            return Err(self.cur.unexpected("node"));
        }
        Ok(NodeSpec {
            name,
            ty,
            retype_from,
            loc,
        })
    }

    fn type_with_retype(&mut self) -> PResult<(Option<String>, Option<String>)> {
        let ty = self.cur.ident()?;
        let from = if self.cur.eat(&Tok::Lt) {
            let from = self.cur.ident()?;
            self.cur.expect(&Tok::Gt)?;
            Some(from)
        } else {
            None
        };
        Ok((Some(ty), from))
    }

    /// Parses `-spec->`, `-->`, `<-spec-` or `<--`. Returns whether the arrow
    /// points backwards.
    fn edge_spec(&mut self) -> PResult<(EdgeSpec, bool)> {
        let loc = self.cur.loc();
        let reversed = self.cur.eat(&Tok::Lt);
        // `-->` lexes as Minus Arrow; `<--` as Lt Minus Minus; `<-->` is not an edge
        if !reversed && self.cur.eat(&Tok::Arrow) {
            // a bare `->` would be `-` `>` with nothing between, reject
            return Err(SyntaxError {
                loc,
                message: "expected `-->` or `-e:T->`".into(),
            });
        }
        if reversed && self.cur.at(&Tok::Arrow) {
            return Err(self.cur.error("`<-->` is not an edge; use one direction"));
        }
        self.cur.expect(&Tok::Minus)?;
        let anonymous_close = if reversed { Tok::Minus } else { Tok::Arrow };
        if self.cur.eat(&anonymous_close) {
            return Ok((
                EdgeSpec {
                    name: None,
                    ty: None,
                    retype_from: None,
                    loc,
                },
                reversed,
            ));
        }
        let name = match self.cur.peek() {
            Tok::Ident(_) => Some(self.cur.ident()?),
            _ => None,
        };
        let (ty, retype_from) = if self.cur.eat(&Tok::Colon) {
            self.type_with_retype()?
        } else {
            (None, None)
        };
        if name.is_none() && ty.is_none() {
            return Err(self.cur.unexpected("edge name or type"));
        }
        self.cur.expect(&anonymous_close)?;
        Ok((
            EdgeSpec {
                name,
                ty,
                retype_from,
                loc,
            },
            reversed,
        ))
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.cur.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Rem,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.precedence() < min_prec {
                break;
            }
            let loc = self.cur.loc();
            self.cur.next();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                loc,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let loc = self.cur.loc();
        let op = match self.cur.peek() {
            Tok::Bang => UnOp::Not,
            Tok::Minus => UnOp::Neg,
            _ => return self.primary(),
        };
        self.cur.next();
        let inner = self.unary()?;
        // fold negative literals so that printing round-trips
        if op == UnOp::Neg {
            match inner.kind {
                ExprKind::Int(v) => {
                    return Ok(Expr {
                        kind: ExprKind::Int(v.wrapping_neg()),
                        loc,
                    })
                }
                ExprKind::Float(v) => {
                    return Ok(Expr {
                        kind: ExprKind::Float(-v),
                        loc,
                    })
                }
                _ => {}
            }
        }
        Ok(Expr {
            kind: ExprKind::Unary(op, Box::new(inner)),
            loc,
        })
    }

    fn primary(&mut self) -> PResult<Expr> {
        let loc = self.cur.loc();
        let kind = match self.cur.next() {
            Tok::Int(v) => ExprKind::Int(v),
            Tok::Float(v) => ExprKind::Float(v),
            Tok::Str(s) => ExprKind::Str(s),
            Tok::LParen => {
                let e = self.expr()?;
                self.cur.expect(&Tok::RParen)?;
                return Ok(e);
            }
            Tok::Ident(name) => match name.as_str() {
                "true" => ExprKind::Bool(true),
                "false" => ExprKind::Bool(false),
                _ => {
                    if self.cur.eat(&Tok::ColonColon) {
                        ExprKind::EnumItem(name, self.cur.ident()?)
                    } else if self.cur.eat(&Tok::Dot) {
                        ExprKind::Attr(name, self.cur.ident()?)
                    } else {
                        ExprKind::Name(name)
                    }
                }
            },
            other => {
                return Err(SyntaxError {
                    loc,
                    message: format!("expected expression, found {other}"),
                })
            }
        };
        Ok(Expr { kind, loc })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;

    #[test]
    fn empty_pattern_with_replace() {
        let f = parse_rule_text(
            "using helloworld__ecore;
             rule createHelloWorld {
                 replace {
                     greeting:helloworld_Greeting;
                     eval { greeting._text = \"Hello World\"; }
                 }
             }",
        )
        .unwrap();
        assert_eq!(f.models, ["helloworld__ecore"]);
        let r = &f.rules[0];
        assert!(r.pattern.stmts.is_empty());
        let rw = r.pattern.rewrite.as_ref().unwrap();
        assert_eq!(rw.mode, RewriteMode::Replace);
        assert!(matches!(&rw.stmts[0], RewriteStmt::Graphlet(Graphlet::Node(n)) if n.name.as_deref() == Some("greeting")));
        assert!(matches!(&rw.stmts[1], RewriteStmt::Eval(a) if a[0].attr == "_text"));
    }

    #[test]
    fn edge_declaration_with_named_endpoints() {
        let f = parse_rule_text("rule r { x:N -e:t-> y:N; y <-:u- x; x --> y; }").unwrap();
        let stmts = &f.rules[0].pattern.stmts;
        match &stmts[0] {
            PatternStmt::Graphlet(Graphlet::Edge { src, edge, trg, reversed }) => {
                assert_eq!(src.as_ref().unwrap().name.as_deref(), Some("x"));
                assert_eq!(trg.as_ref().unwrap().name.as_deref(), Some("y"));
                assert_eq!(edge.name.as_deref(), Some("e"));
                assert_eq!(edge.ty.as_deref(), Some("t"));
                assert!(!reversed);
            }
            other => panic!("{other:?}"),
        }
        match &stmts[1] {
            PatternStmt::Graphlet(Graphlet::Edge { src, trg, reversed, .. }) => {
                assert!(reversed);
                assert_eq!(src.as_ref().unwrap().name.as_deref(), Some("x"));
                assert_eq!(trg.as_ref().unwrap().name.as_deref(), Some("y"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(&stmts[2], PatternStmt::Graphlet(Graphlet::Edge { edge, .. }) if edge.name.is_none() && edge.ty.is_none()));
    }

    #[test]
    fn retyping_forms() {
        let f = parse_rule_text("rule r { x:A -e:E-> y:A; modify { z:B<x>; y -f:F<e>-> z; } }").unwrap();
        let rw = f.rules[0].pattern.rewrite.as_ref().unwrap();
        assert!(matches!(&rw.stmts[0], RewriteStmt::Graphlet(Graphlet::Node(n)) if n.retype_from.as_deref() == Some("x")));
        assert!(matches!(&rw.stmts[1], RewriteStmt::Graphlet(Graphlet::Edge { edge, .. }) if edge.retype_from.as_deref() == Some("e")));
    }

    #[test]
    fn nested_constructs() {
        let f = parse_rule_text(
            "rule r {
                 e:Edge;
                 alternative { missingSrc { negative { e --> ; } } missingTrg { } }
                 iterated { e --> n:Node; replace {} }
                 multiple { n:Node; }
                 independent { hom(e); }
                 if { e.x == 1; true; }
             }",
        )
        .unwrap();
        let kinds: alloc::vec::Vec<_> = f.rules[0]
            .pattern
            .stmts
            .iter()
            .map(|s| match s {
                PatternStmt::Graphlet(_) => "graphlet",
                PatternStmt::Alternative(..) => "alternative",
                PatternStmt::Nested(k, _) => k.keyword(),
                PatternStmt::Hom(..) => "hom",
                PatternStmt::If(_) => "if",
            })
            .collect();
        assert_eq!(kinds, ["graphlet", "alternative", "iterated", "multiple", "independent", "if"]);
    }

    #[test]
    fn include_cycle_is_reported() {
        let files: BTreeMap<&str, &str> = [("a.gri", "#include \"b.gri\"\n"), ("b.gri", "#include \"a.gri\"\n")].into();
        let resolver = |name: &str| files.get(name).map(|s| s.to_string());
        let err = parse_rule_file("#include \"a.gri\"\nrule r {}\n", "main.grg", &resolver).unwrap_err();
        assert!(err.has(DiagCode::IncludeCycle), "{err}");
        let err = parse_rule_file("#include \"gone.gri\"\n", "main.grg", &resolver).unwrap_err();
        assert!(err.has(DiagCode::IncludeMissing));
    }

    #[test]
    fn include_splices_and_maps_locations() {
        let files: BTreeMap<&str, &str> = [("emit.gri", "rule emitString {\n  s:S;\n  modify { emit(s.v); }\n}\n")].into();
        let resolver = |name: &str| files.get(name).map(|s| s.to_string());
        let (ast, map) = parse_rule_file("using m;\n#include \"emit.gri\"\nrule main { }\n", "main.grg", &resolver).unwrap();
        assert_eq!(ast.rules.len(), 2);
        let loc = map.resolve(ast.rules[0].loc);
        assert_eq!((loc.file.as_str(), loc.line), ("emit.gri", 1));
        let loc = map.resolve(ast.rules[1].loc);
        assert_eq!((loc.file.as_str(), loc.line), ("main.grg", 3));

        let err = parse_rule_file("#include \"emit.gri\"\nrule broken {", "main.grg", &resolver).unwrap_err();
        assert_eq!(err.diagnostics[0].loc.file, "main.grg");
    }

    #[test]
    fn syntax_errors_are_located() {
        let err = parse_rule_text("rule r {\n  x:N -e:t y;\n}").unwrap_err();
        assert_eq!(err.loc.line, 2);
        assert!(parse_rule_text("rule r { a --> b --> c; }").is_err(), "chained edges are rejected");
        assert!(parse_rule_text("rule r { modify {} replace {} }").is_err());
    }

    #[test]
    fn keywords_stay_usable_as_names() {
        let f = parse_rule_text("rule r { if:N; hom:N; if --> hom; }").unwrap();
        assert_eq!(f.rules[0].pattern.stmts.len(), 3);
    }
}
