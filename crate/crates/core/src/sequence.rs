//! Graph rewrite sequences: rule calls combined by boolean control
//! operators.
//!
//! Binding strength, tightest first: postfix `*` and `+`; `&&` and `&`;
//! `||` and `|`; `;>`. All binary operators associate to the left.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::error::{ApplyError, Location, SyntaxError};
use crate::expr::Value;
use crate::graph::{ElementId, Graph};
use crate::lexer::{tokenize, Cursor, Tok};
use crate::matcher::find_matches;
use crate::rewrite::{apply, Delta};
use crate::rules::compile::{CompiledRule, ParamKind};
use crate::rules::RuleSet;
use crate::value::AttributeValue;

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Var(String),
    Lit(AttributeValue),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleCall {
    /// Variables receiving the rule's return values, `(a, b)=r`.
    pub outs: Vec<String>,
    pub rule: String,
    pub args: Vec<Arg>,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Seq {
    Call(RuleCall),
    /// `[r]`: apply to every match collected up front.
    All(RuleCall),
    Star(Box<Seq>),
    Plus(Box<Seq>),
    StrictAnd(Box<Seq>, Box<Seq>),
    StrictOr(Box<Seq>, Box<Seq>),
    LazyAnd(Box<Seq>, Box<Seq>),
    LazyOr(Box<Seq>, Box<Seq>),
    ThenRight(Box<Seq>, Box<Seq>),
    Group(Box<Seq>),
}

impl Seq {
    /// Every rule call in the tree, left to right.
    pub fn calls(&self) -> Vec<&RuleCall> {
        let mut out = Vec::new();
        self.walk(&mut out);
        out
    }

    fn walk<'a>(&'a self, out: &mut Vec<&'a RuleCall>) {
        match self {
            Seq::Call(c) | Seq::All(c) => out.push(c),
            Seq::Star(s) | Seq::Plus(s) | Seq::Group(s) => s.walk(out),
            Seq::StrictAnd(a, b)
            | Seq::StrictOr(a, b)
            | Seq::LazyAnd(a, b)
            | Seq::LazyOr(a, b)
            | Seq::ThenRight(a, b) => {
                a.walk(out);
                b.walk(out);
            }
        }
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(v) => f.write_str(v),
            Arg::Lit(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for RuleCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rule)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn write_outs(f: &mut fmt::Formatter<'_>, outs: &[String]) -> fmt::Result {
    if !outs.is_empty() {
        write!(f, "({})=", outs.join(", "))?;
    }
    Ok(())
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seq::Call(c) => {
                write_outs(f, &c.outs)?;
                write!(f, "{c}")
            }
            Seq::All(c) => {
                write_outs(f, &c.outs)?;
                write!(f, "[{c}]")
            }
            Seq::Star(s) => write!(f, "{s}*"),
            Seq::Plus(s) => write!(f, "{s}+"),
            Seq::Group(s) => write!(f, "({s})"),
            Seq::StrictAnd(a, b) => write!(f, "{a} & {b}"),
            Seq::StrictOr(a, b) => write!(f, "{a} | {b}"),
            Seq::LazyAnd(a, b) => write!(f, "{a} && {b}"),
            Seq::LazyOr(a, b) => write!(f, "{a} || {b}"),
            Seq::ThenRight(a, b) => write!(f, "{a} ;> {b}"),
        }
    }
}

pub fn parse_sequence(text: &str) -> Result<Seq, SyntaxError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let s = then_right(&mut cur)?;
    if !cur.at(&Tok::Eof) {
        return Err(cur.unexpected("end of sequence"));
    }
    Ok(s)
}

fn then_right(cur: &mut Cursor) -> Result<Seq, SyntaxError> {
    let mut lhs = disjunction(cur)?;
    while cur.eat(&Tok::ThenRight) {
        lhs = Seq::ThenRight(Box::new(lhs), Box::new(disjunction(cur)?));
    }
    Ok(lhs)
}

fn disjunction(cur: &mut Cursor) -> Result<Seq, SyntaxError> {
    let mut lhs = conjunction(cur)?;
    loop {
        if cur.eat(&Tok::OrOr) {
            lhs = Seq::LazyOr(Box::new(lhs), Box::new(conjunction(cur)?));
        } else if cur.eat(&Tok::Pipe) {
            lhs = Seq::StrictOr(Box::new(lhs), Box::new(conjunction(cur)?));
        } else {
            return Ok(lhs);
        }
    }
}

fn conjunction(cur: &mut Cursor) -> Result<Seq, SyntaxError> {
    let mut lhs = postfix(cur)?;
    loop {
        if cur.eat(&Tok::AndAnd) {
            lhs = Seq::LazyAnd(Box::new(lhs), Box::new(postfix(cur)?));
        } else if cur.eat(&Tok::Amp) {
            lhs = Seq::StrictAnd(Box::new(lhs), Box::new(postfix(cur)?));
        } else {
            return Ok(lhs);
        }
    }
}

fn postfix(cur: &mut Cursor) -> Result<Seq, SyntaxError> {
    let mut s = primary(cur)?;
    loop {
        if cur.eat(&Tok::Star) {
            s = Seq::Star(Box::new(s));
        } else if cur.eat(&Tok::Plus) {
            s = Seq::Plus(Box::new(s));
        } else {
            return Ok(s);
        }
    }
}

/// Tries `(a, b)=`; restores the cursor when the parenthesis opens a group.
fn out_list(cur: &mut Cursor) -> Option<Vec<String>> {
    let start = cur.pos();
    let mut outs = Vec::new();
    let ok = (|| {
        cur.expect(&Tok::LParen).ok()?;
        loop {
            outs.push(cur.ident().ok()?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        cur.expect(&Tok::RParen).ok()?;
        cur.expect(&Tok::Assign).ok()
    })();
    if ok.is_some() {
        Some(outs)
    } else {
        cur.reset(start);
        None
    }
}

fn primary(cur: &mut Cursor) -> Result<Seq, SyntaxError> {
    let outs = if cur.at(&Tok::LParen) { out_list(cur) } else { None };
    if outs.is_none() && cur.eat(&Tok::LParen) {
        let inner = then_right(cur)?;
        cur.expect(&Tok::RParen)?;
        return Ok(Seq::Group(Box::new(inner)));
    }
    let outs = outs.unwrap_or_default();
    if cur.eat(&Tok::LBracket) {
        let mut call = call(cur)?;
        cur.expect(&Tok::RBracket)?;
        call.outs = outs;
        return Ok(Seq::All(call));
    }
    let mut call = call(cur)?;
    call.outs = outs;
    Ok(Seq::Call(call))
}

fn call(cur: &mut Cursor) -> Result<RuleCall, SyntaxError> {
    let loc = cur.loc();
    let rule = cur.ident()?;
    let mut args = Vec::new();
    if cur.eat(&Tok::LParen) {
        while !cur.at(&Tok::RParen) {
            args.push(arg(cur)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        cur.expect(&Tok::RParen)?;
    }
    Ok(RuleCall {
        outs: Vec::new(),
        rule,
        args,
        loc,
    })
}

fn arg(cur: &mut Cursor) -> Result<Arg, SyntaxError> {
    let negative = cur.eat(&Tok::Minus);
    let lit = match cur.next() {
        Tok::Int(v) => AttributeValue::Int(if negative { v.wrapping_neg() } else { v }),
        Tok::Float(v) => AttributeValue::Float(if negative { -v } else { v }),
        Tok::Str(s) if !negative => AttributeValue::String(s),
        Tok::Ident(name) if !negative => match name.as_str() {
            "true" => AttributeValue::Boolean(true),
            "false" => AttributeValue::Boolean(false),
            _ if cur.eat(&Tok::ColonColon) => AttributeValue::Enum {
                ty: name,
                item: cur.ident()?,
            },
            _ => return Ok(Arg::Var(name)),
        },
        other => {
            return Err(SyntaxError {
                loc: cur.loc(),
                message: format!("expected argument, found {other}"),
            })
        }
    };
    Ok(Arg::Lit(lit))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeqError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule `{rule}` returns {expected} values, {found} variables given")]
    Outputs {
        rule: String,
        expected: usize,
        found: usize,
    },
    #[error("rule `{rule}` takes {expected} arguments, {found} given")]
    Arguments {
        rule: String,
        expected: usize,
        found: usize,
    },
    #[error("variable `{0}` is not set")]
    Unset(String),
    #[error("variable `{0}` refers to a deleted element")]
    Poisoned(String),
    #[error("iteration cap of {0} reached")]
    IterationCap(u64),
    #[error(transparent)]
    Apply(#[from] ApplyError),
}

/// What the engine reports to an observer.
#[derive(Debug, Clone, PartialEq)]
pub enum Event<'a> {
    SequenceStarted { text: &'a str },
    MatchFound { rule: &'a str, bindings: Vec<(String, ElementId)> },
    PreApply { rule: &'a str },
    PostApply { rule: &'a str, delta: &'a Delta },
    SequenceFinished { result: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Abort,
}

/// Sees every event and may stop the sequence. Implementations that wait
/// for a user decision block inside [`Observer::event`].
pub trait Observer {
    fn event(&mut self, event: &Event<'_>, graph: &Graph) -> Control;
}

/// Receives text produced by `emit`.
pub trait EmitSink {
    fn emit(&mut self, chunk: &str);
}

impl EmitSink for String {
    fn emit(&mut self, chunk: &str) {
        self.push_str(chunk);
    }
}

/// Execution environment. Variables persist across sequences run with the
/// same table.
pub struct Exec<'a> {
    pub graph: &'a mut Graph,
    pub rules: &'a RuleSet,
    pub vars: &'a mut BTreeMap<String, Value>,
    pub sink: &'a mut dyn EmitSink,
    pub observer: Option<&'a mut dyn Observer>,
    pub max_iter: u64,
}

pub const DEFAULT_MAX_ITER: u64 = 1_000_000;

/// Internal outcome of a step: normal result or a user abort.
enum Flow {
    Done(bool),
    Abort,
}

impl Exec<'_> {
    /// Runs a sequence; an observer abort yields `Ok(false)`.
    pub fn run(&mut self, seq: &Seq) -> Result<bool, SeqError> {
        let text = seq.to_string();
        if self.notify(&Event::SequenceStarted { text: &text }) == Control::Abort {
            self.notify(&Event::SequenceFinished { result: false });
            return Ok(false);
        }
        let result = match self.exec(seq) {
            Ok(Flow::Done(b)) => b,
            Ok(Flow::Abort) => false,
            Err(e) => return Err(e),
        };
        self.notify(&Event::SequenceFinished { result });
        Ok(result)
    }

    fn notify(&mut self, ev: &Event<'_>) -> Control {
        match self.observer.as_mut() {
            Some(o) => o.event(ev, self.graph),
            None => Control::Continue,
        }
    }

    fn exec(&mut self, seq: &Seq) -> Result<Flow, SeqError> {
        macro_rules! eval {
            ($s:expr) => {
                match self.exec($s)? {
                    Flow::Done(b) => b,
                    Flow::Abort => return Ok(Flow::Abort),
                }
            };
        }
        let r = match seq {
            Seq::Call(c) => return self.call(c, false),
            Seq::All(c) => return self.call(c, true),
            Seq::Group(s) => eval!(s),
            Seq::Star(s) | Seq::Plus(s) => {
                let mut n: u64 = 0;
                while eval!(s) {
                    n += 1;
                    if n >= self.max_iter {
                        return Err(SeqError::IterationCap(self.max_iter));
                    }
                }
                matches!(seq, Seq::Star(_)) || n > 0
            }
            Seq::StrictAnd(a, b) => {
                let x = eval!(a);
                let y = eval!(b);
                x && y
            }
            Seq::StrictOr(a, b) => {
                let x = eval!(a);
                let y = eval!(b);
                x || y
            }
            Seq::LazyAnd(a, b) => eval!(a) && eval!(b),
            Seq::LazyOr(a, b) => eval!(a) || eval!(b),
            Seq::ThenRight(a, b) => {
                eval!(a);
                eval!(b)
            }
        };
        Ok(Flow::Done(r))
    }

    fn read(&self, name: &str) -> Result<Value, SeqError> {
        let v = self.vars.get(name).ok_or_else(|| SeqError::Unset(name.to_string()))?;
        if let Value::Element(id) = v {
            if !self.graph.is_live(*id) {
                return Err(SeqError::Poisoned(name.to_string()));
            }
        }
        Ok(v.clone())
    }

    fn call(&mut self, c: &RuleCall, all: bool) -> Result<Flow, SeqError> {
        let rules = self.rules;
        let rule = rules.rule(&c.rule).ok_or_else(|| SeqError::UnknownRule(c.rule.clone()))?;
        check_call(rule, c)?;
        let inputs = c
            .args
            .iter()
            .map(|a| match a {
                Arg::Var(v) => self.read(v),
                Arg::Lit(l) => Ok(Value::Scalar(l.clone())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !rule.is_well_formed() {
            return Err(ApplyError::Rewrite(crate::error::RewriteError::IllFormed(rule.name.clone())).into());
        }
        let limit = if all { None } else { Some(1) };
        let matches = find_matches(self.graph, rule, &inputs, limit).map_err(ApplyError::from)?;
        let mut applied = 0usize;
        let mut last_returns = None;
        for m in &matches {
            if all && m.elements().iter().any(|&x| !self.graph.is_live(x)) {
                continue;
            }
            let bindings = m.named_bindings(rule);
            if self.notify(&Event::MatchFound {
                rule: &rule.name,
                bindings,
            }) == Control::Abort
            {
                return Ok(Flow::Abort);
            }
            if self.notify(&Event::PreApply { rule: &rule.name }) == Control::Abort {
                return Ok(Flow::Abort);
            }
            let out = apply(self.graph, rule, m).map_err(ApplyError::from)?;
            for chunk in &out.emitted {
                self.sink.emit(chunk);
            }
            applied += 1;
            let control = self.notify(&Event::PostApply {
                rule: &rule.name,
                delta: &out.delta,
            });
            last_returns = Some(out.returns);
            if control == Control::Abort {
                return Ok(Flow::Abort);
            }
        }
        if let Some(returns) = last_returns {
            for (name, v) in c.outs.iter().zip(returns) {
                self.vars.insert(name.clone(), v);
            }
        }
        Ok(Flow::Done(applied > 0))
    }
}

fn check_call(rule: &CompiledRule, c: &RuleCall) -> Result<(), SeqError> {
    if c.args.len() != rule.params.len() {
        return Err(SeqError::Arguments {
            rule: rule.name.clone(),
            expected: rule.params.len(),
            found: c.args.len(),
        });
    }
    if !c.outs.is_empty() && c.outs.len() != rule.outputs.len() {
        return Err(SeqError::Outputs {
            rule: rule.name.clone(),
            expected: rule.outputs.len(),
            found: c.outs.len(),
        });
    }
    Ok(())
}

/// Static check of a sequence against a rule set: rule names, argument
/// and output counts, and literal arguments against scalar parameters.
pub fn validate(seq: &Seq, rules: &RuleSet) -> Result<(), SeqError> {
    for c in seq.calls() {
        let rule = rules.rule(&c.rule).ok_or_else(|| SeqError::UnknownRule(c.rule.clone()))?;
        check_call(rule, c)?;
        for (p, a) in rule.params.iter().zip(&c.args) {
            if let Arg::Lit(v) = a {
                let fits = match &p.kind {
                    ParamKind::Scalar(k) => {
                        v.conforms(k) || matches!((k, v), (crate::types::AttrKind::Float, AttributeValue::Int(_)))
                    }
                    ParamKind::Element(..) => false,
                };
                if !fits {
                    return Err(ApplyError::Match(crate::error::MatchError::BadArgument {
                        rule: rule.name.clone(),
                        param: p.name.clone(),
                        reason: format!("literal {v} does not fit"),
                    })
                    .into());
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use crate::rules::diag::SourceMap;
    use crate::rules::parse_rule_text;
    use alloc::sync::Arc;

    fn call(name: &str) -> Box<Seq> {
        Box::new(Seq::Call(RuleCall {
            outs: Vec::new(),
            rule: name.into(),
            args: Vec::new(),
            loc: Location::default(),
        }))
    }

    /// Structural equality ignoring source locations.
    fn shape(s: &Seq) -> String {
        match s {
            Seq::Call(c) => format!("Call({})", c.rule),
            Seq::All(c) => format!("All({})", c.rule),
            Seq::Star(a) => format!("Star({})", shape(a)),
            Seq::Plus(a) => format!("Plus({})", shape(a)),
            Seq::Group(a) => format!("Group({})", shape(a)),
            Seq::StrictAnd(a, b) => format!("StrictAnd({}, {})", shape(a), shape(b)),
            Seq::StrictOr(a, b) => format!("StrictOr({}, {})", shape(a), shape(b)),
            Seq::LazyAnd(a, b) => format!("LazyAnd({}, {})", shape(a), shape(b)),
            Seq::LazyOr(a, b) => format!("LazyOr({}, {})", shape(a), shape(b)),
            Seq::ThenRight(a, b) => format!("ThenRight({}, {})", shape(a), shape(b)),
        }
    }

    #[test]
    fn parses_the_counting_sequence() {
        let s = parse_sequence("(res)=createIntResult ;> [countNodes(res)] ;> [emitInt]").unwrap();
        assert_eq!(
            shape(&s),
            "ThenRight(ThenRight(Call(createIntResult), All(countNodes)), All(emitInt))"
        );
        let Seq::ThenRight(left, _) = &s else { panic!() };
        let Seq::ThenRight(first, second) = left.as_ref() else { panic!() };
        assert!(matches!(first.as_ref(), Seq::Call(c) if c.outs == ["res"]));
        assert!(matches!(second.as_ref(), Seq::All(c) if c.args == [Arg::Var("res".into())]));
    }

    #[test]
    fn precedence_and_grouping() {
        assert_eq!(shape(&parse_sequence("r*").unwrap()), shape(&Seq::Star(call("r"))));
        assert_eq!(shape(&parse_sequence("a & b | c").unwrap()), "StrictOr(StrictAnd(Call(a), Call(b)), Call(c))");
        assert_eq!(shape(&parse_sequence("a | b && c").unwrap()), "StrictOr(Call(a), LazyAnd(Call(b), Call(c)))");
        assert_eq!(shape(&parse_sequence("a ;> b || c ;> d").unwrap()), "ThenRight(ThenRight(Call(a), LazyOr(Call(b), Call(c))), Call(d))");
        assert_eq!(shape(&parse_sequence("(a ;> b)+ & [c]*").unwrap()), "StrictAnd(Plus(Group(ThenRight(Call(a), Call(b)))), Star(All(c)))");
        assert!(parse_sequence("a &").is_err());
        assert!(parse_sequence("(a").is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in ["(x, y)=r(1, \"s\", v) ;> [q(x)]* | (a && b)+", "(v)=[r(-2, E::a, true)]"] {
            let s = parse_sequence(text).unwrap();
            assert_eq!(parse_sequence(&s.to_string()).unwrap().to_string(), s.to_string());
        }
    }

    struct World {
        g: Graph,
        rs: RuleSet,
    }

    fn world() -> World {
        let tg = Arc::new(parse_model("node class T; node class Mark; node class Res { result:int; }").unwrap());
        let src = "
            rule never { n:Mark; negative { n; } }
            rule always { }
            rule mark { modify { :Mark; } }
            rule take { n:T; replace { } }
            rule make : (Res) { modify { r:Res; return(r); } }
            rule bump(r:Res) { t:T; modify { eval { r.result = r.result + 1; } } }
            rule drop(r:Res) { replace { } }
        ";
        let rs = RuleSet::new(&parse_rule_text(src).unwrap(), &SourceMap::default(), tg.clone()).unwrap();
        World { g: Graph::new(tg), rs }
    }

    fn run(w: &mut World, vars: &mut BTreeMap<String, Value>, text: &str) -> Result<bool, SeqError> {
        let mut sink = String::new();
        Exec {
            graph: &mut w.g,
            rules: &w.rs,
            vars,
            sink: &mut sink,
            observer: None,
            max_iter: 50,
        }
        .run(&parse_sequence(text).unwrap())
    }

    fn marks(w: &World) -> usize {
        w.g.count_elements("Mark", crate::graph::CountMode::Exact).unwrap()
    }

    #[test]
    fn star_always_succeeds() {
        let mut w = world();
        let mut vars = BTreeMap::new();
        assert_eq!(run(&mut w, &mut vars, "never*"), Ok(true));
        assert_eq!(w.g.node_count(), 0);
    }

    #[test]
    fn plus_requires_one_success() {
        let mut w = world();
        let mut vars = BTreeMap::new();
        assert_eq!(run(&mut w, &mut vars, "never+"), Ok(false));
        for _ in 0..3 {
            w.g.add_node("T").unwrap();
        }
        assert_eq!(run(&mut w, &mut vars, "take+"), Ok(true));
        assert_eq!(w.g.node_count(), 0);
    }

    #[test]
    fn lazy_operators_short_circuit() {
        let mut w = world();
        let mut vars = BTreeMap::new();
        assert_eq!(run(&mut w, &mut vars, "always || mark"), Ok(true));
        assert_eq!(marks(&w), 0);
        assert_eq!(run(&mut w, &mut vars, "never && mark"), Ok(false));
        assert_eq!(marks(&w), 0);
        assert_eq!(run(&mut w, &mut vars, "always | mark"), Ok(true));
        assert_eq!(marks(&w), 1);
        assert_eq!(run(&mut w, &mut vars, "never & mark"), Ok(false));
        assert_eq!(marks(&w), 2);
    }

    #[test]
    fn then_right_returns_right_result() {
        let mut w = world();
        let mut vars = BTreeMap::new();
        assert_eq!(run(&mut w, &mut vars, "always ;> never"), Ok(false));
        assert_eq!(run(&mut w, &mut vars, "never ;> always"), Ok(true));
    }

    #[test]
    fn variables_flow_between_rules() {
        let mut w = world();
        for _ in 0..4 {
            w.g.add_node("T").unwrap();
        }
        let mut vars = BTreeMap::new();
        assert_eq!(run(&mut w, &mut vars, "(res)=make ;> [bump(res)]"), Ok(true));
        let res = vars["res"].as_element().unwrap();
        assert_eq!(w.g.get_attr(res, "result").unwrap(), &AttributeValue::Int(4));
        assert_eq!(run(&mut w, &mut vars, "drop(res)"), Ok(true));
        assert_eq!(run(&mut w, &mut vars, "bump(res)"), Err(SeqError::Poisoned("res".into())));
        assert_eq!(run(&mut w, &mut vars, "bump(nope)"), Err(SeqError::Unset("nope".into())));
        assert_eq!(run(&mut w, &mut vars, "missing"), Err(SeqError::UnknownRule("missing".into())));
    }

    #[test]
    fn iteration_cap_is_an_error() {
        let mut w = world();
        let mut vars = BTreeMap::new();
        assert_eq!(run(&mut w, &mut vars, "always*"), Err(SeqError::IterationCap(50)));
    }

    struct Recorder {
        log: Vec<String>,
        abort_at: Option<usize>,
    }

    impl Observer for Recorder {
        fn event(&mut self, ev: &Event<'_>, _: &Graph) -> Control {
            self.log.push(match ev {
                Event::SequenceStarted { .. } => "start".into(),
                Event::MatchFound { rule, bindings } => format!("match {rule} {}", bindings.len()),
                Event::PreApply { rule } => format!("pre {rule}"),
                Event::PostApply { rule, delta } => format!("post {rule} {}", delta.deleted.len()),
                Event::SequenceFinished { result } => format!("end {result}"),
            });
            if Some(self.log.len()) == self.abort_at {
                Control::Abort
            } else {
                Control::Continue
            }
        }
    }

    #[test]
    fn observer_sees_events_and_can_abort() {
        let mut w = world();
        w.g.add_node("T").unwrap();
        w.g.add_node("T").unwrap();
        let mut vars = BTreeMap::new();
        let mut sink = String::new();
        let mut rec = Recorder {
            log: Vec::new(),
            abort_at: None,
        };
        let seq = parse_sequence("[take]").unwrap();
        let r = Exec {
            graph: &mut w.g,
            rules: &w.rs,
            vars: &mut vars,
            sink: &mut sink,
            observer: Some(&mut rec),
            max_iter: 10,
        }
        .run(&seq);
        assert_eq!(r, Ok(true));
        assert_eq!(
            rec.log,
            ["start", "match take 1", "pre take", "post take 1", "match take 1", "pre take", "post take 1", "end true"]
        );

        let mut w = world();
        w.g.add_node("T").unwrap();
        let mut rec = Recorder {
            log: Vec::new(),
            abort_at: Some(2),
        };
        let r = Exec {
            graph: &mut w.g,
            rules: &w.rs,
            vars: &mut vars,
            sink: &mut sink,
            observer: Some(&mut rec),
            max_iter: 10,
        }
        .run(&seq);
        assert_eq!(r, Ok(false));
        assert_eq!(w.g.node_count(), 1, "abort happens before any rewrite");
        assert_eq!(rec.log.last().unwrap(), "end false");
    }

    #[test]
    fn validate_checks_signatures() {
        let w = world();
        assert!(validate(&parse_sequence("(r)=make ;> [bump(r)]").unwrap(), &w.rs).is_ok());
        assert!(matches!(validate(&parse_sequence("bump").unwrap(), &w.rs), Err(SeqError::Arguments { .. })));
        assert!(matches!(validate(&parse_sequence("(a, b)=make").unwrap(), &w.rs), Err(SeqError::Outputs { .. })));
        assert!(matches!(validate(&parse_sequence("bump(1)").unwrap(), &w.rs), Err(SeqError::Apply(_))));
        assert!(matches!(validate(&parse_sequence("nope").unwrap(), &w.rs), Err(SeqError::UnknownRule(_))));
    }
}
