//! Syntax tree of `.grg` rule files, as written (no name resolution).

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Location;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleFile {
    /// Models named by `using` declarations, in order.
    pub models: Vec<String>,
    pub rules: Vec<RuleAst>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleAst {
    pub name: String,
    pub loc: Location,
    pub params: Vec<ParamAst>,
    /// Declared out-parameter types, `:(T, ...)`.
    pub outputs: Vec<String>,
    pub pattern: PatternAst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamAst {
    pub name: String,
    /// Node type, edge type, enum or scalar kind name; resolved later.
    pub ty: String,
    pub is_edge: bool,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PatternAst {
    pub stmts: Vec<PatternStmt>,
    pub rewrite: Option<RewriteAst>,
    pub loc: Location,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NestedKind {
    Negative,
    Independent,
    Iterated,
    Multiple,
}

impl NestedKind {
    pub fn keyword(self) -> &'static str {
        match self {
            NestedKind::Negative => "negative",
            NestedKind::Independent => "independent",
            NestedKind::Iterated => "iterated",
            NestedKind::Multiple => "multiple",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatternStmt {
    Graphlet(Graphlet),
    If(Vec<Expr>),
    Hom(Vec<String>, Location),
    Nested(NestedKind, PatternAst),
    Alternative(Vec<(String, PatternAst)>, Location),
}

/// A node spec: `n`, `n:T`, `:T`, or the retyping form `y:T<x>`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub name: Option<String>,
    pub ty: Option<String>,
    pub retype_from: Option<String>,
    pub loc: Location,
}

/// An edge spec between the dashes: `-e->`, `-e:T->`, `-:T->`, `-->`, `-y:T<x>->`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub name: Option<String>,
    pub ty: Option<String>,
    pub retype_from: Option<String>,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Graphlet {
    Node(NodeSpec),
    /// Endpoints are normalized to source/target regardless of arrow direction.
    Edge {
        src: Option<NodeSpec>,
        edge: EdgeSpec,
        trg: Option<NodeSpec>,
        /// Written as `<-...-`; kept only for faithful printing.
        reversed: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewriteMode {
    Replace,
    Modify,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewriteAst {
    pub mode: RewriteMode,
    pub stmts: Vec<RewriteStmt>,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub target: String,
    pub attr: String,
    pub value: Expr,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RewriteStmt {
    Graphlet(Graphlet),
    Delete(Vec<String>, Location),
    Eval(Vec<Assignment>),
    Emit(Vec<Expr>, Location),
    Return(Vec<Expr>, Location),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    EnumItem(String, String),
    Name(String),
    Attr(String, String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}
