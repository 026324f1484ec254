use alloc::string::String;
use core::fmt;

use thiserror::Error;

use crate::graph::ElementId;

/// 1-based line/column position in a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Location {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{loc}: {message}")]
pub struct SyntaxError {
    pub loc: Location,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("type `{ty}` extends unknown type `{sup}`")]
    UnknownSupertype { ty: String, sup: String },
    #[error("type `{ty}` cannot extend `{sup}`: node and edge hierarchies are separate")]
    SupertypeKind { ty: String, sup: String },
    #[error("inheritance cycle through `{0}`")]
    InheritanceCycle(String),
    #[error("attribute `{attr}` of `{ty}` is declared in both `{first}` and `{second}`")]
    DuplicateAttribute {
        ty: String,
        attr: String,
        first: String,
        second: String,
    },
    #[error("name `{0}` is declared more than once")]
    DuplicateName(String),
    #[error("unknown enum `{0}`")]
    UnknownEnum(String),
    #[error("enum `{name}`: {reason}")]
    InvalidEnum { name: String, reason: String },
    #[error("container kinds may only hold scalar kinds")]
    NestedContainer,
    #[error("`{0}` is a built-in root type and cannot be redeclared")]
    RootRedeclared(String),
    #[error("type `{ty}` is not a {expected} type")]
    WrongKind { ty: String, expected: &'static str },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("type `{0}` is abstract")]
    AbstractType(String),
    #[error("element {0} does not exist")]
    DeadElement(ElementId),
    #[error("type `{ty}` has no attribute `{attr}`")]
    UnknownAttribute { ty: String, attr: String },
    #[error("attribute `{attr}` expects {expected}, got {found}")]
    AttrKindMismatch {
        attr: String,
        expected: String,
        found: String,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Errors raised while evaluating expressions at match or rewrite time.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchError {
    #[error("rule `{rule}` expects {expected} arguments, got {found}")]
    Arity {
        rule: String,
        expected: usize,
        found: usize,
    },
    #[error("argument `{param}` of rule `{rule}`: {reason}")]
    BadArgument {
        rule: String,
        param: String,
        reason: String,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("stale match: element {0} was deleted after matching")]
    StaleMatch(ElementId),
    #[error("rule `{0}` has errors and cannot be applied")]
    IllFormed(String),
    #[error("rule `{rule}`: {source}")]
    Eval {
        rule: String,
        #[source]
        source: EvalError,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Failure of a combined match-and-rewrite step.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApplyError {
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}
