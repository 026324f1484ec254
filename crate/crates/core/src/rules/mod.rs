//! The rule language: syntax, printing and resolution against a model.

pub mod ast;
pub mod compile;
pub mod diag;
pub mod parser;
pub mod print;

pub use compile::{CompiledRule, Param, ParamKind, RuleSet};
pub use diag::{DiagCode, Diagnostic, RuleError, Severity, SourceLoc};
pub use parser::{parse_rule_file, parse_rule_text, IncludeResolver, NoIncludes};
pub use print::print_rule_file;
