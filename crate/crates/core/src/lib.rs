//! Graph rewriting over typed, attributed multigraphs.
//!
//! The crate is `no_std` (it needs `alloc`). File formats that involve XML,
//! the batch shell and the debugger live in the `graftool` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod expr;
pub mod graph;
pub mod matcher;
pub(crate) mod lexer;
pub mod model;
pub mod native;
pub mod rewrite;
pub mod rules;
pub mod sequence;
pub mod types;
pub mod value;

pub use error::{ApplyError, EvalError, GraphError, Location, MatchError, RewriteError, SyntaxError, TypeError};
pub use graph::{CountMode, ElementId, Graph};
pub use matcher::{find_matches, first_match, Match};
pub use model::{parse_model, print_model};
pub use native::{read_native, write_native};
pub use types::{AttrKind, ElementKind, EnumDescriptor, TypeDescriptor, TypeGraph, TypeId};
pub use expr::Value;
pub use rewrite::{apply, apply_all, apply_first, Delta, RewriteOutcome};
pub use rules::{parse_rule_file, print_rule_file, RuleError, RuleSet};
pub use sequence::{parse_sequence, Control, EmitSink, Event, Exec, Observer, Seq, SeqError};
pub use value::AttributeValue;
