//! Command shell, importers, exporters and debugger transport around the
//! graph rewriting engine in `graftool-core`.

pub mod corpus;
pub mod debug;
pub mod ecore;
pub mod export;
pub mod fixtures;
pub mod shell;
pub mod style;
pub mod xmi;
