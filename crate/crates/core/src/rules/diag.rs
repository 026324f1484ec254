use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Location;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagCode {
    Syntax,
    IncludeCycle,
    IncludeMissing,
    UnknownModel,
    UnknownType,
    UnknownAttribute,
    UnknownEnum,
    Undeclared,
    Duplicate,
    Arity,
    KindMismatch,
    Mode,
    Nesting,
    Retype,
}

/// Position in the original (pre-include) sources.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceLoc {
    pub file: String,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    pub loc: SourceLoc,
    pub rule: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}", self.loc)?;
        if let Some(rule) = &self.rule {
            write!(f, " in rule `{rule}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Failure to build a rule set; carries every error found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleError {
    pub diagnostics: Vec<Diagnostic>,
}

impl RuleError {
    pub fn has(&self, code: DiagCode) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }
}

impl fmt::Display for RuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[cfg(feature = "std")]
extern crate std;

#[cfg(feature = "std")]
impl std::error::Error for RuleError {}

/// Maps line numbers of include-spliced text back to their files.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceMap {
    lines: Vec<(u32, u32)>,
    files: Vec<String>,
}

impl SourceMap {
    pub(crate) fn push_line(&mut self, file: &str, line: u32) {
        let idx = match self.files.iter().position(|f| f == file) {
            Some(i) => i,
            None => {
                self.files.push(file.into());
                self.files.len() - 1
            }
        };
        self.lines.push((idx as u32, line));
    }

    pub fn resolve(&self, loc: Location) -> SourceLoc {
        let idx = (loc.line as usize).saturating_sub(1);
        match self.lines.get(idx) {
            Some(&(file, line)) => SourceLoc {
                file: self.files[file as usize].clone(),
                line,
                col: loc.col,
            },
            // end of input: attribute to the file of the last line
            None => match self.lines.last() {
                Some(&(file, line)) => SourceLoc {
                    file: self.files[file as usize].clone(),
                    line: line + (idx - self.lines.len()) as u32 + 1,
                    col: loc.col,
                },
                None => SourceLoc {
                    file: String::new(),
                    line: loc.line,
                    col: loc.col,
                },
            },
        }
    }
}
