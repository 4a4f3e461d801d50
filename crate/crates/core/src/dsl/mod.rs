//! Circuit description language: parsing, execution and JSON reports.

mod exec;
mod json;
mod parse;

use std::fmt;

pub use exec::{execute, BranchRecord, ExecOptions, QubitState, RunReport, StepReport, SuiteEntry};
pub use json::to_canonical_json;
pub use parse::{parse_circuit, parse_circuit_with, CircuitProgram, Directive, Step};

/// What went wrong while parsing a circuit line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    InvalidSubsystem(String),
    NotUnitary(String),
}

/// A parse failure at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, msg) = match &self.kind {
            ParseErrorKind::Syntax(m) => ("syntax error", m),
            ParseErrorKind::InvalidSubsystem(m) => ("invalid subsystem", m),
            ParseErrorKind::NotUnitary(m) => ("non-unitary gate", m),
        };
        write!(f, "line {}, column {}: {tag}: {msg}", self.line, self.column)
    }
}
