//! Source diagnostics with positions.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// One problem found in a source text. `line` and `column` are 1-based and
/// point at the offending token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: u32,
    pub column: u32,
    pub source_name: String,
}

impl Diagnostic {
    pub fn error(source_name: &str, line: u32, column: u32, message: String) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message,
            line,
            column,
            source_name: String::from(source_name),
        }
    }

    pub fn warning(source_name: &str, line: u32, column: u32, message: String) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message,
            line,
            column,
            source_name: String::from(source_name),
        }
    }
}

impl fmt::Display for Diagnostic {
    /// `file:line:col: severity: message`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}: {}",
            self.source_name, self.line, self.column, self.severity, self.message
        )
    }
}
