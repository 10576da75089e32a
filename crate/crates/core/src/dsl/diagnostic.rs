//! Source spans and the coded diagnostics shared by the parser and validator.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A located region of source text.
///
/// `line` and `column` are 1-based and count characters, `byte_offset` is the
/// 0-based UTF-8 offset of the first character, and `length` is in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
    pub byte_offset: usize,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32, byte_offset: usize) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        Self {
            line,
            column,
            length: length.max(1),
            byte_offset,
        }
    }

    /// Span used where no better location exists (e.g. findings about an empty model).
    pub fn start_of_input() -> Self {
        Self::new(1, 1, 1, 0)
    }

    /// Extracts the text covered by this span, if it lies within `source`.
    pub fn slice<'a>(&self, source: &'a str) -> Option<&'a str> {
        let rest = source.get(self.byte_offset..)?;
        let end = rest
            .char_indices()
            .nth(self.length as usize)
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        Some(&rest[..end])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

macro_rules! diagnostic_codes {
    ($($variant:ident => $code:literal, $summary:literal;)*) => {
        /// Every diagnostic code the toolchain can emit. `E` codes come from the
        /// lexer and parser, `V` codes from the semantic validator.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum DiagnosticCode {
            $($variant,)*
        }

        impl DiagnosticCode {
            pub const ALL: &'static [DiagnosticCode] = &[$(DiagnosticCode::$variant,)*];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $(DiagnosticCode::$variant => $code,)*
                }
            }

            /// One-line description of the category.
            pub fn summary(&self) -> &'static str {
                match self {
                    $(DiagnosticCode::$variant => $summary,)*
                }
            }

            pub fn parse(code: &str) -> Option<Self> {
                match code {
                    $($code => Some(DiagnosticCode::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

diagnostic_codes! {
    E001 => "E001", "unknown character";
    E002 => "E002", "unterminated string";
    E003 => "E003", "unterminated block comment";
    E101 => "E101", "unexpected token";
    E102 => "E102", "unexpected end of input";
    E103 => "E103", "missing statement terminator";
    E900 => "E900", "no output: backend request failed";
    V101 => "V101", "unresolved attribute type";
    V102 => "V102", "unresolved reference target";
    V201 => "V201", "unknown extends target";
    V202 => "V202", "extends target is an enum";
    V203 => "V203", "self-inheritance";
    V204 => "V204", "inheritance cycle";
    V301 => "V301", "subset parent relation not found";
    V302 => "V302", "subset declared outside the owner's hierarchy";
    V303 => "V303", "subset target not covariant with parent target";
    V304 => "V304", "subset cardinality wider than parent";
    V401 => "V401", "duplicate top-level name";
    V402 => "V402", "duplicate feature name";
    V403 => "V403", "duplicate enum literal";
    V501 => "V501", "no main concept";
    V502 => "V502", "more than one main concept";
    V601 => "V601", "default value kind mismatch";
    V602 => "V602", "enum default not a member";
    V701 => "V701", "isId on non-primitive attribute";
    V702 => "V702", "isId with cardinality other than one";
    V703 => "V703", "more than one isId along the inheritance chain";
}

impl DiagnosticCode {
    pub fn is_syntax(&self) -> bool {
        self.as_str().starts_with('E')
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for DiagnosticCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for DiagnosticCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        DiagnosticCode::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown diagnostic code `{s}`")))
    }
}

/// A coded, located finding about a DSL document.
///
/// Serializes flat: `{code, severity, line, column, length, byte_offset,
/// message, expected, hint}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub severity: Severity,
    #[serde(flatten)]
    pub span: SourceSpan,
    pub message: String,
    #[serde(default)]
    pub expected: Vec<String>,
    #[serde(default)]
    pub hint: Option<String>,
}

impl Diagnostic {
    pub fn error(code: DiagnosticCode, span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            code,
            severity: Severity::Error,
            span,
            message: message.into(),
            expected: Vec::new(),
            hint: None,
        }
    }

    pub fn warning(code: DiagnosticCode, span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(code, span, message)
        }
    }

    pub fn with_expected(mut self, expected: Vec<String>) -> Self {
        self.expected = expected;
        self
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Single-line rendering: `line L, col C: [CODE] message (expected: ...)`.
    pub fn one_line(&self) -> String {
        let mut out = format!(
            "line {}, col {}: [{}] {}",
            self.span.line, self.span.column, self.code, self.message
        );
        if !self.expected.is_empty() {
            out.push_str(&format!(" (expected: {})", self.expected.join(", ")));
        }
        out
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.one_line())
    }
}
