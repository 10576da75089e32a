//! Prompt assembly for generation and retry-with-feedback.
//!
//! Prompts are rendered from a plain-text template with `[system]`, `[user]`
//! and `[feedback]` sections and `{{placeholder}}` slots. The first two
//! sections form the generation prompt; a retry appends the feedback section
//! as one more user message, so a generation prompt is always a prefix of the
//! retry prompt built from the same spec.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsl::{Diagnostic, GRAMMAR_EBNF};

pub const DEFAULT_TEMPLATE: &str = include_str!("../../data/prompt_template.txt");

/// Example pair shipped with the crate. It was written for this project and
/// does not come from any published prompt.
pub const DEFAULT_EXAMPLE_INPUT: &str = include_str!("../../data/example_input.txt");
pub const DEFAULT_EXAMPLE_DSL: &str = include_str!("../../data/example.dsl");

pub const DEFAULT_ROLE_PREAMBLE: &str = "You are a DSL generator. Given a user's intent to create a website or system, you must generate a DSL-style data model.";

/// Default rules. Entries indented with two spaces render as sub-bullets.
pub const DEFAULT_RULES: &[&str] = &[
    "Only output the DSL: no explanations, comments, or extra text.",
    "Follow the grammar for generation. The output must comply with the rules given below.",
    "Analyze the user input and expand the idea to ensure the data model covers all necessary aspects, entities, and relationships.",
    "Use the exact syntax and style shown in the example:",
    "  `main concept` for the central concept",
    "  `concept` for entities",
    "  `enum` for enumerations",
    "  `one`, `some`, `lone` for cardinality",
    "  `-->` for one-way references",
    "  `<>-->` for many-to-many or one-to-many bidirectional associations",
    "  `isId` to mark identifiers",
    "  `subset of` to indicate constrained relationships",
    "  Provide default values for enums or primitives where applicable",
];

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("grammar text is empty")]
    EmptyGrammar,
    #[error("user input is empty")]
    EmptyUserInput,
    #[error("at least one example pair is required")]
    NoExamples,
    #[error("a retry prompt needs at least one diagnostic")]
    NoDiagnostics,
    #[error("diagnostic span line {line}, column {column} is outside the source")]
    SpanOutOfRange { line: u32, column: u32 },
    #[error("template is missing the `[{0}]` section")]
    MissingSection(&'static str),
    #[error("template has unknown placeholder `{{{{{0}}}}}`")]
    UnknownPlaceholder(String),
    #[error("template has an unclosed `{{{{` placeholder")]
    UnclosedPlaceholder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamplePair {
    pub user_input: String,
    pub dsl: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub role_preamble: String,
    pub rules: Vec<String>,
    pub grammar_text: String,
    pub examples: Vec<ExamplePair>,
    pub user_input: String,
    #[serde(default)]
    pub feedback: Option<String>,
    #[serde(default)]
    pub prior_output: Option<String>,
}

impl PromptSpec {
    /// Spec with the default preamble, rules, grammar and example pair.
    pub fn new(user_input: impl Into<String>) -> Self {
        Self {
            role_preamble: DEFAULT_ROLE_PREAMBLE.to_string(),
            rules: DEFAULT_RULES.iter().map(|r| r.to_string()).collect(),
            grammar_text: GRAMMAR_EBNF.to_string(),
            examples: vec![ExamplePair {
                user_input: DEFAULT_EXAMPLE_INPUT.trim().to_string(),
                dsl: DEFAULT_EXAMPLE_DSL.trim_end().to_string(),
            }],
            user_input: user_input.into(),
            feedback: None,
            prior_output: None,
        }
    }

    pub fn with_examples(mut self, examples: Vec<ExamplePair>) -> Self {
        self.examples = examples;
        self
    }

    fn check(&self) -> Result<(), PromptError> {
        if self.grammar_text.trim().is_empty() {
            return Err(PromptError::EmptyGrammar);
        }
        if self.user_input.trim().is_empty() {
            return Err(PromptError::EmptyUserInput);
        }
        if self.examples.is_empty() {
            return Err(PromptError::NoExamples);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub messages: Vec<Message>,
    pub template_hash: String,
}

impl RenderedPrompt {
    /// All messages joined, for completion-only backends and logs.
    pub fn flatten(&self) -> String {
        let mut out = String::new();
        for (i, m) in self.messages.iter().enumerate() {
            if i > 0 {
                out.push_str("\n\n");
            }
            let role = match m.role {
                Role::System => "SYSTEM",
                Role::User => "USER",
            };
            let _ = write!(out, "### {role}\n{}", m.content);
        }
        out
    }
}

const PLACEHOLDERS: &[&str] = &[
    "role_preamble",
    "rules",
    "grammar",
    "examples",
    "user_input",
    "feedback",
    "prior_output",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    source: String,
    system: String,
    user: String,
    feedback: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::parse(DEFAULT_TEMPLATE).expect("bundled template is well-formed")
    }
}

impl PromptTemplate {
    pub fn parse(text: &str) -> Result<Self, PromptError> {
        let mut sections: [Option<String>; 3] = [None, None, None];
        let mut current: Option<usize> = None;
        for line in text.lines() {
            let idx = match line.trim_end() {
                "[system]" => Some(0),
                "[user]" => Some(1),
                "[feedback]" => Some(2),
                _ => None,
            };
            if let Some(i) = idx {
                current = Some(i);
                sections[i] = Some(String::new());
                continue;
            }
            if let Some(i) = current {
                let s = sections[i].as_mut().expect("section opened");
                s.push_str(line);
                s.push('\n');
            }
        }
        let [system, user, feedback] = sections;
        let t = Self {
            source: text.to_string(),
            system: system.ok_or(PromptError::MissingSection("system"))?.trim_end().to_string(),
            user: user.ok_or(PromptError::MissingSection("user"))?.trim_end().to_string(),
            feedback: feedback.ok_or(PromptError::MissingSection("feedback"))?.trim_end().to_string(),
        };
        for part in [&t.system, &t.user, &t.feedback] {
            for name in placeholders(part)? {
                if !PLACEHOLDERS.contains(&name.as_str()) {
                    return Err(PromptError::UnknownPlaceholder(name));
                }
            }
        }
        Ok(t)
    }

    pub fn load(path: &std::path::Path) -> std::io::Result<Result<Self, PromptError>> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    fn hash(&self, spec: &PromptSpec) -> String {
        let mut h = Sha256::new();
        h.update(self.source.as_bytes());
        h.update([0u8]);
        h.update(serde_json::to_vec(spec).expect("spec serializes"));
        hex::encode(h.finalize())
    }

    pub fn build_generation_prompt(&self, spec: &PromptSpec) -> Result<RenderedPrompt, PromptError> {
        spec.check()?;
        let vars = Vars::from_spec(spec);
        Ok(RenderedPrompt {
            messages: vec![
                Message {
                    role: Role::System,
                    content: fill(&self.system, &vars),
                },
                Message {
                    role: Role::User,
                    content: fill(&self.user, &vars),
                },
            ],
            template_hash: self.hash(spec),
        })
    }

    pub fn build_retry_prompt(
        &self,
        spec: &PromptSpec,
        prior_output: &str,
        diagnostics: &[Diagnostic],
    ) -> Result<RenderedPrompt, PromptError> {
        if diagnostics.is_empty() {
            return Err(PromptError::NoDiagnostics);
        }
        let base = PromptSpec {
            feedback: None,
            prior_output: None,
            ..spec.clone()
        };
        let mut rendered = self.build_generation_prompt(&base)?;
        let mut ordered: Vec<&Diagnostic> = diagnostics.iter().collect();
        ordered.sort_by_key(|d| (d.span.line, d.span.column));
        let feedback = ordered
            .iter()
            .map(|d| d.one_line())
            .collect::<Vec<_>>()
            .join("\n");
        let full = PromptSpec {
            feedback: Some(feedback),
            prior_output: Some(prior_output.trim_end().to_string()),
            ..base
        };
        let vars = Vars::from_spec(&full);
        rendered.messages.push(Message {
            role: Role::User,
            content: fill(&self.feedback, &vars),
        });
        rendered.template_hash = self.hash(&full);
        Ok(rendered)
    }
}

pub fn build_generation_prompt(spec: &PromptSpec) -> Result<RenderedPrompt, PromptError> {
    PromptTemplate::default().build_generation_prompt(spec)
}

pub fn build_retry_prompt(
    spec: &PromptSpec,
    prior_output: &str,
    diagnostics: &[Diagnostic],
) -> Result<RenderedPrompt, PromptError> {
    PromptTemplate::default().build_retry_prompt(spec, prior_output, diagnostics)
}

struct Vars {
    values: Vec<(&'static str, String)>,
}

impl Vars {
    fn from_spec(spec: &PromptSpec) -> Self {
        let rules = spec
            .rules
            .iter()
            .map(|r| match r.strip_prefix("  ") {
                Some(sub) => format!("  - {}", sub.trim_start()),
                None => format!("- {r}"),
            })
            .collect::<Vec<_>>()
            .join("\n");
        let examples = spec
            .examples
            .iter()
            .map(|e| format!("Example:\nUser Input: {}\nDSL:\n{}\n", e.user_input, e.dsl))
            .collect::<Vec<_>>()
            .join("\n");
        Self {
            values: vec![
                ("role_preamble", spec.role_preamble.clone()),
                ("rules", rules),
                ("grammar", spec.grammar_text.clone()),
                ("examples", examples),
                ("user_input", spec.user_input.clone()),
                ("feedback", spec.feedback.clone().unwrap_or_default()),
                ("prior_output", spec.prior_output.clone().unwrap_or_default()),
            ],
        }
    }

    fn get(&self, name: &str) -> &str {
        self.values
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| v.as_str())
            .unwrap_or("")
    }
}

fn placeholders(text: &str) -> Result<Vec<String>, PromptError> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("{{") {
        let after = &rest[start + 2..];
        let end = after.find("}}").ok_or(PromptError::UnclosedPlaceholder)?;
        out.push(after[..end].to_string());
        rest = &after[end + 2..];
    }
    Ok(out)
}

/// Single left-to-right pass, so substituted values are never re-scanned.
fn fill(text: &str, vars: &Vars) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after.find("}}").expect("validated at parse");
        out.push_str(vars.get(&after[..end]));
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    out
}

/// Renders each diagnostic with the offending source line and a caret
/// marker beneath its span.
pub fn render_feedback(diagnostics: &[Diagnostic], source: &str) -> Result<String, PromptError> {
    let lines: Vec<&str> = source.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    let mut out = String::new();
    for d in diagnostics {
        let (line, col) = (d.span.line, d.span.column);
        let out_of_range = PromptError::SpanOutOfRange { line, column: col };
        let text = lines
            .get((line as usize).wrapping_sub(1))
            .ok_or(out_of_range.clone())?;
        let width = text.chars().count();
        if col == 0 || col as usize > width + 1 {
            return Err(out_of_range);
        }
        let gutter = line.to_string();
        let pad: String = text
            .chars()
            .take(col as usize - 1)
            .map(|c| if c == '\t' { '\t' } else { ' ' })
            .collect();
        let available = (width + 1 - col as usize).max(1);
        let carets = "^".repeat((d.span.length as usize).min(available).max(1));
        let _ = writeln!(out, "{}", d.one_line());
        let _ = writeln!(out, " {gutter} | {text}");
        let _ = writeln!(out, " {} | {pad}{carets}", " ".repeat(gutter.len()));
        if let Some(hint) = &d.hint {
            let _ = writeln!(out, " {} = hint: {hint}", " ".repeat(gutter.len()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, DiagnosticCode, SourceSpan};

    const ICE_CREAM: &str = "I want to create the website for online icecream parlor";

    fn diag(code: DiagnosticCode, line: u32, col: u32, msg: &str) -> Diagnostic {
        Diagnostic::error(code, SourceSpan::new(line, col, 1, 0), msg)
    }

    #[test]
    fn ice_cream_request_ends_user_message() {
        let p = build_generation_prompt(&PromptSpec::new(ICE_CREAM)).unwrap();
        assert_eq!(p.messages.len(), 2);
        assert_eq!(p.messages[0].role, Role::System);
        assert!(p.messages[1]
            .content
            .ends_with(r#"Now, generate a DSL for: "I want to create the website for online icecream parlor""#));
    }

    #[test]
    fn section_order() {
        let spec = PromptSpec::new(ICE_CREAM);
        let p = build_generation_prompt(&spec).unwrap();
        let sys = &p.messages[0].content;
        let pre = sys.find(DEFAULT_ROLE_PREAMBLE).unwrap();
        let rules = sys.find("Rules:").unwrap();
        let grammar = sys.find(&spec.grammar_text).unwrap();
        assert!(pre < rules && rules < grammar);
        assert!(sys.contains("  - `isId` to mark identifiers"));
    }

    #[test]
    fn hash_is_deterministic() {
        let spec = PromptSpec::new(ICE_CREAM);
        let a = build_generation_prompt(&spec).unwrap();
        let b = build_generation_prompt(&spec).unwrap();
        assert_eq!(a, b);
        let mut other = spec.clone();
        other.rules.pop();
        assert_ne!(build_generation_prompt(&other).unwrap().template_hash, a.template_hash);
    }

    #[test]
    fn examples_in_order_before_request() {
        let spec = PromptSpec::new(ICE_CREAM).with_examples(vec![
            ExamplePair { user_input: "first input".into(), dsl: "concept First {}".into() },
            ExamplePair { user_input: "second input".into(), dsl: "concept Second {}".into() },
        ]);
        let user = build_generation_prompt(&spec).unwrap().messages[1].content.clone();
        let a = user.find("concept First {}").unwrap();
        let b = user.find("concept Second {}").unwrap();
        let req = user.find("Now, generate").unwrap();
        assert!(a < b && b < req);
        assert_eq!(user.matches("Example:").count(), 2);
    }

    #[test]
    fn rejects_empty_inputs() {
        let mut spec = PromptSpec::new("  ");
        assert_eq!(build_generation_prompt(&spec), Err(PromptError::EmptyUserInput));
        spec.user_input = "x".into();
        spec.grammar_text.clear();
        assert_eq!(build_generation_prompt(&spec), Err(PromptError::EmptyGrammar));
    }

    #[test]
    fn retry_with_e103() {
        let src = "concept A { one n : string }";
        let errs = parse(src).unwrap_err();
        let spec = PromptSpec::new(ICE_CREAM);
        let p = build_retry_prompt(&spec, src, &errs).unwrap();
        let gen = build_generation_prompt(&spec).unwrap();
        assert_eq!(p.messages[..2], gen.messages[..]);
        let fb = &p.messages[2].content;
        assert!(fb.contains("[E103]"));
        assert!(fb.contains("expected: ;"));
        assert!(fb.contains(&format!("```\n{src}\n```")));
        assert_ne!(p.template_hash, gen.template_hash);
    }

    #[test]
    fn retry_lines_in_source_order() {
        let ds = vec![
            diag(DiagnosticCode::V102, 3, 1, "third"),
            diag(DiagnosticCode::V101, 1, 4, "first"),
            diag(DiagnosticCode::V201, 2, 2, "second"),
        ];
        let p = build_retry_prompt(&PromptSpec::new(ICE_CREAM), "x", &ds).unwrap();
        let fb = &p.messages[2].content;
        let lines: Vec<&str> = fb.lines().filter(|l| l.starts_with("line ")).collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].ends_with("first") && lines[1].ends_with("second") && lines[2].ends_with("third"));
    }

    #[test]
    fn retry_requires_diagnostics() {
        assert_eq!(
            build_retry_prompt(&PromptSpec::new(ICE_CREAM), "x", &[]),
            Err(PromptError::NoDiagnostics)
        );
    }

    #[test]
    fn caret_under_offending_token() {
        let src = "one x y;";
        let d = diag(DiagnosticCode::E101, 1, 7, "unexpected `y`");
        let out = render_feedback(&[d], src).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        let code_line = lines[1];
        let caret_line = lines[2];
        let y_at = code_line.find('y').unwrap();
        assert_eq!(caret_line.find('^').unwrap(), y_at);
        let d5 = diag(DiagnosticCode::E101, 1, 5, "unexpected `x`");
        let out = render_feedback(&[d5], src).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[2].find('^').unwrap(), lines[1].find('x').unwrap());
    }

    #[test]
    fn empty_feedback() {
        assert_eq!(render_feedback(&[], "anything").unwrap(), "");
    }

    #[test]
    fn quotes_the_right_line() {
        let src = "concept A {\n  one a : int;\n  one b : Bogus;\n}";
        let d = diag(DiagnosticCode::V101, 3, 11, "unresolved");
        let out = render_feedback(&[d], src).unwrap();
        assert_eq!(out.lines().nth(1).unwrap(), " 3 |   one b : Bogus;");
    }

    #[test]
    fn out_of_range_span() {
        let d = diag(DiagnosticCode::E101, 9, 1, "x");
        assert!(matches!(render_feedback(&[d], "a\nb"), Err(PromptError::SpanOutOfRange { .. })));
        let d = diag(DiagnosticCode::E101, 1, 5, "x");
        assert!(render_feedback(&[d], "ab").is_err());
    }

    #[test]
    fn template_placeholders_are_checked() {
        assert_eq!(
            PromptTemplate::parse("[system]\n{{nope}}\n[user]\n[feedback]\n"),
            Err(PromptError::UnknownPlaceholder("nope".into()))
        );
        assert_eq!(
            PromptTemplate::parse("[user]\n[feedback]\n"),
            Err(PromptError::MissingSection("system"))
        );
    }

    #[test]
    fn values_are_not_rescanned() {
        let spec = PromptSpec::new("make {{grammar}} literal");
        let p = build_generation_prompt(&spec).unwrap();
        assert!(p.messages[1].content.contains("make {{grammar}} literal"));
    }
}
