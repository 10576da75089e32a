//! Tokenizer for the entity-modeling DSL.

use std::fmt;

use super::diagnostic::{Diagnostic, DiagnosticCode, SourceSpan};

/// Terminal symbols of the DSL grammar.
///
/// Declaration order is significant: expected-token lists are reported in
/// this order, so the statement terminator comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Semicolon,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Equals,
    Dot,
    Arrow,
    BiArrow,
    Main,
    Concept,
    Extends,
    Enum,
    One,
    Some,
    Lone,
    IsId,
    Subset,
    Of,
    StringType,
    IntType,
    FloatType,
    BoolType,
    DateType,
    True,
    False,
    Ident,
    StringLit,
    IntLit,
    FloatLit,
    Eof,
}

impl TokenKind {
    pub const ALL: [TokenKind; 31] = [
        TokenKind::Semicolon,
        TokenKind::LBrace,
        TokenKind::RBrace,
        TokenKind::Comma,
        TokenKind::Colon,
        TokenKind::Equals,
        TokenKind::Dot,
        TokenKind::Arrow,
        TokenKind::BiArrow,
        TokenKind::Main,
        TokenKind::Concept,
        TokenKind::Extends,
        TokenKind::Enum,
        TokenKind::One,
        TokenKind::Some,
        TokenKind::Lone,
        TokenKind::IsId,
        TokenKind::Subset,
        TokenKind::Of,
        TokenKind::StringType,
        TokenKind::IntType,
        TokenKind::FloatType,
        TokenKind::BoolType,
        TokenKind::DateType,
        TokenKind::True,
        TokenKind::False,
        TokenKind::Ident,
        TokenKind::StringLit,
        TokenKind::IntLit,
        TokenKind::FloatLit,
        TokenKind::Eof,
    ];

    /// Name used in expected-token lists.
    pub fn name(&self) -> &'static str {
        match self {
            TokenKind::Semicolon => ";",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Comma => ",",
            TokenKind::Colon => ":",
            TokenKind::Equals => "=",
            TokenKind::Dot => ".",
            TokenKind::Arrow => "-->",
            TokenKind::BiArrow => "<>-->",
            TokenKind::Main => "main",
            TokenKind::Concept => "concept",
            TokenKind::Extends => "extends",
            TokenKind::Enum => "enum",
            TokenKind::One => "one",
            TokenKind::Some => "some",
            TokenKind::Lone => "lone",
            TokenKind::IsId => "isId",
            TokenKind::Subset => "subset",
            TokenKind::Of => "of",
            TokenKind::StringType => "string",
            TokenKind::IntType => "int",
            TokenKind::FloatType => "float",
            TokenKind::BoolType => "bool",
            TokenKind::DateType => "date",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::Ident => "IDENT",
            TokenKind::StringLit => "STRING",
            TokenKind::IntLit => "INT",
            TokenKind::FloatLit => "FLOAT",
            TokenKind::Eof => "EOF",
        }
    }

    pub fn keyword(word: &str) -> Option<TokenKind> {
        Some(match word {
            "main" => TokenKind::Main,
            "concept" => TokenKind::Concept,
            "extends" => TokenKind::Extends,
            "enum" => TokenKind::Enum,
            "one" => TokenKind::One,
            "some" => TokenKind::Some,
            "lone" => TokenKind::Lone,
            "isId" => TokenKind::IsId,
            "subset" => TokenKind::Subset,
            "of" => TokenKind::Of,
            "string" => TokenKind::StringType,
            "int" => TokenKind::IntType,
            "float" => TokenKind::FloatType,
            "bool" => TokenKind::BoolType,
            "date" => TokenKind::DateType,
            "true" => TokenKind::True,
            "false" => TokenKind::False,
            _ => return None,
        })
    }

    pub fn is_keyword(&self) -> bool {
        TokenKind::keyword(self.name()) == Some(*self)
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every reserved word of the language.
pub const KEYWORDS: &[&str] = &[
    "main", "concept", "extends", "enum", "one", "some", "lone", "isId", "subset", "of", "string",
    "int", "float", "bool", "date", "true", "false",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, u32, u32) {
        (self.pos, self.line, self.col)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `source` into tokens, ending with a single `Eof` token.
///
/// Whitespace, `//` line comments and `/* */` block comments are skipped.
/// All lexical errors are collected; if any occur the token stream is
/// discarded and the diagnostics are returned instead.
pub fn tokenize(source: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    while let Some(c) = cur.peek() {
        let (start, line, col) = cur.mark();

        if c.is_whitespace() || c == '\u{feff}' {
            cur.bump();
            continue;
        }

        if c == '/' && cur.peek_nth(1) == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }

        if c == '/' && cur.peek_nth(1) == Some('*') {
            cur.bump();
            cur.bump();
            let mut closed = false;
            while cur.peek().is_some() {
                if cur.rest().starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    closed = true;
                    break;
                }
                cur.bump();
            }
            if !closed {
                errors.push(
                    Diagnostic::error(
                        DiagnosticCode::E003,
                        SourceSpan::new(line, col, 2, start),
                        "unterminated block comment",
                    )
                    .with_hint("close the comment with `*/`"),
                );
            }
            continue;
        }

        let push = |tokens: &mut Vec<Token>, kind, cur: &Cursor| {
            let lexeme = &source[start..cur.pos];
            tokens.push(Token {
                kind,
                lexeme: lexeme.to_string(),
                span: SourceSpan::new(line, col, lexeme.chars().count() as u32, start),
            });
        };

        if is_ident_start(c) {
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            let word = &source[start..cur.pos];
            let kind = TokenKind::keyword(word).unwrap_or(TokenKind::Ident);
            push(&mut tokens, kind, &cur);
            continue;
        }

        let signed_number = c == '-' && cur.peek_nth(1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || signed_number {
            cur.bump();
            while cur.peek().is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
            }
            let mut kind = TokenKind::IntLit;
            if cur.peek() == Some('.') && cur.peek_nth(1).is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
                while cur.peek().is_some_and(|d| d.is_ascii_digit()) {
                    cur.bump();
                }
                kind = TokenKind::FloatLit;
            }
            push(&mut tokens, kind, &cur);
            continue;
        }

        if c == '"' {
            cur.bump();
            let mut closed = false;
            while let Some(c) = cur.peek() {
                match c {
                    '"' => {
                        cur.bump();
                        closed = true;
                        break;
                    }
                    '\\' => {
                        cur.bump();
                        if cur.peek().is_some_and(|n| n != '\n') {
                            cur.bump();
                        }
                    }
                    '\n' => break,
                    _ => {
                        cur.bump();
                    }
                }
            }
            if closed {
                push(&mut tokens, TokenKind::StringLit, &cur);
            } else {
                let len = source[start..cur.pos].trim_end_matches('\r').chars().count();
                errors.push(
                    Diagnostic::error(
                        DiagnosticCode::E002,
                        SourceSpan::new(line, col, len as u32, start),
                        "unterminated string literal",
                    )
                    .with_hint("close the string with `\"` on the same line"),
                );
            }
            continue;
        }

        if let Some((text, kind)) = fixed_token(cur.rest()) {
            for _ in 0..text.len() {
                cur.bump();
            }
            push(&mut tokens, kind, &cur);
            continue;
        }

        // One diagnostic per run of adjacent unknown characters.
        cur.bump();
        while cur.peek().is_some_and(|n| is_unknown_start(n, cur.rest())) {
            cur.bump();
        }
        let lexeme = &source[start..cur.pos];
        let hint = if lexeme.contains(['-', '>', '<']) {
            "references use `-->` (one-way) or `<>-->` (bidirectional)"
        } else {
            "only identifiers, literals, keywords, `{ } ; : , = .`, `-->` and `<>-->` are allowed"
        };
        let what = if lexeme.chars().count() == 1 { "character" } else { "characters" };
        errors.push(
            Diagnostic::error(
                DiagnosticCode::E001,
                SourceSpan::new(line, col, lexeme.chars().count() as u32, start),
                format!("unknown {what} `{lexeme}`"),
            )
            .with_hint(hint),
        );
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    tokens.push(Token {
        kind: TokenKind::Eof,
        lexeme: String::new(),
        span: SourceSpan::new(cur.line, cur.col, 1, source.len()),
    });
    Ok(tokens)
}

const FIXED: [(&str, TokenKind); 9] = [
    ("<>-->", TokenKind::BiArrow),
    ("-->", TokenKind::Arrow),
    (";", TokenKind::Semicolon),
    ("{", TokenKind::LBrace),
    ("}", TokenKind::RBrace),
    (",", TokenKind::Comma),
    (":", TokenKind::Colon),
    ("=", TokenKind::Equals),
    (".", TokenKind::Dot),
];

fn fixed_token(rest: &str) -> Option<(&'static str, TokenKind)> {
    FIXED.iter().find(|(t, _)| rest.starts_with(t)).copied()
}

/// True when `c`, at the start of `rest`, begins no valid token.
fn is_unknown_start(c: char, rest: &str) -> bool {
    !(c.is_whitespace()
        || is_ident_start(c)
        || c.is_ascii_digit()
        || c == '"'
        || rest.starts_with("//")
        || rest.starts_with("/*")
        || (c == '-' && rest[1..].starts_with(|d: char| d.is_ascii_digit()))
        || fixed_token(rest).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn empty_concept() {
        use TokenKind::*;
        assert_eq!(kinds("concept A {}"), vec![Concept, Ident, LBrace, RBrace, Eof]);
    }

    #[test]
    fn unknown_character_is_located() {
        let errs = tokenize("x @ y").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, DiagnosticCode::E001);
        assert_eq!((errs[0].span.line, errs[0].span.column), (1, 3));
        assert!(errs[0].message.contains("`@`"));
        assert_eq!(errs[0].span.slice("x @ y"), Some("@"));
    }

    #[test]
    fn adjacent_unknown_characters_form_one_error() {
        let src = "a -> b #x";
        let errs = tokenize(src).unwrap_err();
        let found: Vec<_> = errs.iter().map(|e| (e.span.column, e.span.slice(src).unwrap())).collect();
        assert_eq!(found, [(3, "->"), (8, "#")]);
        assert!(errs[0].hint.as_deref().unwrap().contains("-->"));
        // A valid token right after the run ends it.
        let errs = tokenize("a ->--> b").unwrap_err();
        assert_eq!(errs[0].span.slice("a ->--> b"), Some("->"));
    }

    #[test]
    fn all_unknown_characters_are_reported() {
        let errs = tokenize("a # b\n  $").unwrap_err();
        let pos: Vec<_> = errs.iter().map(|e| (e.span.line, e.span.column)).collect();
        assert_eq!(pos, vec![(1, 3), (2, 3)]);
    }

    #[test]
    fn arrows_and_numbers() {
        use TokenKind::*;
        assert_eq!(
            kinds("a --> B; b <>--> C; x = -12; y = 3.5;"),
            vec![
                Ident, Arrow, Ident, Semicolon, Ident, BiArrow, Ident, Semicolon, Ident, Equals,
                IntLit, Semicolon, Ident, Equals, FloatLit, Semicolon, Eof
            ]
        );
    }

    #[test]
    fn lone_minus_is_unknown() {
        let errs = tokenize("a - b").unwrap_err();
        assert_eq!(errs[0].code, DiagnosticCode::E001);
    }

    #[test]
    fn comments_are_skipped() {
        use TokenKind::*;
        assert_eq!(
            kinds("// hi\nconcept /* inline */ A { } // tail"),
            vec![Concept, Ident, LBrace, RBrace, Eof]
        );
    }

    #[test]
    fn unterminated_string_and_comment() {
        let errs = tokenize("x = \"abc\n").unwrap_err();
        assert_eq!(errs[0].code, DiagnosticCode::E002);
        assert_eq!((errs[0].span.line, errs[0].span.column), (1, 5));
        let errs = tokenize("concept A { /* never").unwrap_err();
        assert_eq!(errs[0].code, DiagnosticCode::E003);
        assert_eq!(errs[0].span.column, 13);
    }

    #[test]
    fn string_escapes_stay_in_lexeme() {
        let toks = tokenize(r#"x = "a \"q\" b";"#).unwrap();
        assert_eq!(toks[2].kind, TokenKind::StringLit);
        assert_eq!(toks[2].lexeme, r#""a \"q\" b""#);
    }

    #[test]
    fn keywords_are_reserved() {
        for kw in KEYWORDS {
            let toks = tokenize(kw).unwrap();
            assert_ne!(toks[0].kind, TokenKind::Ident, "{kw}");
            assert!(toks[0].kind.is_keyword());
        }
        assert_eq!(tokenize("isid").unwrap()[0].kind, TokenKind::Ident);
    }

    #[test]
    fn crlf_positions() {
        let toks = tokenize("concept A {\r\n}\r\n").unwrap();
        assert_eq!((toks[3].span.line, toks[3].span.column), (2, 1));
    }

    #[test]
    fn spans_slice_to_lexemes() {
        let src = "main concept Shop {\n  one name : string = \"Shöp\";\n}";
        for tok in tokenize(src).unwrap() {
            if tok.kind != TokenKind::Eof {
                assert_eq!(tok.span.slice(src), Some(tok.lexeme.as_str()));
            }
        }
    }
}
