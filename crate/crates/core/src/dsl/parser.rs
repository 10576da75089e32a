//! Shift-reduce driver over the LALR tables, building the syntax tree.

use super::ast::*;
use super::diagnostic::{Diagnostic, DiagnosticCode, SourceSpan};
use super::grammar::{tables, Rule};
use super::lalr::Action;
use super::lexer::{tokenize, Token, TokenKind};

enum Value {
    Token(Token),
    Elements(Vec<Element>),
    Element(Element),
    Flag(bool),
    Extends(Option<Ident>),
    Features(Vec<Feature>),
    Feature(Feature),
    Card(Option<Cardinality>),
    Default(Option<Literal>),
    Subset(Option<SubsetOf>),
    Arrow(ArrowKind),
    Type(TypeName, SourceSpan),
    Literal(Literal),
    Idents(Vec<Ident>),
}

macro_rules! take {
    ($it:expr, $variant:ident) => {
        match $it.next() {
            Some(Value::$variant(v)) => v,
            _ => unreachable!(concat!("expected ", stringify!($variant))),
        }
    };
    ($it:expr, $variant:ident, 2) => {
        match $it.next() {
            Some(Value::$variant(a, b)) => (a, b),
            _ => unreachable!(concat!("expected ", stringify!($variant))),
        }
    };
}

fn ident(tok: Token) -> Ident {
    Ident {
        name: tok.lexeme,
        span: tok.span,
    }
}

fn literal(kind: LiteralKind, tok: Token) -> Value {
    Value::Literal(Literal {
        kind,
        value: tok.lexeme,
        span: tok.span,
    })
}

fn reduce(rule: Rule, values: Vec<Value>) -> Value {
    let mut it = values.into_iter();
    match rule {
        Rule::Model => Value::Elements(take!(it, Elements)),
        Rule::ElementsEmpty => Value::Elements(Vec::new()),
        Rule::ElementsMore => {
            let mut els = take!(it, Elements);
            els.push(take!(it, Element));
            Value::Elements(els)
        }
        Rule::ElementConcept | Rule::ElementEnum => Value::Element(take!(it, Element)),
        Rule::ConceptDef => {
            let is_main = take!(it, Flag);
            let _concept = take!(it, Token);
            let name = take!(it, Token);
            let extends_name = take!(it, Extends);
            let _lbrace = take!(it, Token);
            let features = take!(it, Features);
            Value::Element(Element::Concept(ConceptDef {
                name: name.lexeme,
                is_main,
                extends_name,
                features,
                span: name.span,
            }))
        }
        Rule::MainNone | Rule::IdNone => Value::Flag(false),
        Rule::MainSome | Rule::IdSome => Value::Flag(true),
        Rule::ExtendsNone => Value::Extends(None),
        Rule::ExtendsSome => {
            let _kw = take!(it, Token);
            Value::Extends(Some(ident(take!(it, Token))))
        }
        Rule::FeaturesEmpty => Value::Features(Vec::new()),
        Rule::FeaturesMore => {
            let mut fs = take!(it, Features);
            fs.push(take!(it, Feature));
            Value::Features(fs)
        }
        Rule::FeatureAttribute | Rule::FeatureReference => Value::Feature(take!(it, Feature)),
        Rule::Attribute => {
            let card = take!(it, Card);
            let name = take!(it, Token);
            let _colon = take!(it, Token);
            let (type_name, type_span) = take!(it, Type, 2);
            let is_id = take!(it, Flag);
            let default_value = take!(it, Default);
            Value::Feature(Feature::Attribute(Attribute {
                name: name.lexeme,
                cardinality: card.unwrap_or(Cardinality::One),
                type_name,
                type_span,
                is_id,
                default_value,
                span: name.span,
            }))
        }
        Rule::Reference => {
            let card = take!(it, Card);
            let name = take!(it, Token);
            let arrow = take!(it, Arrow);
            let target = ident(take!(it, Token));
            let subset_of = take!(it, Subset);
            Value::Feature(Feature::Reference(Reference {
                name: name.lexeme,
                cardinality: card.unwrap_or(Cardinality::Many),
                arrow,
                target,
                subset_of,
                span: name.span,
            }))
        }
        Rule::CardNone => Value::Card(None),
        Rule::CardOne => Value::Card(Some(Cardinality::One)),
        Rule::CardSome => Value::Card(Some(Cardinality::Some)),
        Rule::CardLone => Value::Card(Some(Cardinality::Lone)),
        Rule::DefaultNone => Value::Default(None),
        Rule::DefaultSome => {
            let _eq = take!(it, Token);
            Value::Default(Some(take!(it, Literal)))
        }
        Rule::SubsetNone => Value::Subset(None),
        Rule::SubsetSome => {
            let subset = take!(it, Token);
            let _of = take!(it, Token);
            let owner = take!(it, Token);
            let _dot = take!(it, Token);
            let feature = take!(it, Token);
            Value::Subset(Some(SubsetOf {
                owner_name: owner.lexeme,
                feature_name: feature.lexeme,
                span: subset.span,
            }))
        }
        Rule::ArrowOneWay => Value::Arrow(ArrowKind::OneWay),
        Rule::ArrowBi => Value::Arrow(ArrowKind::Bidirectional),
        Rule::TypeString
        | Rule::TypeInt
        | Rule::TypeFloat
        | Rule::TypeBool
        | Rule::TypeDate
        | Rule::TypeNamed => {
            let tok = take!(it, Token);
            let ty = match rule {
                Rule::TypeString => TypeName::Primitive(PrimitiveType::String),
                Rule::TypeInt => TypeName::Primitive(PrimitiveType::Int),
                Rule::TypeFloat => TypeName::Primitive(PrimitiveType::Float),
                Rule::TypeBool => TypeName::Primitive(PrimitiveType::Bool),
                Rule::TypeDate => TypeName::Primitive(PrimitiveType::Date),
                _ => TypeName::Named(tok.lexeme.clone()),
            };
            Value::Type(ty, tok.span)
        }
        Rule::LitString => literal(LiteralKind::String, take!(it, Token)),
        Rule::LitInt => literal(LiteralKind::Int, take!(it, Token)),
        Rule::LitFloat => literal(LiteralKind::Float, take!(it, Token)),
        Rule::LitTrue | Rule::LitFalse => literal(LiteralKind::Bool, take!(it, Token)),
        Rule::LitIdent => literal(LiteralKind::EnumRef, take!(it, Token)),
        Rule::EnumDef => {
            let _kw = take!(it, Token);
            let name = take!(it, Token);
            let _lbrace = take!(it, Token);
            let literals = take!(it, Idents);
            Value::Element(Element::Enum(EnumDef {
                name: name.lexeme,
                literals,
                span: name.span,
            }))
        }
        Rule::LiteralsOne => Value::Idents(vec![ident(take!(it, Token))]),
        Rule::LiteralsMore => {
            let mut ids = take!(it, Idents);
            let _comma = take!(it, Token);
            ids.push(ident(take!(it, Token)));
            Value::Idents(ids)
        }
    }
}

/// Parses a DSL document. Lexical errors are all reported; otherwise the
/// first syntax error is reported with the set of tokens that would have
/// been accepted at that point.
pub fn parse(source: &str) -> Result<DslModel, Vec<Diagnostic>> {
    parse_named(source, "<input>")
}

pub fn parse_named(source: &str, source_name: &str) -> Result<DslModel, Vec<Diagnostic>> {
    let tokens = tokenize(source)?;
    let dsl = tables();
    let t = &dsl.tables;

    let mut states: Vec<usize> = vec![0];
    let mut values: Vec<Value> = Vec::new();
    let mut tokens = tokens.into_iter().peekable();

    loop {
        let look = tokens.peek().expect("token stream ends with Eof");
        let state = *states.last().expect("non-empty stack");
        match t.action(state, look.kind.index()) {
            Action::Shift(next) => {
                let tok = tokens.next().expect("peeked");
                states.push(next);
                values.push(Value::Token(tok));
            }
            Action::Reduce(p) => {
                let prod = &t.productions[p];
                let n = prod.rhs.len();
                states.truncate(states.len() - n);
                let args = values.split_off(values.len() - n);
                values.push(reduce(dsl.rules[p], args));
                let under = *states.last().expect("non-empty stack");
                let next = t.goto(under, prod.lhs).expect("goto after reduce");
                states.push(next);
            }
            Action::Accept => {
                let elements = match values.pop() {
                    Some(Value::Elements(els)) => els,
                    _ => unreachable!("accept with a model on the stack"),
                };
                return Ok(DslModel {
                    source_name: source_name.to_string(),
                    elements,
                });
            }
            Action::Error => return Err(vec![syntax_error(&states, look)]),
        }
    }
}

fn expected_tokens(states: &[usize]) -> Vec<TokenKind> {
    let t = &tables().tables;
    TokenKind::ALL
        .iter()
        .copied()
        .filter(|k| t.viable(states, k.index()))
        .collect()
}

/// Whether inserting `;` before `tok` would let the parse continue.
fn semicolon_repairs(states: &[usize], tok: TokenKind) -> bool {
    let t = &tables().tables;
    let mut stack = states.to_vec();
    let semi = TokenKind::Semicolon.index();
    loop {
        let top = *stack.last().expect("non-empty stack");
        match t.action(top, semi) {
            Action::Shift(next) => {
                stack.push(next);
                return t.viable(&stack, tok.index());
            }
            Action::Reduce(p) => {
                let prod = &t.productions[p];
                stack.truncate(stack.len() - prod.rhs.len());
                let under = *stack.last().expect("non-empty stack");
                match t.goto(under, prod.lhs) {
                    Some(next) => stack.push(next),
                    None => return false,
                }
            }
            Action::Accept | Action::Error => return false,
        }
    }
}

fn syntax_error(states: &[usize], tok: &Token) -> Diagnostic {
    let expected = expected_tokens(states);
    let names: Vec<String> = expected.iter().map(|k| k.name().to_string()).collect();

    if tok.kind == TokenKind::Eof {
        let mut d = Diagnostic::error(DiagnosticCode::E102, tok.span, "unexpected end of input")
            .with_expected(names);
        if expected.contains(&TokenKind::RBrace) {
            d = d.with_hint("a `{` block is not closed");
        }
        return d;
    }

    if expected.contains(&TokenKind::Semicolon) && semicolon_repairs(states, tok.kind) {
        return Diagnostic::error(
            DiagnosticCode::E103,
            tok.span,
            format!("missing `;` before `{}`", tok.lexeme),
        )
        .with_expected(vec![TokenKind::Semicolon.name().to_string()])
        .with_hint("every attribute and reference must end with `;`");
    }

    let mut d = Diagnostic::error(
        DiagnosticCode::E101,
        tok.span,
        format!("unexpected `{}`", tok.lexeme),
    )
    .with_expected(names);
    if tok.kind.is_keyword() && expected.contains(&TokenKind::Ident) {
        d = d.with_hint(format!(
            "`{}` is a reserved keyword and cannot be used as a name",
            tok.lexeme
        ));
    }
    d
}
