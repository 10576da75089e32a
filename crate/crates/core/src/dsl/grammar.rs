//! The concrete DSL grammar and its LALR(1) tables.
//!
//! ```text
//! model       = { element } ;
//! element     = concept_def | enum_def ;
//! concept_def = [ "main" ] "concept" IDENT [ "extends" IDENT ] "{" { feature } "}" ;
//! enum_def    = "enum" IDENT "{" IDENT { "," IDENT } "}" ;
//! feature     = attribute | reference ;
//! attribute   = [ card ] IDENT ":" type_name [ "isId" ] [ "=" literal ] ";" ;
//! reference   = [ card ] IDENT arrow IDENT [ "subset" "of" IDENT "." IDENT ] ";" ;
//! arrow       = "-->" | "<>-->" ;
//! card        = "one" | "some" | "lone" ;
//! type_name   = "string" | "int" | "float" | "bool" | "date" | IDENT ;
//! literal     = STRING | INT | FLOAT | "true" | "false" | IDENT ;
//! ```

use std::sync::OnceLock;

use super::lalr::{self, Grammar, Production, Symbol, Tables};
use super::lexer::TokenKind;

/// The grammar above in EBNF, as shipped to language models in prompts.
pub const GRAMMAR_EBNF: &str = r#"model       = { element } ;
element     = concept_def | enum_def ;
concept_def = [ "main" ] "concept" IDENT [ "extends" IDENT ] "{" { feature } "}" ;
enum_def    = "enum" IDENT "{" IDENT { "," IDENT } "}" ;
feature     = attribute | reference ;
attribute   = [ card ] IDENT ":" type_name [ "isId" ] [ "=" literal ] ";" ;
reference   = [ card ] IDENT arrow IDENT [ "subset" "of" IDENT "." IDENT ] ";" ;
arrow       = "-->" | "<>-->" ;
card        = "one" | "some" | "lone" ;
type_name   = "string" | "int" | "float" | "bool" | "date" | IDENT ;
literal     = STRING | INT | FLOAT | "true" | "false" | IDENT ;
IDENT       = /[A-Za-z_][A-Za-z0-9_]*/ (keywords are reserved) ;
STRING      = /"([^"\\\n]|\\.)*"/ ;
INT         = /-?[0-9]+/ ;
FLOAT       = /-?[0-9]+\.[0-9]+/ ;
comments    = "//" to end of line, or "/*" ... "*/" ;"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nt {
    Model,
    Elements,
    Element,
    ConceptDef,
    MainOpt,
    ExtendsOpt,
    Features,
    Feature,
    Attribute,
    Reference,
    CardOpt,
    IdOpt,
    DefaultOpt,
    SubsetOpt,
    Arrow,
    TypeName,
    Literal,
    EnumDef,
    Literals,
}

const NT_COUNT: usize = Nt::Literals as usize + 1;

/// What a reduction builds. One variant per production.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Model,
    ElementsEmpty,
    ElementsMore,
    ElementConcept,
    ElementEnum,
    ConceptDef,
    MainNone,
    MainSome,
    ExtendsNone,
    ExtendsSome,
    FeaturesEmpty,
    FeaturesMore,
    FeatureAttribute,
    FeatureReference,
    Attribute,
    Reference,
    CardNone,
    CardOne,
    CardSome,
    CardLone,
    IdNone,
    IdSome,
    DefaultNone,
    DefaultSome,
    SubsetNone,
    SubsetSome,
    ArrowOneWay,
    ArrowBi,
    TypeString,
    TypeInt,
    TypeFloat,
    TypeBool,
    TypeDate,
    TypeNamed,
    LitString,
    LitInt,
    LitFloat,
    LitTrue,
    LitFalse,
    LitIdent,
    EnumDef,
    LiteralsOne,
    LiteralsMore,
}

#[derive(Clone, Copy)]
enum S {
    T(TokenKind),
    N(Nt),
}

fn rules() -> Vec<(Nt, Vec<S>, Rule)> {
    use Nt as N_;
    use S::{N, T};
    use TokenKind as K;
    vec![
        (N_::Model, vec![N(N_::Elements)], Rule::Model),
        (N_::Elements, vec![], Rule::ElementsEmpty),
        (N_::Elements, vec![N(N_::Elements), N(N_::Element)], Rule::ElementsMore),
        (N_::Element, vec![N(N_::ConceptDef)], Rule::ElementConcept),
        (N_::Element, vec![N(N_::EnumDef)], Rule::ElementEnum),
        (
            N_::ConceptDef,
            vec![
                N(N_::MainOpt),
                T(K::Concept),
                T(K::Ident),
                N(N_::ExtendsOpt),
                T(K::LBrace),
                N(N_::Features),
                T(K::RBrace),
            ],
            Rule::ConceptDef,
        ),
        (N_::MainOpt, vec![], Rule::MainNone),
        (N_::MainOpt, vec![T(K::Main)], Rule::MainSome),
        (N_::ExtendsOpt, vec![], Rule::ExtendsNone),
        (N_::ExtendsOpt, vec![T(K::Extends), T(K::Ident)], Rule::ExtendsSome),
        (N_::Features, vec![], Rule::FeaturesEmpty),
        (N_::Features, vec![N(N_::Features), N(N_::Feature)], Rule::FeaturesMore),
        (N_::Feature, vec![N(N_::Attribute)], Rule::FeatureAttribute),
        (N_::Feature, vec![N(N_::Reference)], Rule::FeatureReference),
        (
            N_::Attribute,
            vec![
                N(N_::CardOpt),
                T(K::Ident),
                T(K::Colon),
                N(N_::TypeName),
                N(N_::IdOpt),
                N(N_::DefaultOpt),
                T(K::Semicolon),
            ],
            Rule::Attribute,
        ),
        (
            N_::Reference,
            vec![
                N(N_::CardOpt),
                T(K::Ident),
                N(N_::Arrow),
                T(K::Ident),
                N(N_::SubsetOpt),
                T(K::Semicolon),
            ],
            Rule::Reference,
        ),
        (N_::CardOpt, vec![], Rule::CardNone),
        (N_::CardOpt, vec![T(K::One)], Rule::CardOne),
        (N_::CardOpt, vec![T(K::Some)], Rule::CardSome),
        (N_::CardOpt, vec![T(K::Lone)], Rule::CardLone),
        (N_::IdOpt, vec![], Rule::IdNone),
        (N_::IdOpt, vec![T(K::IsId)], Rule::IdSome),
        (N_::DefaultOpt, vec![], Rule::DefaultNone),
        (N_::DefaultOpt, vec![T(K::Equals), N(N_::Literal)], Rule::DefaultSome),
        (N_::SubsetOpt, vec![], Rule::SubsetNone),
        (
            N_::SubsetOpt,
            vec![T(K::Subset), T(K::Of), T(K::Ident), T(K::Dot), T(K::Ident)],
            Rule::SubsetSome,
        ),
        (N_::Arrow, vec![T(K::Arrow)], Rule::ArrowOneWay),
        (N_::Arrow, vec![T(K::BiArrow)], Rule::ArrowBi),
        (N_::TypeName, vec![T(K::StringType)], Rule::TypeString),
        (N_::TypeName, vec![T(K::IntType)], Rule::TypeInt),
        (N_::TypeName, vec![T(K::FloatType)], Rule::TypeFloat),
        (N_::TypeName, vec![T(K::BoolType)], Rule::TypeBool),
        (N_::TypeName, vec![T(K::DateType)], Rule::TypeDate),
        (N_::TypeName, vec![T(K::Ident)], Rule::TypeNamed),
        (N_::Literal, vec![T(K::StringLit)], Rule::LitString),
        (N_::Literal, vec![T(K::IntLit)], Rule::LitInt),
        (N_::Literal, vec![T(K::FloatLit)], Rule::LitFloat),
        (N_::Literal, vec![T(K::True)], Rule::LitTrue),
        (N_::Literal, vec![T(K::False)], Rule::LitFalse),
        (N_::Literal, vec![T(K::Ident)], Rule::LitIdent),
        (
            N_::EnumDef,
            vec![
                T(K::Enum),
                T(K::Ident),
                T(K::LBrace),
                N(N_::Literals),
                T(K::RBrace),
            ],
            Rule::EnumDef,
        ),
        (N_::Literals, vec![T(K::Ident)], Rule::LiteralsOne),
        (
            N_::Literals,
            vec![N(N_::Literals), T(K::Comma), T(K::Ident)],
            Rule::LiteralsMore,
        ),
    ]
}

/// LALR tables plus the rule attached to each production.
pub struct DslTables {
    pub tables: Tables,
    pub rules: Vec<Rule>,
}

pub fn grammar() -> (Grammar, Vec<Rule>) {
    let defs = rules();
    let mut productions = Vec::with_capacity(defs.len());
    let mut tags = Vec::with_capacity(defs.len());
    for (lhs, rhs, rule) in defs {
        productions.push(Production {
            lhs: lhs as usize,
            rhs: rhs
                .into_iter()
                .map(|s| match s {
                    S::T(k) => Symbol::T(k.index()),
                    S::N(n) => Symbol::N(n as usize),
                })
                .collect(),
        });
        tags.push(rule);
    }
    let g = Grammar {
        n_terminals: TokenKind::ALL.len(),
        n_nonterminals: NT_COUNT,
        productions,
        start: Nt::Model as usize,
        eof: TokenKind::Eof.index(),
    };
    (g, tags)
}

/// Tables are built once per process.
pub fn tables() -> &'static DslTables {
    static TABLES: OnceLock<DslTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let (g, rules) = grammar();
        let tables = lalr::build(&g).unwrap_or_else(|c| panic!("DSL grammar is not LALR(1): {c:?}"));
        DslTables { tables, rules }
    })
}
