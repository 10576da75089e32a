//! Syntax tree for DSL documents.

use serde::{Deserialize, Serialize};

use super::diagnostic::SourceSpan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DslModel {
    pub source_name: String,
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    Concept(ConceptDef),
    Enum(EnumDef),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptDef {
    pub name: String,
    pub is_main: bool,
    pub extends_name: Option<Ident>,
    pub features: Vec<Feature>,
    pub span: SourceSpan,
}

/// An identifier occurrence that is resolved later, with its location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ident {
    pub name: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumDef {
    pub name: String,
    pub literals: Vec<Ident>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feature {
    Attribute(Attribute),
    Reference(Reference),
}

impl Feature {
    pub fn name(&self) -> &str {
        match self {
            Feature::Attribute(a) => &a.name,
            Feature::Reference(r) => &r.name,
        }
    }

    pub fn span(&self) -> SourceSpan {
        match self {
            Feature::Attribute(a) => a.span,
            Feature::Reference(r) => r.span,
        }
    }
}

/// Alloy-style multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Cardinality {
    /// Exactly one.
    One,
    /// One or more.
    Some,
    /// Zero or one.
    Lone,
    /// Zero or more; what an unannotated reference means.
    Many,
}

impl Cardinality {
    /// Upper bound, `None` for unbounded.
    pub fn upper_bound(&self) -> Option<u32> {
        match self {
            Cardinality::One | Cardinality::Lone => Some(1),
            Cardinality::Some | Cardinality::Many => None,
        }
    }

    pub fn lower_bound(&self) -> u32 {
        match self {
            Cardinality::One | Cardinality::Some => 1,
            Cardinality::Lone | Cardinality::Many => 0,
        }
    }

    /// Keyword as written in source; `Many` has none.
    pub fn keyword(&self) -> Option<&'static str> {
        match self {
            Cardinality::One => Some("one"),
            Cardinality::Some => Some("some"),
            Cardinality::Lone => Some("lone"),
            Cardinality::Many => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveType {
    String,
    Int,
    Float,
    Bool,
    Date,
}

impl PrimitiveType {
    pub const ALL: [PrimitiveType; 5] = [
        PrimitiveType::String,
        PrimitiveType::Int,
        PrimitiveType::Float,
        PrimitiveType::Bool,
        PrimitiveType::Date,
    ];

    pub fn keyword(&self) -> &'static str {
        match self {
            PrimitiveType::String => "string",
            PrimitiveType::Int => "int",
            PrimitiveType::Float => "float",
            PrimitiveType::Bool => "bool",
            PrimitiveType::Date => "date",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "snake_case")]
pub enum TypeName {
    Primitive(PrimitiveType),
    /// An enum name, or an unresolved identifier.
    Named(String),
}

impl TypeName {
    pub fn as_str(&self) -> &str {
        match self {
            TypeName::Primitive(p) => p.keyword(),
            TypeName::Named(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub cardinality: Cardinality,
    pub type_name: TypeName,
    pub type_span: SourceSpan,
    pub is_id: bool,
    pub default_value: Option<Literal>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ArrowKind {
    /// `-->`
    OneWay,
    /// `<>-->`
    Bidirectional,
}

impl ArrowKind {
    pub fn symbol(&self) -> &'static str {
        match self {
            ArrowKind::OneWay => "-->",
            ArrowKind::Bidirectional => "<>-->",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetOf {
    pub owner_name: String,
    pub feature_name: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub name: String,
    pub cardinality: Cardinality,
    pub arrow: ArrowKind,
    pub target: Ident,
    pub subset_of: Option<SubsetOf>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LiteralKind {
    String,
    Int,
    Float,
    Bool,
    EnumRef,
}

/// A default-value literal, kept as its source lexeme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub kind: LiteralKind,
    pub value: String,
    pub span: SourceSpan,
}

impl DslModel {
    pub fn empty(source_name: impl Into<String>) -> Self {
        Self {
            source_name: source_name.into(),
            elements: Vec::new(),
        }
    }

    pub fn concepts(&self) -> impl Iterator<Item = &ConceptDef> {
        self.elements.iter().filter_map(|e| match e {
            Element::Concept(c) => Some(c),
            Element::Enum(_) => None,
        })
    }

    pub fn enums(&self) -> impl Iterator<Item = &EnumDef> {
        self.elements.iter().filter_map(|e| match e {
            Element::Enum(e) => Some(e),
            Element::Concept(_) => None,
        })
    }

    /// Compares element structure, ignoring spans and the source label.
    pub fn structurally_eq(&self, other: &DslModel) -> bool {
        self.clone().without_spans().elements == other.clone().without_spans().elements
    }

    /// Replaces every span with a fixed placeholder.
    pub fn without_spans(mut self) -> Self {
        let z = SourceSpan::start_of_input();
        for el in &mut self.elements {
            match el {
                Element::Concept(c) => {
                    c.span = z;
                    if let Some(e) = &mut c.extends_name {
                        e.span = z;
                    }
                    for f in &mut c.features {
                        match f {
                            Feature::Attribute(a) => {
                                a.span = z;
                                a.type_span = z;
                                if let Some(d) = &mut a.default_value {
                                    d.span = z;
                                }
                            }
                            Feature::Reference(r) => {
                                r.span = z;
                                r.target.span = z;
                                if let Some(s) = &mut r.subset_of {
                                    s.span = z;
                                }
                            }
                        }
                    }
                }
                Element::Enum(e) => {
                    e.span = z;
                    for l in &mut e.literals {
                        l.span = z;
                    }
                }
            }
        }
        self
    }
}

impl Element {
    pub fn name(&self) -> &str {
        match self {
            Element::Concept(c) => &c.name,
            Element::Enum(e) => &e.name,
        }
    }

    pub fn span(&self) -> SourceSpan {
        match self {
            Element::Concept(c) => c.span,
            Element::Enum(e) => e.span,
        }
    }
}
