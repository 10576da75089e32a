//! Semantic validation of parsed models.
//!
//! Every check runs and every finding is collected; the report is valid iff
//! no finding has error severity. Findings come back in source order.

mod symbols;

use serde::{Deserialize, Serialize};

use crate::dsl::{
    Attribute, Cardinality, ConceptDef, Diagnostic, DiagnosticCode, DslModel, Feature,
    LiteralKind, PrimitiveType, Reference, SourceSpan, TypeName,
};

pub use symbols::{
    build_symbols, export_symbols, Ancestry, ExternalSymbols, SymbolError, SymbolKind, SymbolTable,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    fn from_diagnostics(mut diagnostics: Vec<Diagnostic>) -> Self {
        diagnostics.sort_by_key(|d| (d.span.byte_offset, d.code));
        let valid = !diagnostics.iter().any(Diagnostic::is_error);
        Self { valid, diagnostics }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn codes(&self) -> Vec<DiagnosticCode> {
        self.diagnostics.iter().map(|d| d.code).collect()
    }
}

pub fn validate(model: &DslModel, external: Option<&ExternalSymbols>) -> ValidationReport {
    let (table, mut diags) = build_symbols(model, external);
    let mut v = Validator {
        table: &table,
        diags: Vec::new(),
    };
    v.check_main(model);
    for e in table.enums.values() {
        v.check_enum_literals(e);
    }
    for c in model.concepts() {
        // Skip shadowed duplicates; they were reported as V401.
        if !table.concepts.get(c.name.as_str()).is_some_and(|t| std::ptr::eq(*t, c)) {
            continue;
        }
        v.check_inheritance(c);
        v.check_features(c);
        v.check_ids(c);
    }
    diags.append(&mut v.diags);
    ValidationReport::from_diagnostics(diags)
}

struct Validator<'t, 'm> {
    table: &'t SymbolTable<'m>,
    diags: Vec<Diagnostic>,
}

fn err(code: DiagnosticCode, span: SourceSpan, msg: String) -> Diagnostic {
    Diagnostic::error(code, span, msg)
}

impl<'t, 'm> Validator<'t, 'm> {
    fn push(&mut self, d: Diagnostic) {
        self.diags.push(d);
    }

    fn check_main(&mut self, model: &DslModel) {
        let mains: Vec<&ConceptDef> = model.concepts().filter(|c| c.is_main).collect();
        match mains.as_slice() {
            [] => {
                let span = model
                    .elements
                    .first()
                    .map(|e| e.span())
                    .unwrap_or_else(SourceSpan::start_of_input);
                self.push(
                    err(DiagnosticCode::V501, span, "model has no `main concept`".into())
                        .with_hint("mark the central concept with `main concept`"),
                );
            }
            [_] => {}
            [first, rest @ ..] => {
                for c in rest {
                    self.push(
                        err(
                            DiagnosticCode::V502,
                            c.span,
                            format!(
                                "`{}` is a second main concept; `{}` is already main",
                                c.name, first.name
                            ),
                        )
                        .with_hint("exactly one concept may be `main`"),
                    );
                }
            }
        }
    }

    fn check_enum_literals(&mut self, e: &crate::dsl::EnumDef) {
        for (i, lit) in e.literals.iter().enumerate() {
            if e.literals[..i].iter().any(|l| l.name == lit.name) {
                self.push(err(
                    DiagnosticCode::V403,
                    lit.span,
                    format!("literal `{}` appears twice in enum `{}`", lit.name, e.name),
                ));
            }
        }
    }

    fn check_inheritance(&mut self, c: &ConceptDef) {
        let Some(parent) = &c.extends_name else {
            return;
        };
        let p = parent.name.as_str();
        if p == c.name {
            self.push(err(
                DiagnosticCode::V203,
                parent.span,
                format!("`{}` extends itself", c.name),
            ));
            return;
        }
        if self.table.is_enum(p) {
            self.push(err(
                DiagnosticCode::V202,
                parent.span,
                format!("`{}` extends enum `{p}`; only concepts can be extended", c.name),
            ));
            return;
        }
        if !self.table.is_concept(p) {
            self.push(err(
                DiagnosticCode::V201,
                parent.span,
                format!("`{}` extends unknown concept `{p}`", c.name),
            ));
            return;
        }
        if let Ok(a) = self.table.ancestry(&c.name) {
            if a.repeated.as_deref() == Some(c.name.as_str()) {
                let mut cycle = vec![c.name.clone()];
                cycle.extend(a.chain.iter().cloned());
                cycle.push(c.name.clone());
                self.push(err(
                    DiagnosticCode::V204,
                    c.span,
                    format!("inheritance cycle: {}", cycle.join(" -> ")),
                ));
            }
        }
    }

    /// Features declared by the ancestors of `c`, nearest ancestor first.
    fn inherited_features(&self, c: &ConceptDef) -> Vec<(&'m str, &'m Feature)> {
        let mut out = Vec::new();
        if let Ok(a) = self.table.ancestry(&c.name) {
            for name in &a.chain {
                if let Some((k, def)) = self.table.concepts.get_key_value(name.as_str()) {
                    out.extend(def.features.iter().map(|f| (*k, f)));
                }
            }
        }
        out
    }

    fn check_features(&mut self, c: &ConceptDef) {
        let inherited = self.inherited_features(c);
        for (i, f) in c.features.iter().enumerate() {
            let name = f.name();
            if c.features[..i].iter().any(|g| g.name() == name) {
                self.push(err(
                    DiagnosticCode::V402,
                    f.span(),
                    format!("feature `{name}` is declared twice in `{}`", c.name),
                ));
            } else if let Some((owner, _)) = inherited.iter().find(|(_, g)| g.name() == name) {
                self.push(
                    err(
                        DiagnosticCode::V402,
                        f.span(),
                        format!("feature `{name}` of `{}` clashes with inherited `{owner}.{name}`", c.name),
                    )
                    .with_hint("inherited features cannot be redeclared"),
                );
            }
            match f {
                Feature::Attribute(a) => self.check_attribute(a),
                Feature::Reference(r) => self.check_reference(c, r),
            }
        }
    }

    /// Only V101 and V602 depend on name resolution; the other checks hold
    /// for any named type, since a named type can only ever be an enum.
    /// This keeps the diagnostic count monotone as external names are added.
    fn check_attribute(&mut self, a: &Attribute) {
        let enum_name = match &a.type_name {
            TypeName::Primitive(_) => None,
            TypeName::Named(n) if self.table.is_enum(n) => Some(n.as_str()),
            TypeName::Named(n) => {
                let hint = if self.table.is_concept(n) {
                    format!("`{n}` is a concept; use a reference such as `{} --> {n};`", a.name)
                } else {
                    "attribute types are string, int, float, bool, date or a declared enum".into()
                };
                self.push(
                    err(
                        DiagnosticCode::V101,
                        a.type_span,
                        format!("unresolved type `{n}` for attribute `{}`", a.name),
                    )
                    .with_hint(hint),
                );
                None
            }
        };

        if a.is_id {
            if matches!(a.type_name, TypeName::Named(_)) {
                self.push(err(
                    DiagnosticCode::V701,
                    a.span,
                    format!("`{}` is marked isId but has non-primitive type `{}`", a.name, a.type_name.as_str()),
                ));
            }
            if a.cardinality != Cardinality::One {
                self.push(err(
                    DiagnosticCode::V702,
                    a.span,
                    format!(
                        "identifier `{}` must have cardinality `one`, not `{}`",
                        a.name,
                        a.cardinality.keyword().unwrap_or("many")
                    ),
                ));
            }
        }

        let Some(default) = &a.default_value else {
            return;
        };
        let compatible = matches!(
            (&a.type_name, default.kind),
            (TypeName::Primitive(PrimitiveType::String | PrimitiveType::Date), LiteralKind::String)
                | (TypeName::Primitive(PrimitiveType::Int), LiteralKind::Int)
                | (TypeName::Primitive(PrimitiveType::Float), LiteralKind::Float | LiteralKind::Int)
                | (TypeName::Primitive(PrimitiveType::Bool), LiteralKind::Bool)
                | (TypeName::Named(_), LiteralKind::EnumRef)
        );
        if !compatible {
            self.push(err(
                DiagnosticCode::V601,
                default.span,
                format!(
                    "default `{}` does not match type `{}` of `{}`",
                    default.value,
                    a.type_name.as_str(),
                    a.name
                ),
            ));
            return;
        }
        let table = self.table;
        if let Some(en) = enum_name.and_then(|n| table.enums.get(n)) {
            if !en.literals.iter().any(|l| l.name == default.value) {
                let members: Vec<&str> = en.literals.iter().map(|l| l.name.as_str()).collect();
                self.push(
                    err(
                        DiagnosticCode::V602,
                        default.span,
                        format!("`{}` is not a literal of enum `{}`", default.value, en.name),
                    )
                    .with_hint(format!("choose one of: {}", members.join(", "))),
                );
            }
        }
    }

    /// Finds reference `feature` on `owner` or its ancestors.
    fn find_reference(&self, owner: &str, feature: &str) -> Option<&'m Reference> {
        for name in self.table.lineage(owner) {
            let Some(&def) = self.table.concepts.get(name.as_str()) else {
                continue;
            };
            for f in &def.features {
                if let Feature::Reference(r) = f {
                    if r.name == feature {
                        return Some(r);
                    }
                }
            }
        }
        None
    }

    fn check_reference(&mut self, c: &ConceptDef, r: &Reference) {
        let target = r.target.name.as_str();
        let target_ok = self.table.is_concept(target);
        if !target_ok {
            let hint = if self.table.is_enum(target) {
                format!("`{target}` is an enum; use an attribute `{} : {target};`", r.name)
            } else {
                format!("declare `concept {target}` or fix the name")
            };
            self.push(
                err(
                    DiagnosticCode::V102,
                    r.target.span,
                    format!("unresolved reference target `{target}` for `{}`", r.name),
                )
                .with_hint(hint),
            );
        }

        let Some(sub) = &r.subset_of else {
            return;
        };
        let (owner, feat) = (sub.owner_name.as_str(), sub.feature_name.as_str());
        let parent = if self.table.concepts.contains_key(owner) {
            self.find_reference(owner, feat)
        } else {
            None
        };
        let Some(parent) = parent else {
            self.push(err(
                DiagnosticCode::V301,
                sub.span,
                format!("`{owner}.{feat}` is not a reference on concept `{owner}` or its ancestors"),
            ));
            return;
        };
        if !self.table.is_same_or_descendant(&c.name, owner) {
            self.push(err(
                DiagnosticCode::V302,
                sub.span,
                format!("`{}` is neither `{owner}` nor a descendant of it", c.name),
            ));
        }
        if !self.table.is_same_or_descendant(target, &parent.target.name) {
            self.push(err(
                DiagnosticCode::V303,
                r.target.span,
                format!(
                    "subset target `{target}` is not `{}` nor a descendant of it",
                    parent.target.name
                ),
            ));
        }
        let wider = match (r.cardinality.upper_bound(), parent.cardinality.upper_bound()) {
            (None, Some(_)) => true,
            (Some(a), Some(b)) => a > b,
            _ => false,
        };
        if wider {
            self.push(err(
                DiagnosticCode::V304,
                sub.span,
                format!(
                    "subset `{}` allows more elements than `{owner}.{feat}`",
                    r.name
                ),
            ));
        }
    }

    fn check_ids(&mut self, c: &ConceptDef) {
        let mut chain: Vec<&'m ConceptDef> = Vec::new();
        if let Ok(a) = self.table.ancestry(&c.name) {
            for name in a.chain.iter().rev() {
                if let Some(&def) = self.table.concepts.get(name.as_str()) {
                    chain.push(def);
                }
            }
        }
        let inherited_ids: Vec<String> = chain
            .iter()
            .flat_map(|def| {
                def.features.iter().filter_map(move |f| match f {
                    Feature::Attribute(a) if a.is_id => Some(format!("{}.{}", def.name, a.name)),
                    _ => None,
                })
            })
            .collect();
        let mut seen = inherited_ids;
        for f in &c.features {
            if let Feature::Attribute(a) = f {
                if !a.is_id {
                    continue;
                }
                if let Some(first) = seen.first() {
                    self.push(err(
                        DiagnosticCode::V703,
                        a.span,
                        format!(
                            "`{}.{}` is a second identifier; `{first}` is already isId",
                            c.name, a.name
                        ),
                    ));
                }
                seen.push(format!("{}.{}", c.name, a.name));
            }
        }
    }
}
