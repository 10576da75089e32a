//! Canonical text form of a model.
//!
//! One feature per line, four-space indent, single spaces around `:`, `=`
//! and arrows, a blank line between elements, LF line endings. Attribute
//! cardinality is always written; an unbounded reference has no keyword.

use std::fmt::Write;

use super::ast::*;

pub fn print(model: &DslModel) -> String {
    let mut out = String::new();
    for (i, el) in model.elements.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match el {
            Element::Concept(c) => print_concept(&mut out, c),
            Element::Enum(e) => print_enum(&mut out, e),
        }
    }
    out
}

fn print_concept(out: &mut String, c: &ConceptDef) {
    if c.is_main {
        out.push_str("main ");
    }
    let _ = write!(out, "concept {}", c.name);
    if let Some(parent) = &c.extends_name {
        let _ = write!(out, " extends {}", parent.name);
    }
    out.push_str(" {\n");
    for f in &c.features {
        out.push_str("    ");
        match f {
            Feature::Attribute(a) => print_attribute(out, a),
            Feature::Reference(r) => print_reference(out, r),
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
}

fn print_attribute(out: &mut String, a: &Attribute) {
    if let Some(kw) = a.cardinality.keyword() {
        let _ = write!(out, "{kw} ");
    }
    let _ = write!(out, "{} : {}", a.name, a.type_name.as_str());
    if a.is_id {
        out.push_str(" isId");
    }
    if let Some(d) = &a.default_value {
        let _ = write!(out, " = {}", d.value);
    }
}

fn print_reference(out: &mut String, r: &Reference) {
    if let Some(kw) = r.cardinality.keyword() {
        let _ = write!(out, "{kw} ");
    }
    let _ = write!(out, "{} {} {}", r.name, r.arrow.symbol(), r.target.name);
    if let Some(s) = &r.subset_of {
        let _ = write!(out, " subset of {}.{}", s.owner_name, s.feature_name);
    }
}

fn print_enum(out: &mut String, e: &EnumDef) {
    let _ = writeln!(out, "enum {} {{", e.name);
    let n = e.literals.len();
    for (i, lit) in e.literals.iter().enumerate() {
        let sep = if i + 1 < n { "," } else { "" };
        let _ = writeln!(out, "    {}{sep}", lit.name);
    }
    out.push_str("}\n");
}
