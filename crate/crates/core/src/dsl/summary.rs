//! Concept summaries shown next to generated models during rating.

use serde::{Deserialize, Serialize};

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub main_concept_name: Option<String>,
    pub concept_count: usize,
    pub enum_count: usize,
    pub attribute_count: usize,
    pub reference_count: usize,
    pub concepts: Vec<ConceptSummary>,
    pub enums: Vec<EnumSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptSummary {
    pub name: String,
    pub is_main: bool,
    pub extends: Option<String>,
    /// `name : type` per attribute.
    pub attributes: Vec<String>,
    /// `name --> Target` per reference.
    pub references: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumSummary {
    pub name: String,
    pub literals: Vec<String>,
}

pub fn concept_summary(model: &DslModel) -> ModelSummary {
    let mut s = ModelSummary {
        main_concept_name: None,
        concept_count: 0,
        enum_count: 0,
        attribute_count: 0,
        reference_count: 0,
        concepts: Vec::new(),
        enums: Vec::new(),
    };
    for el in &model.elements {
        match el {
            Element::Concept(c) => {
                s.concept_count += 1;
                if c.is_main && s.main_concept_name.is_none() {
                    s.main_concept_name = Some(c.name.clone());
                }
                let mut cs = ConceptSummary {
                    name: c.name.clone(),
                    is_main: c.is_main,
                    extends: c.extends_name.as_ref().map(|e| e.name.clone()),
                    attributes: Vec::new(),
                    references: Vec::new(),
                };
                for f in &c.features {
                    match f {
                        Feature::Attribute(a) => {
                            s.attribute_count += 1;
                            cs.attributes
                                .push(format!("{} : {}", a.name, a.type_name.as_str()));
                        }
                        Feature::Reference(r) => {
                            s.reference_count += 1;
                            cs.references.push(format!(
                                "{} {} {}",
                                r.name,
                                r.arrow.symbol(),
                                r.target.name
                            ));
                        }
                    }
                }
                s.concepts.push(cs);
            }
            Element::Enum(e) => {
                s.enum_count += 1;
                s.enums.push(EnumSummary {
                    name: e.name.clone(),
                    literals: e.literals.iter().map(|l| l.name.clone()).collect(),
                });
            }
        }
    }
    s
}
