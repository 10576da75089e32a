//! Symbol table over a parsed model, plus inheritance walks.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{ConceptDef, Diagnostic, DiagnosticCode, DslModel, Element, EnumDef};

/// Kind of a name exported by another model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Concept,
    Enum,
}

/// Names provided by other models, used for cross-model resolution.
pub type ExternalSymbols = BTreeMap<String, SymbolKind>;

/// Exports the top-level names of `model` for use as another model's externals.
pub fn export_symbols(model: &DslModel) -> ExternalSymbols {
    model
        .elements
        .iter()
        .map(|e| {
            let kind = match e {
                Element::Concept(_) => SymbolKind::Concept,
                Element::Enum(_) => SymbolKind::Enum,
            };
            (e.name().to_string(), kind)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SymbolTable<'m> {
    pub concepts: BTreeMap<&'m str, &'m ConceptDef>,
    pub enums: BTreeMap<&'m str, &'m EnumDef>,
    /// Immediate parent for each concept whose `extends` names a local concept.
    pub resolved_parents: BTreeMap<&'m str, Option<&'m str>>,
    pub external: ExternalSymbols,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymbolError {
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
}

/// Result of walking an `extends` chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ancestry {
    /// Ancestors from the immediate parent upward. An external parent, if
    /// any, ends the chain.
    pub chain: Vec<String>,
    /// The name whose repetition stopped the walk, if a cycle was hit.
    pub repeated: Option<String>,
}

impl Ancestry {
    pub fn contains(&self, name: &str) -> bool {
        self.chain.iter().any(|n| n == name)
    }
}

/// Builds the table. Later declarations of an already-used top-level name
/// are reported as V401 and left out of the table.
pub fn build_symbols<'m>(
    model: &'m DslModel,
    external: Option<&ExternalSymbols>,
) -> (SymbolTable<'m>, Vec<Diagnostic>) {
    let mut table = SymbolTable {
        concepts: BTreeMap::new(),
        enums: BTreeMap::new(),
        resolved_parents: BTreeMap::new(),
        external: external.cloned().unwrap_or_default(),
    };
    let mut seen: HashSet<&str> = HashSet::new();
    let mut diags = Vec::new();

    for el in &model.elements {
        let name = el.name();
        if !seen.insert(name) {
            diags.push(
                Diagnostic::error(
                    DiagnosticCode::V401,
                    el.span(),
                    format!("`{name}` is already declared"),
                )
                .with_hint("top-level concept and enum names must be unique"),
            );
            continue;
        }
        match el {
            Element::Concept(c) => {
                table.concepts.insert(name, c);
            }
            Element::Enum(e) => {
                table.enums.insert(name, e);
            }
        }
    }

    for (&name, c) in &table.concepts {
        let parent = c
            .extends_name
            .as_ref()
            .and_then(|p| table.concepts.get_key_value(p.name.as_str()))
            .map(|(k, _)| *k);
        table.resolved_parents.insert(name, parent);
    }

    (table, diags)
}

impl<'m> SymbolTable<'m> {
    /// Kind of `name`; local declarations shadow external ones.
    pub fn kind_of(&self, name: &str) -> Option<SymbolKind> {
        if self.concepts.contains_key(name) {
            Some(SymbolKind::Concept)
        } else if self.enums.contains_key(name) {
            Some(SymbolKind::Enum)
        } else {
            self.external.get(name).copied()
        }
    }

    pub fn is_enum(&self, name: &str) -> bool {
        self.kind_of(name) == Some(SymbolKind::Enum)
    }

    pub fn is_concept(&self, name: &str) -> bool {
        self.kind_of(name) == Some(SymbolKind::Concept)
    }

    /// Walks the `extends` chain of `concept`, stopping on the first repeated name.
    pub fn ancestry(&self, concept: &str) -> Result<Ancestry, SymbolError> {
        let start = self
            .concepts
            .get(concept)
            .ok_or_else(|| SymbolError::UnknownConcept(concept.to_string()))?;
        let mut visited: HashSet<&str> = HashSet::from([concept]);
        let mut chain = Vec::new();
        let mut current: &ConceptDef = start;
        loop {
            let Some(parent) = &current.extends_name else {
                return Ok(Ancestry { chain, repeated: None });
            };
            let pname = parent.name.as_str();
            if !visited.insert(pname) {
                return Ok(Ancestry {
                    chain,
                    repeated: Some(pname.to_string()),
                });
            }
            match self.concepts.get(pname) {
                Some(next) => {
                    chain.push(pname.to_string());
                    current = next;
                }
                None => {
                    if self.kind_of(pname) == Some(SymbolKind::Concept) {
                        chain.push(pname.to_string());
                    }
                    return Ok(Ancestry { chain, repeated: None });
                }
            }
        }
    }

    /// `name` itself followed by its ancestors.
    pub fn lineage(&self, name: &str) -> Vec<String> {
        let mut out = vec![name.to_string()];
        if let Ok(a) = self.ancestry(name) {
            out.extend(a.chain);
        }
        out
    }

    /// Whether `name` is `ancestor` or inherits from it.
    pub fn is_same_or_descendant(&self, name: &str, ancestor: &str) -> bool {
        name == ancestor || self.ancestry(name).map(|a| a.contains(ancestor)).unwrap_or(false)
    }
}
