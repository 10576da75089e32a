use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::prompt::ExamplePair;

const BUNDLED_REGISTRY: &str = include_str!("../../data/registry.json");
const BUNDLED_SCENARIOS: &str = include_str!("../../data/scenarios.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub model_id: String,
    pub family: String,
    pub params_billions: f64,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub scenario_id: String,
    pub user_input: String,
    /// Replaces the default few-shot example for this scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example_pair: Option<ExamplePair>,
}

pub fn parse_registry(text: &str) -> Result<Vec<ModelEntry>, EvalError> {
    let entries: Vec<ModelEntry> = serde_json::from_str(text).map_err(|e| EvalError::format("registry", e))?;
    let mut seen = HashSet::new();
    for e in &entries {
        if !seen.insert(e.model_id.as_str()) {
            return Err(EvalError::DuplicateModel(e.model_id.clone()));
        }
        if !e.params_billions.is_finite() || e.params_billions <= 0.0 {
            return Err(EvalError::NonPositiveParams {
                model_id: e.model_id.clone(),
                params: e.params_billions,
            });
        }
    }
    Ok(entries)
}

pub fn load_registry(path: impl AsRef<Path>) -> Result<Vec<ModelEntry>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
    parse_registry(&text)
}

/// The 39 evaluated models, parameter counts normalized to billions.
pub fn bundled_registry() -> Vec<ModelEntry> {
    parse_registry(BUNDLED_REGISTRY).expect("bundled registry is well formed")
}

/// Registry entries with `params_billions <= max` (inclusive).
pub fn registry_max_params(registry: &[ModelEntry], max: f64) -> Vec<ModelEntry> {
    registry.iter().filter(|e| e.params_billions <= max).cloned().collect()
}

pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>, EvalError> {
    let scenarios: Vec<Scenario> = serde_json::from_str(text).map_err(|e| EvalError::format("scenarios", e))?;
    let mut seen = HashSet::new();
    for s in &scenarios {
        if !seen.insert(s.scenario_id.as_str()) {
            return Err(EvalError::DuplicateScenario(s.scenario_id.clone()));
        }
        if s.user_input.trim().is_empty() {
            return Err(EvalError::EmptyScenario(s.scenario_id.clone()));
        }
    }
    Ok(scenarios)
}

pub fn load_scenarios(path: impl AsRef<Path>) -> Result<Vec<Scenario>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
    parse_scenarios(&text)
}

pub fn bundled_scenarios() -> Vec<Scenario> {
    parse_scenarios(BUNDLED_SCENARIOS).expect("bundled scenarios are well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(reg: &[ModelEntry], id: &str) -> f64 {
        reg.iter().find(|e| e.model_id == id).unwrap().params_billions
    }

    #[test]
    fn bundled_rows() {
        let reg = bundled_registry();
        assert_eq!(reg.len(), 39);
        assert_eq!(params(&reg, "gemma3:12b"), 12.2);
        assert!((params(&reg, "qwen2.5-coder:0.5b") - 0.494).abs() < 5e-4);
        assert_eq!(params(&reg, "gemma3:1b"), 0.99989);
        assert_eq!(params(&reg, "qwq:latest"), 32.8);
        let families: HashSet<&str> = reg.iter().map(|e| e.family.as_str()).collect();
        assert_eq!(families.len(), 8);
    }

    #[test]
    fn small_model_view_is_inclusive() {
        let reg = bundled_registry();
        let small = registry_max_params(&reg, 8.0);
        assert_eq!(small.len(), 30);
        assert!(small.iter().any(|e| e.model_id == "llama3.1:latest"));
        assert!(!small.iter().any(|e| e.model_id == "gemma:latest"));
    }

    #[test]
    fn registry_errors() {
        let dup = r#"[{"model_id":"a","family":"f","params_billions":1},{"model_id":"a","family":"f","params_billions":2}]"#;
        assert!(matches!(parse_registry(dup), Err(EvalError::DuplicateModel(_))));
        let zero = r#"[{"model_id":"a","family":"f","params_billions":0}]"#;
        assert!(matches!(parse_registry(zero), Err(EvalError::NonPositiveParams { .. })));
        assert!(parse_registry("{").is_err());
    }

    #[test]
    fn scenarios() {
        let s = bundled_scenarios();
        assert!(s.iter().any(|s| s.scenario_id == "ice-cream-parlor"));
        assert!(s.iter().any(|s| s.scenario_id == "conference-planner"));
        let empty = r#"[{"scenario_id":"a","user_input":"  "}]"#;
        assert!(matches!(parse_scenarios(empty), Err(EvalError::EmptyScenario(_))));
        let dup = r#"[{"scenario_id":"a","user_input":"x"},{"scenario_id":"a","user_input":"y"}]"#;
        assert!(matches!(parse_scenarios(dup), Err(EvalError::DuplicateScenario(_))));
    }
}
