use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EvalError, Scenario};
use crate::dsl::{concept_summary, print, ModelSummary};
use crate::pipeline::{GenerationRun, Stage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskOutput {
    /// Run id of the producing run. Carries no model information.
    pub output_id: String,
    /// "Model A", ... when blinded, otherwise the model id.
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    pub dsl_text: String,
    pub concept_summary: ModelSummary,
    pub prompt_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingTask {
    pub task_id: String,
    pub title: String,
    pub description: String,
    pub outputs: Vec<TaskOutput>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TaskFile {
    pub blinded: bool,
    pub tasks: Vec<RatingTask>,
}

impl TaskFile {
    pub fn total_outputs(&self) -> usize {
        self.tasks.iter().map(|t| t.outputs.len()).sum()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| EvalError::format(path.display(), e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyEntry {
    pub task_id: String,
    pub label: String,
    pub model_id: String,
}

/// Reverses blinding: output id to model.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BlindingKey {
    pub outputs: BTreeMap<String, KeyEntry>,
}

impl BlindingKey {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| EvalError::format(path.display(), e))
    }
}

/// Anonymous label for the output at `i`: "Model A", ..., "Model Z", "Model AA".
pub fn blind_label(i: usize) -> String {
    format!("Model {}", letters(i))
}

/// 0 -> "A", 25 -> "Z", 26 -> "AA".
fn letters(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'A' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// One task per scenario holding its VALID data-model outputs. Invalid and
/// incomplete runs are left out. Blinded outputs are ordered by run id,
/// which is random, so labels do not reveal registry order.
pub fn build_rating_tasks(runs: &[GenerationRun], scenarios: &[Scenario], blind: bool) -> (TaskFile, BlindingKey) {
    let mut order: Vec<&str> = Vec::new();
    let mut by_scenario: BTreeMap<&str, Vec<&GenerationRun>> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.stage == Stage::DataModel && r.is_valid()) {
        if r.final_model.is_none() {
            continue;
        }
        if !by_scenario.contains_key(r.scenario_id.as_str()) {
            order.push(&r.scenario_id);
        }
        by_scenario.entry(&r.scenario_id).or_default().push(r);
    }
    let mut key = BlindingKey::default();
    let mut tasks = Vec::new();
    for sid in order {
        let mut group = by_scenario.remove(sid).unwrap_or_default();
        if blind {
            group.sort_by(|a, b| a.run_id.cmp(&b.run_id));
        } else {
            group.sort_by(|a, b| (&a.model_id, &a.run_id).cmp(&(&b.model_id, &b.run_id)));
        }
        let outputs = group
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let model = r.final_model.as_ref().expect("filtered above");
                let label = if blind { blind_label(i) } else { r.model_id.clone() };
                key.outputs.insert(
                    r.run_id.clone(),
                    KeyEntry {
                        task_id: sid.to_string(),
                        label: label.clone(),
                        model_id: r.model_id.clone(),
                    },
                );
                TaskOutput {
                    output_id: r.run_id.clone(),
                    label,
                    model_id: (!blind).then(|| r.model_id.clone()),
                    dsl_text: print(model),
                    concept_summary: concept_summary(model),
                    prompt_text: r.prompt_text().unwrap_or_default().to_string(),
                }
            })
            .collect();
        let description = scenarios
            .iter()
            .find(|s| s.scenario_id == sid)
            .map(|s| s.user_input.clone())
            .unwrap_or_default();
        tasks.push(RatingTask {
            task_id: sid.to_string(),
            title: sid.to_string(),
            description,
            outputs,
        });
    }
    (TaskFile { blinded: blind, tasks }, key)
}

/// Key file path used when none is given: `tasks.json` -> `tasks.key.json`.
pub fn default_key_path(out: &Path) -> PathBuf {
    out.with_extension("key.json")
}

/// Writes the task file, and when blinded, the key file next to it.
pub fn export_rating_tasks(
    runs: &[GenerationRun],
    scenarios: &[Scenario],
    blind: bool,
    out: impl AsRef<Path>,
    key_out: Option<&Path>,
) -> Result<TaskFile, EvalError> {
    let out = out.as_ref();
    let (file, key) = build_rating_tasks(runs, scenarios, blind);
    write_json(out, &file)?;
    if blind {
        let key_path = key_out.map(Path::to_path_buf).unwrap_or_else(|| default_key_path(out));
        write_json(&key_path, &key)?;
    }
    Ok(file)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), EvalError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializes");
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| EvalError::io(path, e))
}
