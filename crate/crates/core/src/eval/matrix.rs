use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ModelEntry, Scenario};
use crate::llm::ChatBackend;
use crate::pipeline::{DslChecker, GenerationRun, Pipeline, PipelineConfig, RunLog, Stage};
use crate::prompt::PromptSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFailure {
    pub model_id: String,
    pub scenario_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValiditySummary {
    /// Scenarios with at least one VALID run, for every registry model.
    pub per_model: BTreeMap<String, usize>,
    pub models_with_valid: usize,
    pub total_models: usize,
}

impl ValiditySummary {
    pub fn models_without_valid(&self) -> usize {
        self.total_models - self.models_with_valid
    }
}

#[derive(Debug)]
pub struct MatrixReport {
    /// Completed runs in registry order, then scenario order.
    pub runs: Vec<GenerationRun>,
    pub failures: Vec<PairFailure>,
    pub summary: ValiditySummary,
}

/// Validity counts for `registry` over data-model runs.
pub fn summarize(registry: &[ModelEntry], runs: &[GenerationRun]) -> ValiditySummary {
    let mut valid: HashSet<(&str, &str)> = HashSet::new();
    for r in runs.iter().filter(|r| r.stage == Stage::DataModel && r.is_valid()) {
        valid.insert((r.model_id.as_str(), r.scenario_id.as_str()));
    }
    let per_model: BTreeMap<String, usize> = registry
        .iter()
        .map(|m| {
            let n = valid.iter().filter(|(id, _)| *id == m.model_id).count();
            (m.model_id.clone(), n)
        })
        .collect();
    ValiditySummary {
        models_with_valid: per_model.values().filter(|&&n| n > 0).count(),
        total_models: registry.len(),
        per_model,
    }
}

/// Runs every (model, scenario) pair. Models are spread over at most
/// `workers` threads; one model's scenarios run in order so scripted
/// backends stay deterministic. Fatal errors are recorded per pair.
pub fn run_matrix(
    registry: &[ModelEntry],
    scenarios: &[Scenario],
    cfg: &PipelineConfig,
    backend: &dyn ChatBackend,
    log: Option<&RunLog>,
    workers: usize,
) -> MatrixReport {
    let slots: Vec<Mutex<(Vec<GenerationRun>, Vec<PairFailure>)>> =
        registry.iter().map(|_| Mutex::new((Vec::new(), Vec::new()))).collect();
    let next = AtomicUsize::new(0);
    let workers = workers.clamp(1, registry.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| {
                let mut pipeline = Pipeline::new(cfg.clone(), backend);
                pipeline.log = log;
                let checker = DslChecker::default();
                loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(model) = registry.get(i) else { break };
                    let mut slot = slots[i].lock().expect("matrix slot");
                    for sc in scenarios {
                        let mut spec = PromptSpec::new(&sc.user_input);
                        if let Some(pair) = &sc.example_pair {
                            spec = spec.with_examples(vec![pair.clone()]);
                        }
                        match pipeline.run_generation(&sc.scenario_id, Stage::DataModel, &spec, &model.model_id, &checker) {
                            Ok(run) => slot.0.push(run),
                            Err(e) => slot.1.push(PairFailure {
                                model_id: model.model_id.clone(),
                                scenario_id: sc.scenario_id.clone(),
                                error: e.to_string(),
                            }),
                        }
                    }
                }
            });
        }
    });
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for slot in slots {
        let (r, f) = slot.into_inner().expect("matrix slot");
        runs.extend(r);
        failures.extend(f);
    }
    let summary = summarize(registry, &runs);
    MatrixReport { runs, failures, summary }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{ReplayBackend, ReplayScript, ScriptEntry, ScriptedFailure};

    const VALID: &str = "main concept A {\n    one n : string;\n}\n";

    fn entry(id: &str) -> ModelEntry {
        ModelEntry {
            model_id: id.into(),
            family: "f".into(),
            params_billions: 1.0,
            notes: String::new(),
        }
    }

    fn scenario(id: &str) -> Scenario {
        Scenario {
            scenario_id: id.into(),
            user_input: "x".into(),
            example_pair: None,
        }
    }

    #[test]
    fn one_by_one_valid() {
        let b = ReplayBackend::single("m", &[VALID]);
        let r = run_matrix(&[entry("m")], &[scenario("s")], &PipelineConfig::default(), &b, None, 4);
        assert_eq!(r.summary.models_with_valid, 1);
        assert_eq!(r.summary.total_models, 1);
        assert!(r.failures.is_empty());
    }

    #[test]
    fn fatal_pairs_do_not_abort() {
        let mut script = ReplayScript::new();
        script.insert("bad".into(), vec![ScriptEntry::Failure { error: ScriptedFailure::Auth }]);
        script.insert("good".into(), vec![VALID.into(), "nope".into(), "nope".into(), "nope".into()]);
        let b = ReplayBackend::new(script);
        let reg = [entry("bad"), entry("good")];
        let r = run_matrix(&reg, &[scenario("s1"), scenario("s2")], &PipelineConfig::default(), &b, None, 2);
        assert_eq!(r.failures.len(), 2);
        assert_eq!(r.runs.len(), 2);
        assert_eq!(r.summary.per_model["good"], 1);
        assert_eq!(r.summary.per_model["bad"], 0);
        assert_eq!(r.summary.models_with_valid + r.summary.models_without_valid(), 2);
        assert_eq!(r.runs[0].scenario_id, "s1");
    }
}
