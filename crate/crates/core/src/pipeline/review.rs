//! Human approval of the stage-1 model.

use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReviewDecision {
    Approve,
    /// Replacement DSL text. It must parse and validate.
    Edit(String),
    Reject,
}

pub trait ReviewGate: Send + Sync {
    /// Receives the canonical printed model and blocks until a decision.
    fn review(&self, printed_model: &str) -> ReviewDecision;
}

/// Line-oriented gate: prints the model, then reads `approve`, `reject`
/// or `edit <path>`. Unrecognised input re-prompts; end of input rejects.
pub struct StdinReview {
    input: Mutex<Box<dyn BufRead + Send>>,
    output: Mutex<Box<dyn Write + Send>>,
}

impl StdinReview {
    pub fn new() -> Self {
        Self::with_io(Box::new(std::io::BufReader::new(std::io::stdin())), Box::new(std::io::stderr()))
    }

    pub fn with_io(input: Box<dyn BufRead + Send>, output: Box<dyn Write + Send>) -> Self {
        Self {
            input: Mutex::new(input),
            output: Mutex::new(output),
        }
    }
}

impl Default for StdinReview {
    fn default() -> Self {
        Self::new()
    }
}

impl ReviewGate for StdinReview {
    fn review(&self, printed_model: &str) -> ReviewDecision {
        let mut input = self.input.lock().expect("review input");
        let mut out = self.output.lock().expect("review output");
        let _ = writeln!(out, "---- generated data model ----\n{printed_model}------------------------------");
        loop {
            let _ = write!(out, "approve | reject | edit <file> > ");
            let _ = out.flush();
            let mut line = String::new();
            match input.read_line(&mut line) {
                Ok(0) | Err(_) => return ReviewDecision::Reject,
                Ok(_) => {}
            }
            let line = line.trim();
            match line.split_once(char::is_whitespace).unwrap_or((line, "")) {
                ("approve" | "a" | "y", _) => return ReviewDecision::Approve,
                ("reject" | "r" | "n", _) => return ReviewDecision::Reject,
                ("edit" | "e", path) if !path.trim().is_empty() => match std::fs::read_to_string(path.trim()) {
                    Ok(text) => return ReviewDecision::Edit(text),
                    Err(e) => {
                        let _ = writeln!(out, "cannot read {}: {e}", path.trim());
                    }
                },
                _ => {
                    let _ = writeln!(out, "unrecognised: {line:?}");
                }
            }
        }
    }
}

/// Returns queued decisions in order and records what it was shown.
/// Approves once the queue is empty.
#[derive(Default)]
pub struct ScriptedReview {
    decisions: Mutex<VecDeque<ReviewDecision>>,
    shown: Mutex<Vec<String>>,
}

impl ScriptedReview {
    pub fn new(decisions: impl IntoIterator<Item = ReviewDecision>) -> Self {
        Self {
            decisions: Mutex::new(decisions.into_iter().collect()),
            shown: Mutex::new(Vec::new()),
        }
    }

    pub fn shown(&self) -> Vec<String> {
        self.shown.lock().expect("shown").clone()
    }
}

impl ReviewGate for ScriptedReview {
    fn review(&self, printed_model: &str) -> ReviewDecision {
        self.shown.lock().expect("shown").push(printed_model.to_string());
        self.decisions
            .lock()
            .expect("decisions")
            .pop_front()
            .unwrap_or(ReviewDecision::Approve)
    }
}
