//! Grammar-checked generation of entity-modeling DSL documents by LLMs.
//!
//! A model's reply is extracted, parsed by an LALR(1) parser and validated;
//! failures are fed back as diagnostics for a bounded number of retries.
//! Valid outputs become rating tasks for human raters, and their ratings
//! are aggregated per model.
//!
//! Module map: [`dsl`] parses and prints, [`validate`] resolves names and
//! checks semantics, [`prompt`] renders prompts, [`llm`] talks to backends,
//! [`pipeline`] runs the retry loop and its log, [`eval`] runs model
//! matrices and aggregates ratings, [`rating`] serves the rating API.

pub mod dsl;
pub mod validate;
pub mod prompt;
pub mod llm;
pub mod pipeline;
pub mod eval;
pub mod rating;
