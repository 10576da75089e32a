//! Backend for the human rating study: rater registration, task serving,
//! Likert ratings and progress.

mod http;
mod store;

use serde::{Deserialize, Serialize};

pub use http::{router, serve, ServeConfig};
pub use store::{RatingService, StoreError, SubmitError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DslExperience {
    None,
    Basic,
    Advanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LlmUsage {
    Never,
    Monthly,
    Weekly,
    Daily,
}

pub const AGE_BANDS: [&str; 7] = ["18-24", "25-34", "35-44", "45-54", "55-64", "65+", "undisclosed"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaterProfile {
    pub rater_id: String,
    pub age_band: String,
    pub gender: String,
    pub dsl_experience: DslExperience,
    pub llm_usage_frequency: LlmUsage,
}

/// Registration body; the service assigns `rater_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewRater {
    pub age_band: String,
    pub gender: String,
    pub dsl_experience: DslExperience,
    pub llm_usage_frequency: LlmUsage,
}

impl NewRater {
    pub fn check(&self) -> Result<(), String> {
        if !AGE_BANDS.contains(&self.age_band.as_str()) {
            return Err(format!("age_band must be one of {}", AGE_BANDS.join(", ")));
        }
        if self.gender.trim().is_empty() {
            return Err("gender must not be empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub rated: usize,
    pub total: usize,
}
