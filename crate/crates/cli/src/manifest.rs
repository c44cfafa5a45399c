use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

pub const ARTIFACT_VERSION: &str = concat!("hetmed ", env!("CARGO_PKG_VERSION"));

/// Provenance record attached to every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub artifact_version: &'static str,
    pub started: String,
    pub finished: Option<String>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, config: Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            config,
            seed,
            artifact_version: ARTIFACT_VERSION,
            started: now(),
            finished: None,
        }
    }

    pub fn finish(mut self) -> Self {
        self.finished = Some(now());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}
