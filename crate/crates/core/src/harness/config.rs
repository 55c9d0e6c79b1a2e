use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::harness::generate::GeneratorSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Online,
    OfflineAlg1,
    Gather,
    Derandomize,
    Lowerbound,
    Generate,
    Distribution,
}

/// Everything needed to reproduce one invocation. Written next to results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: RunMode,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    pub outputs: Vec<PathBuf>,
}
