use std::path::{Path, PathBuf};

use anyhow::Context;
use roadscan_core::{validate_config, PipelineConfig};
use serde::{Deserialize, Serialize};

use crate::UsageError;

/// Paths a run may take from the config file instead of flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub dataset_root: Option<PathBuf>,
    pub images_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub normal_models: Vec<PathBuf>,
    pub large_models: Vec<PathBuf>,
}

/// The `--config` JSON document. Unknown keys are rejected at every level.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfigFile {
    pub pipeline: PipelineConfig,
    pub paths: Paths,
}

impl CliConfigFile {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(|e| UsageError(format!("{e:#}")))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }

    /// Rejects a pipeline config that breaks any validation rule.
    pub fn checked_pipeline(&self) -> anyhow::Result<PipelineConfig> {
        let problems = validate_config(&self.pipeline);
        if problems.is_empty() {
            Ok(self.pipeline.clone())
        } else {
            Err(UsageError(format!("invalid pipeline config: {}", problems.join("; "))).into())
        }
    }

    /// Resolves a path relative to the dataset root when one is configured.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.paths.dataset_root {
            Some(root) if p.is_relative() && !p.exists() => root.join(p),
            _ => p.to_path_buf(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_pipeline_defaults() {
        let c: CliConfigFile = serde_json::from_str("{}").unwrap();
        assert_eq!(c.pipeline, PipelineConfig::default());
        let c: CliConfigFile = serde_json::from_str(r#"{"pipeline": {"batch_large": 16}, "paths": {"output_dir": "out"}}"#).unwrap();
        assert_eq!(c.pipeline.batch_large, 16);
        assert_eq!(c.paths.output_dir, Some(PathBuf::from("out")));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<CliConfigFile>(r#"{"pipline": {}}"#).is_err());
        assert!(serde_json::from_str::<CliConfigFile>(r#"{"paths": {"out": "x"}}"#).is_err());
        assert!(serde_json::from_str::<CliConfigFile>(r#"{"pipeline": {"batch": 3}}"#).is_err());
    }
}
