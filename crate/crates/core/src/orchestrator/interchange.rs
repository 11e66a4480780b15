use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::model::DamageClass;

/// Per-channel input normalization: `(pixel / 255 - mean) / std`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Normalization {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl Default for Normalization {
    /// Plain `[0, 1]` scaling.
    fn default() -> Self {
        Self {
            mean: [0.0; 3],
            std: [1.0; 3],
        }
    }
}

impl Normalization {
    /// Channel-planar (`3 x H x W`) float input.
    pub fn apply(&self, img: &ImageBuffer) -> Vec<f32> {
        let plane = img.width as usize * img.height as usize;
        let mut out = vec![0.0f32; plane * 3];
        for (i, px) in img.data.chunks_exact(3).enumerate() {
            for c in 0..3 {
                out[c * plane + i] = ((px[c] as f64 / 255.0 - self.mean[c]) / self.std[c]) as f32;
            }
        }
        out
    }
}

/// JSON metadata stored next to an exported model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSidecar {
    pub input_size: u32,
    pub class_names: Vec<String>,
    pub normalization: Normalization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub fused: bool,
}

impl ModelSidecar {
    pub fn new(input_size: u32) -> Self {
        Self {
            input_size,
            class_names: DamageClass::ALL.iter().map(|c| c.name().to_string()).collect(),
            normalization: Normalization::default(),
            name: None,
            fused: false,
        }
    }

    /// `model.onnx` -> `model.meta.json`.
    pub fn path_for(model: &Path) -> PathBuf {
        model.with_extension("meta.json")
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.input_size == 0 || !self.input_size.is_multiple_of(32) {
            problems.push(format!("input_size {} is not a positive multiple of 32", self.input_size));
        }
        let expected: Vec<&str> = DamageClass::ALL.iter().map(|c| c.name()).collect();
        if self.class_names != expected {
            problems.push(format!(
                "class_names {:?} must be {:?} in that order",
                self.class_names, expected
            ));
        }
        if self.normalization.std.iter().any(|s| !(s.is_finite() && *s > 0.0))
            || self.normalization.mean.iter().any(|m| !m.is_finite())
        {
            problems.push("normalization std must be positive and mean finite".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let model = dir.path().join("tiny.onnx");
        let path = ModelSidecar::path_for(&model);
        assert_eq!(path.file_name().unwrap(), "tiny.meta.json");
        let s = ModelSidecar::new(640);
        s.save(&path).unwrap();
        assert_eq!(ModelSidecar::load(&path).unwrap(), s);
    }

    #[test]
    fn accepts_exporter_document() {
        let doc = r#"{"input_size": 640, "class_names": ["D00","D10","D20","D40"],
            "normalization": {"mean": [0,0,0], "std": [1,1,1]}, "name": "tiny", "fused": true}"#;
        let s = ModelSidecar::from_json(doc).unwrap();
        assert!(s.fused);
    }

    #[test]
    fn rejects_reordered_classes() {
        let doc = r#"{"input_size": 640, "class_names": ["D10","D00","D20","D40"],
            "normalization": {"mean": [0,0,0], "std": [1,1,1]}}"#;
        let Err(Error::Config(p)) = ModelSidecar::from_json(doc) else { panic!() };
        assert_eq!(p.len(), 1);
        let doc = r#"{"input_size": 600, "class_names": ["D00","D10","D20","D40"],
            "normalization": {"mean": [0,0,0], "std": [0,1,1]}}"#;
        let Err(Error::Config(p)) = ModelSidecar::from_json(doc) else { panic!() };
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn planar_normalization() {
        let img = ImageBuffer::from_raw(2, 1, vec![255, 0, 51, 0, 255, 102]).unwrap();
        let n = Normalization { mean: [0.5; 3], std: [0.5; 3] };
        assert_eq!(n.apply(&img), vec![1.0, -1.0, -1.0, 1.0, -0.6, -0.2]);
    }
}
