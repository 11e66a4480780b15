use std::path::Path;
use std::sync::Arc;

use tract_onnx::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{ImageBuffer, FILL_GRAY};
use crate::model::{BBox, DamageClass};

use super::backend::{BackendError, ModelBackend, RawDetection};
use super::interchange::ModelSidecar;
use super::preprocess::PreparedImage;

/// Runs an exported detector through tract.
///
/// Expected graph: input `[1, 3, S, S]` normalized float planes; outputs
/// `boxes [1, N, 4]` (x1, y1, x2, y2 in the input frame), `scores [1, N]` and
/// `classes [1, N]` with class codes in `DamageClass` order.
pub struct OnnxBackend {
    name: String,
    sidecar: ModelSidecar,
    plan: Arc<TypedRunnableModel>,
}

impl std::fmt::Debug for OnnxBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxBackend").field("name", &self.name).field("sidecar", &self.sidecar).finish()
    }
}

fn backend_err(name: &str, e: impl std::fmt::Display) -> Error {
    Error::Backend {
        backend: name.to_string(),
        message: e.to_string(),
    }
}

impl OnnxBackend {
    /// Loads `model` and its `<stem>.meta.json` sidecar.
    pub fn load(model: impl AsRef<Path>) -> Result<Self> {
        let model = model.as_ref();
        let sidecar = ModelSidecar::load(ModelSidecar::path_for(model))?;
        let name = sidecar
            .name
            .clone()
            .unwrap_or_else(|| model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
        let s = sidecar.input_size as usize;
        let plan = tract_onnx::onnx()
            .model_for_path(model)
            .and_then(|m| m.with_input_fact(0, InferenceFact::dt_shape(f32::datum_type(), tvec!(1, 3, s, s))))
            .and_then(|m| m.into_optimized())
            .and_then(|m| m.into_runnable())
            .map_err(|e| backend_err(&name, e))?;
        Ok(Self { name, sidecar, plan })
    }

    pub fn sidecar(&self) -> &ModelSidecar {
        &self.sidecar
    }

    fn run_one(&self, img: &ImageBuffer) -> TractResult<Vec<RawDetection>> {
        let s = self.sidecar.input_size;
        // test-time views smaller than the static input are padded at the bottom/right
        let img = if img.dims() == (s, s) {
            img.clone()
        } else {
            let mut canvas = ImageBuffer::filled(s, s, FILL_GRAY);
            canvas.paste(img, 0, 0);
            canvas
        };
        let data = self.sidecar.normalization.apply(&img);
        let input = Tensor::from_shape(&[1, 3, s as usize, s as usize], &data)?;
        let out = self.plan.run(tvec!(input.into_tvalue()))?;
        if out.len() < 3 {
            return Err(TractError::msg(format!("expected boxes, scores and classes outputs, got {}", out.len())));
        }
        let flat = |i: usize| -> TractResult<Vec<f32>> {
            Ok(out[i].cast_to::<f32>()?.to_plain_array_view::<f32>()?.iter().copied().collect())
        };
        let (boxes, scores, classes) = (flat(0)?, flat(1)?, flat(2)?);
        if boxes.len() != scores.len() * 4 || classes.len() != scores.len() {
            return Err(TractError::msg(format!(
                "inconsistent output sizes {} / {} / {}",
                boxes.len(),
                scores.len(),
                classes.len()
            )));
        }
        Ok(scores
            .iter()
            .zip(&classes)
            .zip(boxes.chunks_exact(4))
            .filter_map(|((&score, &code), b)| {
                let cls = DamageClass::from_code(code.round() as i64)?;
                Some(RawDetection {
                    cls,
                    bbox: BBox::new(b[0] as f64, b[1] as f64, b[2] as f64, b[3] as f64),
                    confidence: score as f64,
                })
            })
            .collect())
    }
}

impl ModelBackend for OnnxBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn input_size(&self) -> u32 {
        self.sidecar.input_size
    }

    fn predict(&self, batch: &[PreparedImage]) -> std::result::Result<Vec<Vec<RawDetection>>, BackendError> {
        batch
            .iter()
            .map(|p| {
                let px = p
                    .pixels
                    .as_ref()
                    .ok_or_else(|| BackendError(format!("`{}` has no pixels", p.image_id)))?;
                self.run_one(px).map_err(|e| BackendError(format!("{}: {e}", p.image_id)))
            })
            .collect()
    }
}
