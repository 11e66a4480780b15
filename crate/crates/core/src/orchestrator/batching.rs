use serde::{Deserialize, Serialize};

use crate::annot_io::DatasetManifest;
use crate::geometry::is_large;
use crate::model::PipelineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeTag {
    Normal,
    Large,
}

impl SizeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SizeTag::Normal => "normal",
            SizeTag::Large => "large",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub tag: SizeTag,
    pub image_ids: Vec<String>,
}

/// Normal batches first, then large, each chunked in image-id order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub batches: Vec<Batch>,
}

impl BatchPlan {
    pub fn sizes(&self, tag: SizeTag) -> Vec<usize> {
        self.batches
            .iter()
            .filter(|b| b.tag == tag)
            .map(|b| b.image_ids.len())
            .collect()
    }

    pub fn image_count(&self) -> usize {
        self.batches.iter().map(|b| b.image_ids.len()).sum()
    }
}

pub fn plan_batches(manifest: &DatasetManifest, cfg: &PipelineConfig) -> BatchPlan {
    let mut normal = Vec::new();
    let mut large = Vec::new();
    for rec in &manifest.images {
        if is_large(rec.dims(), &cfg.large_predicate) {
            large.push(rec.id.clone());
        } else {
            normal.push(rec.id.clone());
        }
    }
    normal.sort();
    large.sort();
    let mut batches = Vec::new();
    for (tag, ids, cap) in [
        (SizeTag::Normal, normal, cfg.batch_normal),
        (SizeTag::Large, large, cfg.batch_large),
    ] {
        for chunk in ids.chunks(cap.max(1)) {
            batches.push(Batch {
                tag,
                image_ids: chunk.to_vec(),
            });
        }
    }
    BatchPlan { batches }
}
