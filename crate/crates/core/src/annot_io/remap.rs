use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Annotation, BBox, DamageClass};

/// A label carrying an external dataset's integer class code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawLabel {
    pub code: i64,
    pub bbox: BBox,
}

/// External class code -> damage class. Need not be injective.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRemap {
    pub mapping: BTreeMap<i64, DamageClass>,
}

impl ClassRemap {
    /// Codes `0..=3` map onto themselves.
    pub fn identity() -> Self {
        Self {
            mapping: DamageClass::ALL.iter().map(|c| (c.code() as i64, *c)).collect(),
        }
    }

    /// Single-class pothole datasets label potholes as `0`.
    pub fn pothole_dataset() -> Self {
        Self {
            mapping: BTreeMap::from([(0, DamageClass::D40)]),
        }
    }

    pub fn get(&self, code: i64) -> Option<DamageClass> {
        self.mapping.get(&code).copied()
    }
}

impl Default for ClassRemap {
    fn default() -> Self {
        Self::identity()
    }
}

pub fn remap_classes(labels: &[RawLabel], remap: &ClassRemap) -> Result<Vec<Annotation>> {
    labels
        .iter()
        .map(|l| {
            remap
                .get(l.code)
                .map(|cls| Annotation::new(cls, l.bbox))
                .ok_or(Error::UnmappedClass(l.code))
        })
        .collect()
}
