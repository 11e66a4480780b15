use std::path::PathBuf;

use crate::error::Result;
use crate::imaging::ImageBuffer;
use crate::model::ImageRecord;

/// Where the pipeline gets pixels from. `None` means the backend works from
/// geometry alone (test doubles).
pub trait ImageSource: Sync {
    fn load(&self, record: &ImageRecord) -> Result<Option<ImageBuffer>>;
}

/// Supplies no pixels.
#[derive(Debug, Clone, Copy, Default)]
pub struct DimsOnly;

impl ImageSource for DimsOnly {
    fn load(&self, _record: &ImageRecord) -> Result<Option<ImageBuffer>> {
        Ok(None)
    }
}

/// Reads `<root>/<folder>/<id>.ppm`, falling back to `<root>/<id>.ppm`.
#[derive(Debug, Clone)]
pub struct PpmDirectory {
    pub root: PathBuf,
}

impl ImageSource for PpmDirectory {
    fn load(&self, record: &ImageRecord) -> Result<Option<ImageBuffer>> {
        let nested = self.root.join(&record.folder).join(format!("{}.ppm", record.id));
        let path = if nested.exists() {
            nested
        } else {
            self.root.join(format!("{}.ppm", record.id))
        };
        ImageBuffer::load_ppm(path).map(Some)
    }
}
