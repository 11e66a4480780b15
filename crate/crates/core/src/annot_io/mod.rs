//! Annotation and dataset formats: PASCAL VOC XML in, YOLO text labels out,
//! line-delimited JSON manifests, class remapping, splitting and statistics.

mod manifest;
mod remap;
mod split;
mod stats;
mod voc;
mod yolo;

pub use manifest::DatasetManifest;
pub use remap::{remap_classes, ClassRemap, RawLabel};
pub use split::{split_dataset, val_count};
pub use stats::{distribution_stats, DistributionReport, FolderStats, Histogram};
pub use voc::{parse_voc, parse_voc_document, ObjectError, VocDocument, VocParse};
pub use yolo::{parse_yolo, parse_yolo_raw, write_yolo, YoloOutput};
