use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::model::Split;
use crate::seeding::key_for;

use super::DatasetManifest;

/// Validation images for a folder of `n`: nearest integer, at least one when `n >= 2`.
pub fn val_count(n: usize, val_fraction: f64) -> usize {
    let k = (n as f64 * val_fraction).round() as usize;
    if n >= 2 {
        k.clamp(1, n - 1)
    } else {
        k.min(n)
    }
}

/// Assigns train/val per folder. The choice depends only on `(seed, id)`, so the
/// result is the same for any ordering of the manifest.
pub fn split_dataset(
    manifest: &DatasetManifest,
    val_fraction: f64,
    seed: u64,
    no_test_folders: &HashSet<String>,
) -> Result<DatasetManifest> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::Precondition(format!(
            "val_fraction {val_fraction} not in (0,1)"
        )));
    }
    let mut by_folder: BTreeMap<&str, Vec<(u64, &str, usize)>> = BTreeMap::new();
    for (idx, rec) in manifest.images.iter().enumerate() {
        by_folder
            .entry(rec.folder.as_str())
            .or_default()
            .push((key_for(seed, &rec.id), rec.id.as_str(), idx));
    }

    let mut out = manifest.clone();
    for rec in &mut out.images {
        rec.split = Split::Train;
    }
    for (folder, mut members) in by_folder {
        if no_test_folders.contains(folder) {
            continue;
        }
        members.sort_unstable();
        let k = val_count(members.len(), val_fraction);
        for &(_, _, idx) in members.iter().take(k) {
            out.images[idx].split = Split::Val;
        }
    }
    Ok(out)
}
