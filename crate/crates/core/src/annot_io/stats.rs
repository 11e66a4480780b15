use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::model::DamageClass;

use super::DatasetManifest;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FolderStats {
    pub images: usize,
    /// Indexed by `DamageClass::code()`.
    pub class_counts: [usize; 4],
}

impl FolderStats {
    pub fn labels(&self) -> usize {
        self.class_counts.iter().sum()
    }

    pub fn count(&self, cls: DamageClass) -> usize {
        self.class_counts[cls.code() as usize]
    }
}

/// Damage-type counts per source folder.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DistributionReport {
    pub folders: BTreeMap<String, FolderStats>,
}

/// Bar-chart ready series: one row of class counts per folder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub classes: Vec<&'static str>,
    pub folders: Vec<String>,
    pub counts: Vec<[usize; 4]>,
}

impl DistributionReport {
    pub fn class_totals(&self) -> [usize; 4] {
        let mut totals = [0; 4];
        for f in self.folders.values() {
            for (t, c) in totals.iter_mut().zip(f.class_counts) {
                *t += c;
            }
        }
        totals
    }

    pub fn total_labels(&self) -> usize {
        self.class_totals().iter().sum()
    }

    pub fn total_images(&self) -> usize {
        self.folders.values().map(|f| f.images).sum()
    }

    /// `folder,class,count` rows, then per-class totals and a grand total.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("folder,class,count\n");
        for (name, f) in &self.folders {
            for cls in DamageClass::ALL {
                let _ = writeln!(s, "{name},{cls},{}", f.count(cls));
            }
        }
        for (cls, n) in DamageClass::ALL.iter().zip(self.class_totals()) {
            let _ = writeln!(s, "total,{cls},{n}");
        }
        let _ = writeln!(s, "total,all,{}", self.total_labels());
        s
    }

    pub fn histogram(&self) -> Histogram {
        Histogram {
            classes: DamageClass::ALL.iter().map(|c| c.name()).collect(),
            folders: self.folders.keys().cloned().collect(),
            counts: self.folders.values().map(|f| f.class_counts).collect(),
        }
    }
}

pub fn distribution_stats(manifest: &DatasetManifest) -> DistributionReport {
    let mut report = DistributionReport::default();
    for rec in &manifest.images {
        let f = report.folders.entry(rec.folder.clone()).or_default();
        f.images += 1;
        for ann in &rec.annotations {
            f.class_counts[ann.cls.code() as usize] += 1;
        }
    }
    report
}
