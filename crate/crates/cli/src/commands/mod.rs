pub mod convert;
pub mod crop;
pub mod eval;
pub mod fuse;
pub mod infer;
pub mod split;
pub mod stats;

use std::path::Path;

use anyhow::Context as _;
use roadscan_core::annot_io::DatasetManifest;

use crate::config::CliConfigFile;
use crate::UsageError;

pub struct Context {
    pub file: CliConfigFile,
    /// 0 means every available core.
    pub jobs: usize,
}

impl Context {
    pub fn pool(&self) -> anyhow::Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build()?)
    }
}

pub fn load_manifest(ctx: &Context, path: &Path) -> anyhow::Result<DatasetManifest> {
    let path = ctx.file.resolve(path);
    if !path.is_file() {
        return Err(UsageError(format!("manifest {} does not exist", path.display())).into());
    }
    DatasetManifest::load(&path).with_context(|| format!("loading {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
