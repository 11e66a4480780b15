use std::path::{Path, PathBuf};

use anyhow::Context as _;
use clap::Args;
use rayon::prelude::*;
use roadscan_core::annot_io::{parse_voc_document, write_yolo, DatasetManifest};
use roadscan_core::ImageRecord;

use super::{write_text, Context};
use crate::UsageError;

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Directory searched recursively for `*.xml` files.
    pub voc_dir: PathBuf,
    /// Receives one `.txt` label file per XML (same relative path) and `manifest.jsonl`.
    pub out_dir: PathBuf,
    /// Exit 0 even when some files cannot be parsed.
    #[arg(long)]
    pub keep_going: bool,
}

struct Converted {
    record: ImageRecord,
    labels: String,
    skipped: usize,
    object_errors: usize,
}

/// Folder of a file: its top-level directory under the root, or the root's own name.
fn folder_of(root: &Path, rel: &Path) -> String {
    let mut parts = rel.components();
    match (parts.next(), parts.next()) {
        (Some(first), Some(_)) => first.as_os_str().to_string_lossy().into_owned(),
        _ => root.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
    }
}

fn convert_one(root: &Path, path: &Path) -> anyhow::Result<Converted> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = parse_voc_document(&text)?;
    let rel = path.strip_prefix(root).unwrap_or(path);
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let yolo = write_yolo(&doc.parsed.annotations, (doc.width, doc.height));
    for w in &yolo.warnings {
        log::warn!("{}: {w}", path.display());
    }
    for e in &doc.parsed.errors {
        log::warn!("{}: object {}: {}", path.display(), e.index, e.message);
    }
    Ok(Converted {
        record: ImageRecord::new(id, folder_of(root, rel), doc.width, doc.height)
            .with_annotations(doc.parsed.annotations.clone()),
        labels: yolo.to_text(),
        skipped: doc.parsed.skipped,
        object_errors: doc.parsed.errors.len(),
    })
}

pub fn run(ctx: &Context, args: ConvertArgs) -> anyhow::Result<()> {
    let root = ctx.file.resolve(&args.voc_dir);
    if !root.is_dir() {
        return Err(UsageError(format!("{} is not a directory", root.display())).into());
    }
    let mut files: Vec<PathBuf> = walkdir::WalkDir::new(&root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x.eq_ignore_ascii_case("xml")))
        .map(|e| e.into_path())
        .collect();
    files.sort();

    let results: Vec<anyhow::Result<Converted>> =
        ctx.pool()?.install(|| files.par_iter().map(|f| convert_one(&root, f)).collect());

    let mut manifest = DatasetManifest::default();
    let (mut skipped, mut object_errors, mut failed) = (0, 0, 0);
    for (path, res) in files.iter().zip(results) {
        match res {
            Ok(c) => {
                let rel = path.strip_prefix(&root).unwrap_or(path);
                write_text(&args.out_dir.join(rel).with_extension("txt"), &c.labels)?;
                skipped += c.skipped;
                object_errors += c.object_errors;
                manifest.images.push(c.record);
            }
            Err(e) => {
                failed += 1;
                eprintln!("{}: {e:#}", path.display());
            }
        }
    }
    manifest.sort_by_id();
    std::fs::create_dir_all(&args.out_dir)?;
    manifest.save(args.out_dir.join("manifest.jsonl"))?;
    println!(
        "converted {} files, {} errored; objects: {} labels, {} skipped (other classes), {} invalid",
        manifest.len(),
        failed,
        manifest.images.iter().map(|r| r.annotations.len()).sum::<usize>(),
        skipped,
        object_errors
    );
    if failed > 0 && !args.keep_going {
        anyhow::bail!("{failed} file(s) could not be converted (use --keep-going to accept)");
    }
    Ok(())
}
