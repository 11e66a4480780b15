use std::path::PathBuf;

use anyhow::Context as _;
use clap::Args;
use roadscan_core::annot_io::DatasetManifest;
use roadscan_core::geometry::{crop_annotations, is_large, lower_left_region, RetainPolicy};
use roadscan_core::imaging::ImageBuffer;

use super::{load_manifest, Context};

#[derive(Debug, Args)]
pub struct CropArgs {
    /// Input JSONL manifest.
    pub manifest: PathBuf,
    /// Output JSONL manifest.
    pub out_manifest: PathBuf,
    /// Side of the lower-left square (default: `pipeline.crop_size`).
    #[arg(long)]
    pub size: Option<u32>,
    /// Appended to the folder name of cropped images.
    #[arg(long, default_value = "1")]
    pub folder_suffix: String,
    /// Directory of `<id>.ppm` images to crop as well.
    #[arg(long, requires = "out_images")]
    pub images: Option<PathBuf>,
    /// Where cropped `<id>.ppm` images are written.
    #[arg(long, requires = "images")]
    pub out_images: Option<PathBuf>,
}

pub fn run(ctx: &Context, args: CropArgs) -> anyhow::Result<()> {
    let cfg = &ctx.file.pipeline;
    let size = args.size.unwrap_or(cfg.crop_size);
    let input = load_manifest(ctx, &args.manifest)?;
    let policy = RetainPolicy::default();
    let mut out = DatasetManifest::default();
    let (mut cropped, mut kept, mut modified, mut dropped) = (0, 0, 0, 0);
    for rec in &input.images {
        if !is_large(rec.dims(), &cfg.large_predicate) {
            out.images.push(rec.clone());
            continue;
        }
        let region = match lower_left_region(rec.dims(), size) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("{}: {e}; left uncropped", rec.id);
                out.images.push(rec.clone());
                continue;
            }
        };
        let clip = crop_annotations(&rec.annotations, &region, &policy);
        kept += clip.kept.len();
        modified += clip.modified;
        dropped += clip.dropped;
        cropped += 1;
        if let (Some(src), Some(dst)) = (&args.images, &args.out_images) {
            let img = ImageBuffer::load_ppm(src.join(format!("{}.ppm", rec.id)))?;
            std::fs::create_dir_all(dst)?;
            img.crop(region.x0, region.y0, size, size)?
                .save_ppm(dst.join(format!("{}.ppm", rec.id)))
                .with_context(|| format!("writing crop of {}", rec.id))?;
        }
        let mut rec = rec.clone();
        rec.folder = format!("{}{}", rec.folder, args.folder_suffix);
        rec.width = size;
        rec.height = size;
        rec.annotations = clip.kept;
        out.images.push(rec);
    }
    out.save(&args.out_manifest)?;
    println!("cropped {cropped} of {} images; labels kept {kept} (modified {modified}), dropped {dropped}", input.len());
    Ok(())
}
