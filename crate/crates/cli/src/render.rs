use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use image::imageops::{self, FilterType};
use image::GrayImage;
use spv_core::io::{load_png, save_png};
use spv_core::saliency::{load_overlay, ComposeConfig};
use spv_core::video::{render_still, source_frame};
use spv_core::{LumaFrame, Method, SaliencyOverlay};

use crate::args::RenderArgs;
use crate::atomic;
use crate::settings::{resolve, Resolved};

#[derive(Clone, Debug)]
pub struct RenderOutcome {
    pub output: PathBuf,
    pub debug: Option<PathBuf>,
    pub seed: u64,
    pub seed_drawn: bool,
}

pub(crate) fn overlay_for(
    dir: Option<&Path>,
    index: usize,
    method: Method,
) -> Result<Option<SaliencyOverlay>> {
    match (method, dir) {
        (Method::Direct, _) => Ok(None),
        (_, None) => bail!("method {} needs --overlays", method.display_name()),
        (_, Some(d)) => Ok(Some(
            load_overlay(d, index, &ComposeConfig::default())
                .with_context(|| format!("loading overlay {index}"))?,
        )),
    }
}

pub fn cmd_render(args: &RenderArgs) -> Result<RenderOutcome> {
    let Resolved {
        grid_config,
        grid,
        pipeline,
        seed_drawn,
    } = resolve(&args.options, None, None)?;
    let frame = load_png(&args.image)?;
    let overlay = overlay_for(args.overlays.as_deref(), args.overlay_index, pipeline.method)?;
    let rendered = render_still(&frame, overlay.as_ref(), &pipeline, &grid)?;
    atomic::write_file(&args.output, |p| Ok(save_png(&rendered, p)?))?;

    let debug = if args.debug {
        let composed = source_frame(&frame, overlay.as_ref(), pipeline.method)?;
        let strip = debug_strip(&[&frame, &composed, &rendered]);
        let path = debug_path(&args.output);
        atomic::write_file(&path, |p| Ok(save_png(&strip, p)?))?;
        Some(path)
    } else {
        None
    };
    Ok(RenderOutcome {
        output: args.output.clone(),
        debug,
        seed: grid_config.seed,
        seed_drawn,
    })
}

pub fn debug_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("render");
    output.with_file_name(format!("{stem}.debug.png"))
}

/// Panels scaled to the height of the last one and laid side by side.
pub fn debug_strip(panels: &[&LumaFrame]) -> LumaFrame {
    let h = panels.last().map(|f| f.height()).unwrap_or(0) as u32;
    let scaled: Vec<GrayImage> = panels
        .iter()
        .map(|f| {
            let img = f.to_gray_image();
            if img.height() == h {
                return img;
            }
            let w = ((img.width() as f64 * h as f64 / img.height() as f64).round() as u32).max(1);
            imageops::resize(&img, w, h, FilterType::Triangle)
        })
        .collect();
    let total: u32 = scaled.iter().map(|i| i.width()).sum();
    let mut strip = GrayImage::new(total, h);
    let mut x = 0;
    for img in &scaled {
        imageops::replace(&mut strip, img, x as i64, 0);
        x += img.width();
    }
    LumaFrame::from_gray_image(&strip)
}
