use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spv_core::io::{frame_number, load_png, numbered_pngs, save_png};
use spv_core::saliency::manifest_path;
use spv_core::video::{render_still, resample_indices, TemporalMedian};
use spv_core::{FovSpec, GridConfig, LumaFrame, Method};

use crate::args::VideoArgs;
use crate::atomic::{self, StagedDir};
use crate::render::overlay_for;
use crate::settings::resolve;

pub const MANIFEST: &str = "manifest.json";

/// Written next to the frames of a processed sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoManifest {
    pub fps: f64,
    pub frame_count: usize,
    pub frames: Vec<String>,
    pub method: Method,
    pub levels: u16,
    pub median_window: usize,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fov: Option<FovSpec>,
    pub source_fps: f64,
    pub source_frames: usize,
}

impl VideoManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text =
            std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn frame_file_name(i: usize) -> String {
    format!("frame_{i:06}.png")
}

#[derive(Clone, Debug)]
pub struct VideoOutcome {
    pub output: PathBuf,
    pub manifest: VideoManifest,
    pub seed_drawn: bool,
}

pub fn cmd_video(args: &VideoArgs) -> Result<VideoOutcome> {
    let r = resolve(&args.options, args.fps, args.median_window)?;
    let cfg = &r.pipeline;
    if !(args.src_fps > 0.0 && args.src_fps.is_finite()) {
        bail!("--src-fps must be positive, got {}", args.src_fps);
    }
    let files = numbered_pngs(&args.frames)?;
    if files.is_empty() {
        bail!("no numbered PNG frames in {}", args.frames.display());
    }
    let keep: Vec<(usize, &PathBuf)> = resample_indices(files.len(), args.src_fps, cfg.output_fps)
        .into_iter()
        .map(|i| (frame_number(&files[i]).expect("numbered") as usize, &files[i]))
        .collect();
    if keep.len() < cfg.median_window {
        bail!(
            "{} frames after re-timing, fewer than the median window of {}",
            keep.len(),
            cfg.median_window
        );
    }
    if cfg.method != Method::Direct {
        let dir = args
            .overlays
            .as_deref()
            .with_context(|| format!("method {} needs --overlays", cfg.method.display_name()))?;
        if let Some((n, _)) = keep.iter().find(|(n, _)| !manifest_path(dir, *n).is_file()) {
            bail!(
                "frame {n}: missing overlay {}",
                manifest_path(dir, *n).display()
            );
        }
    }

    let staged = StagedDir::new(&args.output, args.force)?;
    let mut median = TemporalMedian::new(cfg.median_window)?;
    let batch = rayon::current_num_threads().max(1) * 4;
    let mut names = Vec::new();
    for chunk in keep.chunks(batch) {
        let rendered: Vec<LumaFrame> = chunk
            .par_iter()
            .map(|&(n, path)| {
                let frame = load_png(path)?;
                let overlay = overlay_for(args.overlays.as_deref(), n, cfg.method)?;
                render_still(&frame, overlay.as_ref(), cfg, &r.grid)
                    .with_context(|| format!("frame {n}"))
            })
            .collect::<Result<_>>()?;
        let mut ready = Vec::new();
        for f in rendered {
            if let Some(out) = median.push(f)? {
                ready.push(out);
            }
        }
        let first = names.len();
        ready
            .par_iter()
            .enumerate()
            .try_for_each(|(k, f)| save_png(f, &staged.path().join(frame_file_name(first + k))))?;
        names.extend((first..first + ready.len()).map(frame_file_name));
    }

    let manifest = VideoManifest {
        fps: cfg.output_fps,
        frame_count: names.len(),
        frames: names,
        method: cfg.method,
        levels: cfg.levels,
        median_window: cfg.median_window,
        grid: r.grid_config.clone(),
        fov: cfg.fov,
        source_fps: args.src_fps,
        source_frames: files.len(),
    };
    atomic::write_bytes(
        &staged.path().join(MANIFEST),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;
    let output = staged.commit()?;
    Ok(VideoOutcome {
        output,
        manifest,
        seed_drawn: r.seed_drawn,
    })
}
