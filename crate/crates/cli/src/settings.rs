//! Merges flags, an optional TOML file and defaults into validated configs.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use spv_core::video::{PipelineConfig, DEFAULT_TARGET_HFOV};
use spv_core::{FovSpec, GridConfig, Method, PhospheneGrid};

use crate::args::{parse_grid, RenderOptions};

/// Keys accepted in a `--config` file. All optional.
///
/// ```toml
/// grid = "32x32"
/// levels = 8
/// dropout = 0.1
/// seed = 7
/// method = "sie-om"
/// fov_src = 60.0
/// fov_dst = 20.0
/// fps = 20.0
/// canvas = 512
/// median_window = 5
/// ```
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub grid: Option<String>,
    pub levels: Option<u16>,
    pub dropout: Option<f64>,
    pub seed: Option<u64>,
    pub method: Option<Method>,
    pub fov_src: Option<f64>,
    pub fov_dst: Option<f64>,
    pub fps: Option<f64>,
    pub canvas: Option<usize>,
    pub sigma_ratio: Option<f64>,
    pub cutoff_ratio: Option<f64>,
    pub median_window: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Clone, Debug)]
pub struct Resolved {
    pub grid_config: GridConfig,
    pub grid: PhospheneGrid,
    pub pipeline: PipelineConfig,
    /// True when no seed was given anywhere and one was drawn.
    pub seed_drawn: bool,
}

/// Everything is checked here so that a bad parameter fails before any I/O.
pub fn resolve(
    opts: &RenderOptions,
    fps: Option<f64>,
    median_window: Option<usize>,
) -> Result<Resolved> {
    let file = match &opts.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let defaults = GridConfig::default();
    let pipe_defaults = PipelineConfig::default();

    let (rows, cols) = match (opts.grid, &file.grid) {
        (Some(g), _) => g,
        (None, Some(s)) => parse_grid(s).map_err(anyhow::Error::msg)?,
        (None, None) => (defaults.rows, defaults.cols),
    };
    let (seed, seed_drawn) = match opts.seed.or(file.seed) {
        Some(s) => (s, false),
        None => (rand::random::<u64>(), true),
    };
    let dropout = opts.dropout.or(file.dropout).unwrap_or(defaults.dropout_rate);
    let grid_config = GridConfig {
        rows,
        cols,
        canvas: opts.canvas.or(file.canvas).unwrap_or(defaults.canvas),
        sigma_ratio: file.sigma_ratio.unwrap_or(defaults.sigma_ratio),
        cutoff_ratio: file.cutoff_ratio.unwrap_or(defaults.cutoff_ratio),
        dropout_rate: dropout,
        seed,
    };
    let grid = grid_config.build().context("invalid grid parameters")?;

    let levels = opts.levels.or(file.levels).unwrap_or(pipe_defaults.levels);
    if levels < 2 {
        bail!("--levels must be at least 2, got {levels}");
    }
    let fov_dst = opts.fov_dst.or(file.fov_dst);
    let fov = match opts.fov_src.or(file.fov_src) {
        Some(src) => Some(FovSpec::new(src, fov_dst.unwrap_or(DEFAULT_TARGET_HFOV))?),
        None if fov_dst.is_some() => bail!("--fov-dst needs --fov-src"),
        None => None,
    };
    let output_fps = fps.or(file.fps).unwrap_or(pipe_defaults.output_fps);
    if !(output_fps > 0.0 && output_fps.is_finite()) {
        bail!("--fps must be positive, got {output_fps}");
    }
    let median_window = median_window
        .or(file.median_window)
        .unwrap_or(pipe_defaults.median_window);
    if median_window < 3 || median_window % 2 == 0 {
        bail!("--median-window must be odd and at least 3, got {median_window}");
    }
    let pipeline = PipelineConfig {
        method: opts.method.or(file.method).unwrap_or(pipe_defaults.method),
        levels,
        fov,
        output_fps,
        median_window,
    };
    Ok(Resolved {
        grid_config,
        grid,
        pipeline,
        seed_drawn,
    })
}
