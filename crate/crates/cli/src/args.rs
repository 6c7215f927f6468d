use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spv_core::scoring::GroupBy;
use spv_core::Method;

#[derive(Debug, Parser)]
#[command(name = "spv", version, about = "Simulated prosthetic vision: render, process video, run and score studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one image as a phosphene frame.
    Render(RenderArgs),
    /// Render a numbered frame sequence and median-filter it.
    Video(VideoArgs),
    /// Serve study sessions over HTTP.
    Study(StudyArgs),
    /// Score session logs.
    Score(ScoreArgs),
}

/// Rendering parameters shared by `render` and `video`. Unset flags fall back
/// to `--config`, then to built-in defaults.
#[derive(Clone, Debug, Default, Args)]
pub struct RenderOptions {
    /// TOML file with default values for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Phosphene lattice as ROWSxCOLS.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    #[arg(long)]
    pub levels: Option<u16>,
    /// Fraction of phosphenes switched off.
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Dropout seed; drawn at random and reported when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// direct, om or sie-om.
    #[arg(long)]
    pub method: Option<Method>,
    /// Horizontal field of view of the input in degrees; enables cropping.
    #[arg(long)]
    pub fov_src: Option<f64>,
    /// Horizontal field of view to crop to.
    #[arg(long)]
    pub fov_dst: Option<f64>,
    /// Output side length in pixels.
    #[arg(long)]
    pub canvas: Option<usize>,
}

#[derive(Clone, Debug, Args)]
pub struct RenderArgs {
    /// Input PNG.
    pub image: PathBuf,
    /// Directory with `overlay_NNNNNN.json` manifests and their rasters.
    #[arg(long)]
    pub overlays: Option<PathBuf>,
    /// Which overlay manifest belongs to the image.
    #[arg(long, default_value_t = 0)]
    pub overlay_index: usize,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write `<output>.debug.png`: original | composed | rendered.
    #[arg(long)]
    pub debug: bool,
    #[command(flatten)]
    pub options: RenderOptions,
}

#[derive(Clone, Debug, Args)]
pub struct VideoArgs {
    /// Directory of numbered PNG frames.
    pub frames: PathBuf,
    /// Overlay directory, indexed by the frame numbers in the file names.
    #[arg(long)]
    pub overlays: Option<PathBuf>,
    /// Output directory; must not exist unless `--force` is given.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Frame rate of the input sequence.
    #[arg(long, default_value_t = 20.0)]
    pub src_fps: f64,
    /// Output frame rate.
    #[arg(long)]
    pub fps: Option<f64>,
    #[arg(long)]
    pub median_window: Option<usize>,
    /// Replace an existing output directory.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub options: RenderOptions,
}

#[derive(Clone, Debug, Args)]
pub struct StudyArgs {
    /// Stimulus catalog (JSON).
    #[arg(long)]
    pub catalog: PathBuf,
    /// Base seed; each new session without its own seed gets the next one.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Where the JSON-lines session logs go.
    #[arg(long, default_value = "sessions")]
    pub log_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum GroupByArg {
    #[default]
    MethodKindView,
    MethodKind,
    Method,
    All,
}

impl From<GroupByArg> for GroupBy {
    fn from(g: GroupByArg) -> Self {
        match g {
            GroupByArg::MethodKindView => GroupBy::MethodKindView,
            GroupByArg::MethodKind => GroupBy::MethodKind,
            GroupByArg::Method => GroupBy::Method,
            GroupByArg::All => GroupBy::All,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct ScoreArgs {
    /// Session logs, or directories of `*.jsonl` logs.
    #[arg(required = true)]
    pub sessions: Vec<PathBuf>,
    #[arg(long)]
    pub catalog: PathBuf,
    #[arg(long, value_enum, default_value_t = GroupByArg::MethodKindView)]
    pub group_by: GroupByArg,
    /// Leave out responses given after the time limit.
    #[arg(long)]
    pub exclude_late: bool,
    /// Keep only sessions whose metadata has KEY=VALUE; repeatable.
    #[arg(long = "filter", value_parser = parse_key_value)]
    pub filters: Vec<(String, String)>,
    /// Directory for report.json, report.txt and confusion CSVs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad grid dimension `{v}`: {e}"))
    };
    Ok((parse(r)?, parse(c)?))
}

pub fn parse_key_value(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}
