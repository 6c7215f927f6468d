//! Frame-sequence processing: field-of-view cropping, per-frame phosphene
//! rendering, temporal median filtering and fixed-rate assembly.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::LumaFrame;
use crate::labels::Method;
use crate::phosphene::{self, PhospheneGrid};
use crate::saliency::{compose_om, compose_sie_om, SaliencyOverlay};

pub const DEFAULT_FPS: f64 = 20.0;
pub const DEFAULT_MEDIAN_WINDOW: usize = 5;
pub const DEFAULT_TARGET_HFOV: f64 = 20.0;

#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence {
    frames: Vec<LumaFrame>,
    fps: f64,
}

impl FrameSequence {
    pub fn new(frames: Vec<LumaFrame>, fps: f64) -> Result<Self> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(Error::InvalidValue(format!("fps must be positive, got {fps}")));
        }
        if let Some(first) = frames.first() {
            let dims = first.dimensions();
            if let Some((i, f)) = frames.iter().enumerate().find(|(_, f)| f.dimensions() != dims) {
                return Err(Error::Dimension(format!(
                    "frame {i} is {}x{} but frame 0 is {}x{}",
                    f.width(),
                    f.height(),
                    dims.0,
                    dims.1
                )));
            }
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[LumaFrame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<LumaFrame> {
        self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Horizontal fields of view of the camera and of the simulated implant, in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FovSpec {
    pub source_hfov: f64,
    pub target_hfov: f64,
}

impl FovSpec {
    pub fn new(source_hfov: f64, target_hfov: f64) -> Result<Self> {
        if !(target_hfov > 0.0 && target_hfov <= source_hfov && source_hfov <= 180.0) {
            return Err(Error::Fov(format!(
                "need 0 < target ({target_hfov}) <= source ({source_hfov}) <= 180 degrees"
            )));
        }
        Ok(Self {
            source_hfov,
            target_hfov,
        })
    }

    /// Fraction of the source image width covered by the target field of view
    /// under a pinhole camera.
    pub fn crop_ratio(&self) -> f64 {
        let half = |deg: f64| (deg.to_radians() / 2.0).tan();
        half(self.target_hfov) / half(self.source_hfov)
    }
}

/// Central crop covering `fov.target_hfov`, with the same ratio applied to the height.
pub fn crop_fov(frame: &LumaFrame, fov: &FovSpec) -> Result<LumaFrame> {
    let fov = FovSpec::new(fov.source_hfov, fov.target_hfov)?;
    let ratio = fov.crop_ratio();
    let (w, h) = frame.dimensions();
    let cw = ((w as f64 * ratio).round() as usize).clamp(1, w);
    let ch = ((h as f64 * ratio).round() as usize).clamp(1, h);
    frame.crop((w - cw) / 2, (h - ch) / 2, cw, ch)
}

fn check_window(window: usize) -> Result<()> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidValue(format!(
            "median window must be odd and at least 3, got {window}"
        )));
    }
    Ok(())
}

/// Per-pixel median of an odd number of equally sized frames.
fn median_of(frames: &[&LumaFrame]) -> LumaFrame {
    let (w, h) = frames[0].dimensions();
    let n = frames.len();
    let mid = n / 2;
    let mut out = vec![0.0f32; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let mut buf = vec![0.0f32; n];
        let rows: Vec<&[f32]> = frames.iter().map(|f| f.row(y)).collect();
        for (x, o) in row.iter_mut().enumerate() {
            for (b, r) in buf.iter_mut().zip(&rows) {
                *b = r[x];
            }
            *o = *buf.select_nth_unstable_by(mid, f32::total_cmp).1;
        }
    });
    LumaFrame::from_raw(w, h, out)
}

/// Sliding temporal median. Output frame `t` (counting from the first full
/// window) is the per-pixel median of input frames `t - window + 1 ..= t`, so
/// the output is `window - 1` frames shorter than the input.
pub fn temporal_median(seq: &FrameSequence, window: usize) -> Result<FrameSequence> {
    check_window(window)?;
    if seq.len() < window {
        return Err(Error::Length(format!(
            "sequence of {} frames is shorter than the median window {window}",
            seq.len()
        )));
    }
    let frames: Vec<LumaFrame> = seq
        .frames
        .par_windows(window)
        .map(|win| median_of(&win.iter().collect::<Vec<_>>()))
        .collect();
    FrameSequence::new(frames, seq.fps)
}

/// Streaming form of [`temporal_median`]: push frames in order and receive a
/// filtered frame once the window is full.
#[derive(Debug)]
pub struct TemporalMedian {
    window: usize,
    buf: VecDeque<LumaFrame>,
}

impl TemporalMedian {
    pub fn new(window: usize) -> Result<Self> {
        check_window(window)?;
        Ok(Self {
            window,
            buf: VecDeque::with_capacity(window),
        })
    }

    pub fn push(&mut self, frame: LumaFrame) -> Result<Option<LumaFrame>> {
        if let Some(first) = self.buf.front() {
            if first.dimensions() != frame.dimensions() {
                return Err(Error::Dimension("frame size changed mid-stream".into()));
            }
        }
        if self.buf.len() == self.window {
            self.buf.pop_front();
        }
        self.buf.push_back(frame);
        if self.buf.len() < self.window {
            return Ok(None);
        }
        Ok(Some(median_of(&self.buf.iter().collect::<Vec<_>>())))
    }
}

/// Input frame indices kept when re-timing `len` frames from `in_fps` to `out_fps`.
pub fn resample_indices(len: usize, in_fps: f64, out_fps: f64) -> Vec<usize> {
    if (in_fps - out_fps).abs() < 1e-9 {
        return (0..len).collect();
    }
    let out_len = ((len as f64) * out_fps / in_fps + 1e-9).floor() as usize;
    (0..out_len)
        .map(|i| ((i as f64 * in_fps / out_fps + 1e-9).floor() as usize).min(len - 1))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub method: Method,
    pub levels: u16,
    pub fov: Option<FovSpec>,
    pub output_fps: f64,
    pub median_window: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            method: Method::SieOm,
            levels: 8,
            fov: None,
            output_fps: DEFAULT_FPS,
            median_window: DEFAULT_MEDIAN_WINDOW,
        }
    }
}

impl PipelineConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

/// Builds the frame that gets downsampled: raw luminance or a composition.
pub fn source_frame(frame: &LumaFrame, overlay: Option<&SaliencyOverlay>, method: Method) -> Result<LumaFrame> {
    match method {
        Method::Direct => Ok(frame.clone()),
        Method::Om | Method::SieOm => {
            let overlay = overlay.ok_or_else(|| {
                Error::Pipeline(format!("method {} needs an overlay", method.display_name()))
            })?;
            if overlay.dimensions() != frame.dimensions() {
                return Err(Error::Pipeline(format!(
                    "overlay for frame {} is {}x{} but the frame is {}x{}",
                    overlay.frame_index(),
                    overlay.dimensions().0,
                    overlay.dimensions().1,
                    frame.width(),
                    frame.height()
                )));
            }
            if method == Method::Om {
                Ok(compose_om(overlay))
            } else {
                compose_sie_om(overlay)
            }
        }
    }
}

/// Renders one still: compose, optionally crop, then simulate on `grid`.
pub fn render_still(
    frame: &LumaFrame,
    overlay: Option<&SaliencyOverlay>,
    config: &PipelineConfig,
    grid: &PhospheneGrid,
) -> Result<LumaFrame> {
    let mut src = source_frame(frame, overlay, config.method)?;
    if let Some(fov) = &config.fov {
        src = crop_fov(&src, fov)?;
    }
    phosphene::simulate(&src, grid, config.levels)
}

/// Full video path. Every frame is composed per `config.method`, rendered on
/// the same `grid` (whose dropout mask therefore holds for the whole clip),
/// re-timed to `config.output_fps` and median-filtered.
///
/// `overlays[i]` belongs to `seq.frames()[i]`; for [`Method::Direct`] the
/// slice may be empty.
pub fn process_sequence(
    seq: &FrameSequence,
    overlays: &[SaliencyOverlay],
    config: &PipelineConfig,
    grid: &PhospheneGrid,
) -> Result<FrameSequence> {
    if config.method != Method::Direct && overlays.len() != seq.len() {
        return Err(Error::Pipeline(format!(
            "{} frames but {} overlays",
            seq.len(),
            overlays.len()
        )));
    }
    check_window(config.median_window)?;
    let keep = resample_indices(seq.len(), seq.fps(), config.output_fps);
    let rendered: Vec<LumaFrame> = keep
        .par_iter()
        .map(|&i| {
            let overlay = overlays.get(i);
            render_still(&seq.frames()[i], overlay, config, grid)
                .map_err(|e| Error::Pipeline(format!("frame {i}: {e}")))
        })
        .collect::<Result<_>>()?;
    let rendered = FrameSequence::new(rendered, config.output_fps)?;
    temporal_median(&rendered, config.median_window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_of(values: &[f32]) -> FrameSequence {
        let frames = values.iter().map(|&v| LumaFrame::filled(3, 2, v)).collect();
        FrameSequence::new(frames, 20.0).unwrap()
    }

    #[test]
    fn identity_crop() {
        let f = LumaFrame::from_fn(40, 30, |x, y| ((x + y) % 7) as f32 / 7.0);
        let fov = FovSpec::new(20.0, 20.0).unwrap();
        assert_eq!(crop_fov(&f, &fov).unwrap(), f);
    }

    #[test]
    fn pinhole_crop_width() {
        let f = LumaFrame::zeros(1920, 1080);
        let fov = FovSpec::new(60.0, 20.0).unwrap();
        let c = crop_fov(&f, &fov).unwrap();
        assert_eq!(c.width(), 586);
        assert_eq!(c.height(), (1080.0 * fov.crop_ratio()).round() as usize);
    }

    #[test]
    fn target_wider_than_source() {
        assert!(matches!(FovSpec::new(20.0, 30.0), Err(Error::Fov(_))));
    }

    #[test]
    fn median_constant_and_length() {
        let out = temporal_median(&seq_of(&[0.25; 9]), 5).unwrap();
        assert_eq!(out.len(), 5);
        assert!(out.frames().iter().all(|f| f.data().iter().all(|&v| v == 0.25)));
    }

    #[test]
    fn median_picks_middle_value() {
        let vals: Vec<f32> = [10.0, 50.0, 20.0, 40.0, 30.0].iter().map(|v| v / 255.0).collect();
        let out = temporal_median(&seq_of(&vals), 5).unwrap();
        assert_eq!(out.frames()[0].get(0, 0), 30.0 / 255.0);
    }

    #[test]
    fn median_errors() {
        assert!(matches!(temporal_median(&seq_of(&[0.0; 4]), 5), Err(Error::Length(_))));
        assert!(temporal_median(&seq_of(&[0.0; 8]), 4).is_err());
        assert!(temporal_median(&seq_of(&[0.0; 8]), 1).is_err());
    }

    #[test]
    fn streaming_matches_batch() {
        let vals = [0.1, 0.9, 0.3, 0.7, 0.5, 0.2, 0.8, 0.4];
        let seq = FrameSequence::new(
            vals.iter()
                .enumerate()
                .map(|(i, &v)| LumaFrame::from_fn(4, 3, |x, y| (v + 0.13 * (x + y + i) as f32) % 1.0))
                .collect(),
            20.0,
        )
        .unwrap();
        let batch = temporal_median(&seq, 5).unwrap();
        let mut stream = TemporalMedian::new(5).unwrap();
        let streamed: Vec<_> = seq
            .frames()
            .iter()
            .filter_map(|f| stream.push(f.clone()).unwrap())
            .collect();
        assert_eq!(streamed, batch.into_frames());
    }

    #[test]
    fn resampling() {
        assert_eq!(resample_indices(5, 20.0, 20.0), vec![0, 1, 2, 3, 4]);
        assert_eq!(resample_indices(6, 30.0, 20.0), vec![0, 1, 3, 4]);
        assert_eq!(resample_indices(3, 10.0, 20.0), vec![0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn overlay_count_mismatch() {
        let grid = PhospheneGrid::build(4, 4, 64, 64).unwrap();
        let seq = seq_of(&[0.0; 6]);
        let cfg = PipelineConfig::with_method(Method::Om);
        assert!(matches!(process_sequence(&seq, &[], &cfg, &grid), Err(Error::Pipeline(_))));
    }
}
