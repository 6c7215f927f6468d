//! Reduction of a frame to electrode resolution: box-average downsampling
//! followed by uniform luminance quantisation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::LumaFrame;

/// Partition boundaries `[floor(i*n/parts), floor((i+1)*n/parts))` for `i` in `0..parts`.
fn box_bounds(n: usize, parts: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..parts).map(move |i| (i * n / parts, (i + 1) * n / parts))
}

/// Averages `frame` over a `rows x cols` partition of equal-as-possible boxes.
///
/// Box edges sit at `floor(i * W / cols)` horizontally and `floor(j * H / rows)`
/// vertically, so every input pixel belongs to exactly one output cell.
pub fn downsample(frame: &LumaFrame, rows: usize, cols: usize) -> Result<LumaFrame> {
    let (w, h) = frame.dimensions();
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension("target grid must be non-empty".into()));
    }
    if w < cols || h < rows {
        return Err(Error::Dimension(format!(
            "{w}x{h} frame is smaller than the {cols}x{rows} target grid"
        )));
    }

    let col_bounds: Vec<_> = box_bounds(w, cols).collect();
    let mut out = Vec::with_capacity(rows * cols);
    let mut acc = vec![0.0f64; cols];
    for (y0, y1) in box_bounds(h, rows) {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for y in y0..y1 {
            let row = frame.row(y);
            for (a, &(x0, x1)) in acc.iter_mut().zip(&col_bounds) {
                *a += row[x0..x1].iter().map(|&v| v as f64).sum::<f64>();
            }
        }
        for (a, &(x0, x1)) in acc.iter().zip(&col_bounds) {
            let n = ((x1 - x0) * (y1 - y0)) as f64;
            out.push(((a / n) as f32).clamp(0.0, 1.0));
        }
    }
    Ok(LumaFrame::from_raw(cols, rows, out))
}

/// Quantised electrode levels, one per grid cell, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectrodeActivation {
    rows: usize,
    cols: usize,
    num_levels: u16,
    levels: Vec<u16>,
}

impl ElectrodeActivation {
    pub fn new(rows: usize, cols: usize, num_levels: u16, levels: Vec<u16>) -> Result<Self> {
        check_level_count(num_levels)?;
        if levels.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} activation needs {} levels, got {}",
                rows * cols,
                levels.len()
            )));
        }
        if let Some(&bad) = levels.iter().find(|&&l| l >= num_levels) {
            return Err(Error::InvalidValue(format!(
                "level {bad} out of range for {num_levels} levels"
            )));
        }
        Ok(Self {
            rows,
            cols,
            num_levels,
            levels,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_levels(&self) -> u16 {
        self.num_levels
    }

    pub fn levels(&self) -> &[u16] {
        &self.levels
    }

    pub fn level(&self, row: usize, col: usize) -> u16 {
        self.levels[row * self.cols + col]
    }

    pub fn set_level(&mut self, row: usize, col: usize, level: u16) {
        assert!(level < self.num_levels, "level {level} out of range");
        self.levels[row * self.cols + col] = level;
    }

    /// Brightness of cell `index` after reconstruction, `level / (L - 1)`.
    #[inline]
    pub fn amplitude(&self, index: usize) -> f32 {
        reconstruct(self.levels[index], self.num_levels)
    }

    /// Reconstructed activation as a `cols x rows` frame.
    pub fn to_frame(&self) -> LumaFrame {
        let data = (0..self.levels.len()).map(|i| self.amplitude(i)).collect();
        LumaFrame::from_raw(self.cols, self.rows, data)
    }
}

fn check_level_count(num_levels: u16) -> Result<()> {
    if num_levels < 2 {
        return Err(Error::InvalidValue(format!(
            "need at least 2 luminance levels, got {num_levels}"
        )));
    }
    Ok(())
}

/// Maps a luminance in `[0, 1]` to its nearest level, ties rounding up.
#[inline]
pub fn quantize_value(v: f32, num_levels: u16) -> u16 {
    let top = (num_levels - 1) as f64;
    let level = (v as f64 * top + 0.5).floor();
    level.clamp(0.0, top) as u16
}

/// Reconstruction value of a level index.
#[inline]
pub fn reconstruct(level: u16, num_levels: u16) -> f32 {
    (level as f64 / (num_levels - 1) as f64) as f32
}

/// Quantises each cell of an already-downsampled frame to `num_levels` levels.
pub fn quantize(frame: &LumaFrame, num_levels: u16) -> Result<ElectrodeActivation> {
    check_level_count(num_levels)?;
    let levels = frame
        .data()
        .iter()
        .map(|&v| quantize_value(v, num_levels))
        .collect();
    Ok(ElectrodeActivation {
        rows: frame.height(),
        cols: frame.width(),
        num_levels,
        levels,
    })
}
