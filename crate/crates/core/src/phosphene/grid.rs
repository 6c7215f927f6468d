//! Hexagonal phosphene lattice and electrode dropout.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ratio `pitch_x / dot_sigma`.
pub const DEFAULT_SIGMA_RATIO: f64 = 4.0;
/// Default ratio `pitch_x / dot_cutoff_radius`.
pub const DEFAULT_CUTOFF_RATIO: f64 = 2.0;
/// Smallest horizontal pitch, in output pixels, that still resolves a dot.
pub const MIN_PITCH: f64 = 4.0;

/// Geometry of a hexagonally packed phosphene array on an output canvas.
///
/// Centers are snapped to integer pixel coordinates, so a pixel `(x, y)` of a
/// rendered frame is evaluated at exactly `(x, y)` and each dot peaks on a pixel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhospheneGrid {
    rows: usize,
    cols: usize,
    canvas_width: usize,
    canvas_height: usize,
    pitch_x: f64,
    pitch_y: f64,
    dot_sigma: f64,
    dot_cutoff_radius: f64,
    centers: Vec<(f32, f32)>,
    alive: Vec<bool>,
}

impl PhospheneGrid {
    /// Builds a grid with the default dot proportions.
    pub fn build(rows: usize, cols: usize, canvas_width: usize, canvas_height: usize) -> Result<Self> {
        Self::build_with_ratios(
            rows,
            cols,
            canvas_width,
            canvas_height,
            DEFAULT_SIGMA_RATIO,
            DEFAULT_CUTOFF_RATIO,
        )
    }

    /// Builds a grid where `dot_sigma = pitch_x / sigma_ratio` and
    /// `dot_cutoff_radius = pitch_x / cutoff_ratio`.
    pub fn build_with_ratios(
        rows: usize,
        cols: usize,
        canvas_width: usize,
        canvas_height: usize,
        sigma_ratio: f64,
        cutoff_ratio: f64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Geometry("grid must have at least one row and column".into()));
        }
        if !(sigma_ratio > 0.0 && cutoff_ratio > 0.0) {
            return Err(Error::Geometry(format!(
                "dot ratios must be positive (sigma {sigma_ratio}, cutoff {cutoff_ratio})"
            )));
        }
        let pitch_x = canvas_width as f64 / cols as f64;
        if pitch_x < MIN_PITCH {
            return Err(Error::Geometry(format!(
                "canvas width {canvas_width} gives pitch {pitch_x:.2} < {MIN_PITCH} for {cols} columns"
            )));
        }
        let dot_sigma = pitch_x / sigma_ratio;
        let dot_cutoff_radius = pitch_x / cutoff_ratio;
        if dot_cutoff_radius < 2.0 * dot_sigma {
            return Err(Error::Geometry(format!(
                "cutoff radius {dot_cutoff_radius:.3} must be at least twice sigma {dot_sigma:.3}"
            )));
        }

        let pitch_y = pitch_x * 3f64.sqrt() / 2.0;
        let shift = if rows > 1 { pitch_x / 2.0 } else { 0.0 };
        let extent_x = (cols - 1) as f64 * pitch_x + shift;
        let extent_y = (rows - 1) as f64 * pitch_y;
        let max_x = (canvas_width - 1) as f64;
        let max_y = (canvas_height.max(1) - 1) as f64;
        if canvas_height == 0 || extent_y > max_y {
            return Err(Error::Geometry(format!(
                "{rows} rows at vertical pitch {pitch_y:.2} do not fit a canvas of height {canvas_height}"
            )));
        }
        let x0 = (max_x - extent_x) / 2.0;
        let y0 = (max_y - extent_y) / 2.0;

        let snap = |v: f64| (v + 0.5).floor() as f32;
        let mut centers = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let y = snap(y0 + r as f64 * pitch_y);
            let offset = if r % 2 == 1 { shift } else { 0.0 };
            for c in 0..cols {
                centers.push((snap(x0 + offset + c as f64 * pitch_x), y));
            }
        }

        Ok(Self {
            rows,
            cols,
            canvas_width,
            canvas_height,
            pitch_x,
            pitch_y,
            dot_sigma,
            dot_cutoff_radius,
            alive: vec![true; centers.len()],
            centers,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn canvas(&self) -> (usize, usize) {
        (self.canvas_width, self.canvas_height)
    }

    pub fn pitch_x(&self) -> f64 {
        self.pitch_x
    }

    /// Nominal row spacing before centers are snapped to pixels.
    pub fn pitch_y(&self) -> f64 {
        self.pitch_y
    }

    pub fn dot_sigma(&self) -> f64 {
        self.dot_sigma
    }

    pub fn dot_cutoff_radius(&self) -> f64 {
        self.dot_cutoff_radius
    }

    pub fn centers(&self) -> &[(f32, f32)] {
        &self.centers
    }

    pub fn center(&self, row: usize, col: usize) -> (f32, f32) {
        self.centers[row * self.cols + col]
    }

    pub fn alive(&self) -> &[bool] {
        &self.alive
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    /// Alive mask packed one byte per phosphene, for hashing and comparison.
    pub fn alive_mask_bytes(&self) -> Vec<u8> {
        self.alive.iter().map(|&a| a as u8).collect()
    }

    /// Switches off `round(rate * N)` currently-alive phosphenes, drawn uniformly
    /// without replacement from a ChaCha8 stream seeded with `seed`.
    pub fn apply_dropout(&self, rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidValue(format!("dropout rate {rate} outside [0, 1]")));
        }
        let target = (rate * self.len() as f64 + 0.5).floor() as usize;
        let alive_idx: Vec<usize> = (0..self.len()).filter(|&i| self.alive[i]).collect();
        let amount = target.min(alive_idx.len());

        let mut grid = self.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for pick in index::sample(&mut rng, alive_idx.len(), amount) {
            grid.alive[alive_idx[pick]] = false;
        }
        Ok(grid)
    }

    /// Replaces the alive mask wholesale.
    pub fn with_alive(&self, alive: Vec<bool>) -> Result<Self> {
        if alive.len() != self.len() {
            return Err(Error::Dimension(format!(
                "alive mask has {} entries for {} phosphenes",
                alive.len(),
                self.len()
            )));
        }
        Ok(Self {
            alive,
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_array_geometry() {
        let g = PhospheneGrid::build(32, 32, 512, 512).unwrap();
        assert_eq!(g.len(), 1024);
        assert_eq!(g.pitch_x(), 16.0);
        for r in 0..32 {
            for c in 0..31 {
                assert_eq!(g.center(r, c + 1).0 - g.center(r, c).0, 16.0);
            }
        }
        for r in (1..32).step_by(2) {
            assert_eq!(g.center(r, 0).0 - g.center(r - 1, 0).0, 8.0);
        }
        assert!(g.alive().iter().all(|&a| a));
    }

    #[test]
    fn single_phosphene_sits_at_midpoint() {
        let g = PhospheneGrid::build(1, 1, 512, 512).unwrap();
        assert_eq!(g.centers(), &[(256.0, 256.0)]);
        let g = PhospheneGrid::build(1, 1, 9, 9).unwrap();
        assert_eq!(g.centers(), &[(4.0, 4.0)]);
    }

    #[test]
    fn canvas_too_small() {
        assert!(matches!(
            PhospheneGrid::build(32, 32, 100, 512),
            Err(Error::Geometry(_))
        ));
        assert!(matches!(
            PhospheneGrid::build(32, 32, 512, 200),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn cutoff_must_cover_two_sigma() {
        assert!(PhospheneGrid::build_with_ratios(4, 4, 64, 64, 3.2, 2.0).is_err());
        assert!(PhospheneGrid::build_with_ratios(4, 4, 64, 64, 3.2, 1.6).is_ok());
    }

    #[test]
    fn dropout_counts() {
        let g = PhospheneGrid::build(32, 32, 512, 512).unwrap();
        assert_eq!(g.apply_dropout(0.0, 3).unwrap(), g);
        assert_eq!(g.apply_dropout(0.10, 3).unwrap().alive_count(), 1024 - 102);
        assert_eq!(g.apply_dropout(1.0, 3).unwrap().alive_count(), 0);
        assert!(g.apply_dropout(1.5, 3).is_err());
    }

    #[test]
    fn dropout_is_seeded() {
        let g = PhospheneGrid::build(32, 32, 512, 512).unwrap();
        let a = g.apply_dropout(0.1, 7).unwrap();
        let b = g.apply_dropout(0.1, 7).unwrap();
        let c = g.apply_dropout(0.1, 8).unwrap();
        assert_eq!(a.alive_mask_bytes(), b.alive_mask_bytes());
        assert_ne!(a.alive_mask_bytes(), c.alive_mask_bytes());
    }
}
