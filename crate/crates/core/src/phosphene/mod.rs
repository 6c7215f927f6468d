//! The phosphene model.
//!
//! A frame is reduced to the electrode array by box-averaging ([`downsample`]),
//! quantised to a small number of luminance levels ([`quantize`]) and drawn as
//! Gaussian dots on a hexagonal lattice ([`PhospheneGrid`], [`render`]). A
//! fixed fraction of electrodes can be disabled with
//! [`PhospheneGrid::apply_dropout`]; the resulting mask is meant to be held for
//! a whole session or video, not redrawn per frame.

mod grid;
mod render;
mod sampling;

pub use grid::{PhospheneGrid, DEFAULT_CUTOFF_RATIO, DEFAULT_SIGMA_RATIO, MIN_PITCH};
pub use render::{dot_profile, render};
pub use sampling::{downsample, quantize, quantize_value, reconstruct, ElectrodeActivation};

use crate::error::Result;
use crate::frame::LumaFrame;

/// Downsamples, quantises and renders `frame` onto `grid`.
pub fn simulate(frame: &LumaFrame, grid: &PhospheneGrid, num_levels: u16) -> Result<LumaFrame> {
    let small = downsample(frame, grid.rows(), grid.cols())?;
    let activation = quantize(&small, num_levels)?;
    render(&activation, grid)
}
