use crate::error::{Error, Result};
use crate::frame::LumaFrame;

use super::grid::PhospheneGrid;
use super::sampling::ElectrodeActivation;

/// Unnormalised Gaussian dot profile, 1.0 at the center.
#[inline]
pub fn dot_profile(dx: f64, dy: f64, sigma: f64) -> f64 {
    (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
}

/// Draws every alive phosphene as a Gaussian dot scaled by its cell's
/// reconstructed level. Overlapping dots combine by maximum; pixels farther
/// than the cutoff radius from every alive center stay at 0.
pub fn render(activation: &ElectrodeActivation, grid: &PhospheneGrid) -> Result<LumaFrame> {
    if activation.rows() != grid.rows() || activation.cols() != grid.cols() {
        return Err(Error::Geometry(format!(
            "activation is {}x{} but grid is {}x{}",
            activation.rows(),
            activation.cols(),
            grid.rows(),
            grid.cols()
        )));
    }
    let (w, h) = grid.canvas();
    let sigma = grid.dot_sigma();
    let cutoff = grid.dot_cutoff_radius();
    let cutoff_sq = cutoff * cutoff;
    let reach = cutoff.floor() as i64;

    let mut out = vec![0.0f32; w * h];
    for (i, (&(cx, cy), &alive)) in grid.centers().iter().zip(grid.alive()).enumerate() {
        let amp = activation.amplitude(i) as f64;
        if !alive || amp == 0.0 {
            continue;
        }
        let (cx, cy) = (cx as f64, cy as f64);
        let (px, py) = (cx.round() as i64, cy.round() as i64);
        let x_lo = (px - reach - 1).max(0);
        let x_hi = (px + reach + 1).min(w as i64 - 1);
        let y_lo = (py - reach - 1).max(0);
        let y_hi = (py + reach + 1).min(h as i64 - 1);
        for y in y_lo..=y_hi {
            let dy = y as f64 - cy;
            let row = &mut out[y as usize * w..(y as usize + 1) * w];
            for x in x_lo..=x_hi {
                let dx = x as f64 - cx;
                if dx * dx + dy * dy > cutoff_sq {
                    continue;
                }
                let v = (amp * dot_profile(dx, dy, sigma)) as f32;
                let px = &mut row[x as usize];
                if v > *px {
                    *px = v;
                }
            }
        }
    }
    Ok(LumaFrame::from_raw(w, h, out))
}
