//! Simulated prosthetic vision.
//!
//! Turns indoor-scene images and videos, together with externally computed
//! object masks and structural-edge maps, into phosphene renderings, and
//! supports running and scoring a room/object recognition study on them.
//!
//! - [`phosphene`]: electrode-array reduction, hexagonal grid, Gaussian dots, dropout.
//! - [`saliency`]: object-mask (OM) and edge-plus-mask (SIE-OM) compositing.
//! - [`video`]: field-of-view crop, temporal median, sequence processing.
//! - [`study`]: stimulus catalog, seeded plans, session state and logs.
//! - [`scoring`]: object buckets, confusion matrices, confidence, intervals.
//!
//! ```
//! use spv_core::{phosphene, LumaFrame, PhospheneGrid};
//!
//! let grid = PhospheneGrid::build(32, 32, 512, 512)?.apply_dropout(0.10, 7)?;
//! let frame = LumaFrame::from_fn(640, 480, |x, _| x as f32 / 639.0);
//! let rendered = phosphene::simulate(&frame, &grid, 8)?;
//! assert_eq!(rendered.dimensions(), (512, 512));
//! # Ok::<(), spv_core::Error>(())
//! ```

pub mod config;
mod error;
mod frame;
pub mod io;
pub mod labels;
pub mod phosphene;
pub mod saliency;
pub mod scoring;
pub mod study;
pub mod video;

pub use config::GridConfig;
pub use error::{Error, Result};
pub use frame::LumaFrame;
pub use labels::{Likert, Method, ObjectClass, Room};
pub use phosphene::{ElectrodeActivation, PhospheneGrid};
pub use saliency::{EdgeMap, ObjectInstance, SaliencyOverlay};
pub use video::{FovSpec, FrameSequence};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/phosphene.md")]
    mod phosphene {}
    #[doc = include_str!("../../../book/src/saliency.md")]
    mod saliency {}
    #[doc = include_str!("../../../book/src/video.md")]
    mod video {}
    #[doc = include_str!("../../../book/src/study.md")]
    mod study {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
}
