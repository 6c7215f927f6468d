//! Command-line front end: `render`, `video`, `study` and `score`.
//!
//! Each subcommand is a plain function taking its parsed arguments, so the
//! binary stays a thin dispatcher and everything is testable in-process.

pub mod args;
pub mod atomic;
pub mod render;
pub mod score;
pub mod server;
pub mod settings;
pub mod video;

pub use render::cmd_render;
pub use score::cmd_score;
pub use server::cmd_study;
pub use video::cmd_video;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
