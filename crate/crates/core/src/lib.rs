//! Multi-exposure image fusion with exposure compensation.
//!
//! Each exposure's luminance is locally contrast-enhanced (bilateral
//! dodging and burning), rescaled so the middle exposure sits at middle
//! gray with the others spaced 1 EV apart, tone mapped back into `[0, 1]`
//! and recolored. The enhanced stack is then fused by an ordinary
//! exposure-fusion backend.
//!
//! ```no_run
//! use mefuse::{hdrio, pipeline, PipelineConfig};
//!
//! let hdr = hdrio::load_rgbe("scene.hdr")?;
//! let stack = hdrio::synth_exposures(&hdr, &[-1.0, 0.0, 1.0], 0.18)?;
//! let fused = pipeline::run(&stack, &PipelineConfig::default())?;
//! hdrio::save_ldr("fused.png", &fused)?;
//! # Ok::<(), mefuse::Error>(())
//! ```

pub mod compensate;
pub mod config;
pub mod enhance;
mod error;
pub mod fuse;
pub mod hdrio;
pub mod image;
pub mod metrics;
pub mod pipeline;
pub mod tonemap;

pub use config::{BackendKind, PipelineConfig, PyramidDepth};
pub use error::{Error, Result};
pub use image::{ExposureStack, LuminanceMap, RgbImage};
