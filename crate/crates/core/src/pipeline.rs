//! End-to-end entry points.

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::fuse::fuse;
use crate::image::{ExposureStack, RgbImage};
use crate::tonemap::build_enhanced_stack;

/// Enhances the stack, then fuses it with the configured backend.
pub fn run(stack: &ExposureStack, cfg: &PipelineConfig) -> Result<RgbImage> {
    fuse(&build_enhanced_stack(stack, cfg)?, cfg)
}

/// Fuses the raw stack without enhancement.
pub fn run_baseline(stack: &ExposureStack, cfg: &PipelineConfig) -> Result<RgbImage> {
    cfg.validate()?;
    fuse(stack, cfg)
}
