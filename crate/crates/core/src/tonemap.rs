//! Reinhard global tone mapping with a per-image white point, and the
//! composition of the full enhancement chain.

use crate::compensate::{compensate, estimate_alphas};
use crate::config::{positive, PipelineConfig};
use crate::enhance::enhance_stack;
use crate::error::{Error, Result};
use crate::image::{luminance_of, restore_color, ExposureStack, LuminanceMap};

/// `L (1 + L / white^2) / (1 + L)`; maps `white` to 1.
#[inline]
pub fn reinhard(l: f64, white: f64) -> f64 {
    l * (1.0 + l / (white * white)) / (1.0 + l)
}

pub fn reinhard_global(l: &LuminanceMap, white: f64) -> Result<LuminanceMap> {
    positive("l_white", white)?;
    let out = l.samples().iter().map(|&v| reinhard(v, white)).collect();
    Ok(LuminanceMap::from_raw(l.width(), l.height(), out))
}

/// Tone maps each map with its own maximum as white point. Results lie in
/// `[0, 1]` with the maximum at exactly 1; all-black maps pass through.
pub fn tonemap_stack(maps: &[LuminanceMap]) -> Result<Vec<LuminanceMap>> {
    if maps.is_empty() {
        return Err(Error::EmptyStack);
    }
    maps.iter()
        .map(|m| {
            let white = m.max();
            if white <= 0.0 {
                return Ok(m.clone());
            }
            let out = m
                .samples()
                .iter()
                .map(|&v| {
                    if v == white {
                        1.0
                    } else {
                        reinhard(v, white).min(1.0)
                    }
                })
                .collect();
            Ok(LuminanceMap::from_raw(m.width(), m.height(), out))
        })
        .collect()
}

/// Intermediate products of the enhancement chain for one stack.
#[derive(Debug, Clone)]
pub struct EnhancedStack {
    pub enhanced: Vec<LuminanceMap>,
    pub alphas: crate::compensate::AlphaVector,
    pub compensated: Vec<LuminanceMap>,
    pub tonemapped: Vec<LuminanceMap>,
    pub stack: ExposureStack,
}

/// Runs contrast enhancement, exposure compensation, tone mapping and
/// color restoration, keeping every intermediate.
pub fn enhance_pipeline(stack: &ExposureStack, cfg: &PipelineConfig) -> Result<EnhancedStack> {
    cfg.validate()?;
    let enhanced = enhance_stack(stack, cfg)?;
    let alphas = estimate_alphas(&enhanced, cfg.key, cfg.epsilon)?;
    let compensated = enhanced
        .iter()
        .zip(alphas.alphas())
        .map(|(l, &a)| compensate(l, a))
        .collect::<Result<Vec<_>>>()?;
    let tonemapped = tonemap_stack(&compensated)?;
    let images = stack
        .images()
        .iter()
        .zip(&tonemapped)
        .map(|(img, l_new)| restore_color(img, &luminance_of(img), l_new))
        .collect::<Result<Vec<_>>>()?;
    let out = match stack.evs() {
        Some(evs) => ExposureStack::with_evs(images, evs.to_vec())?,
        None => ExposureStack::new(images)?,
    };
    Ok(EnhancedStack {
        enhanced,
        alphas,
        compensated,
        tonemapped,
        stack: out,
    })
}

pub fn build_enhanced_stack(stack: &ExposureStack, cfg: &PipelineConfig) -> Result<ExposureStack> {
    enhance_pipeline(stack, cfg).map(|e| e.stack)
}
