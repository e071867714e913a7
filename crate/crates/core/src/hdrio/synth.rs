//! Synthetic exposure stacks from radiance maps under a linear camera:
//! a shot at `v` EV records `clip(2^v * s * E)`, optionally quantized to
//! 8 bits.

use super::ldr::{dequantize, quantize};
use super::RadianceMap;
use crate::config::{check_key, positive, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::image::{luminance, ExposureStack, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    /// Round every sample to 8 bits after clipping.
    pub quantize: bool,
    /// Luminance floor used when anchoring the 0 EV exposure.
    pub epsilon: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            quantize: true,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// EV of a shot with shutter time `dt` relative to the proper time `dt_proper`.
pub fn ev_from_shutter(dt: f64, dt_proper: f64) -> f64 {
    dt.log2() - dt_proper.log2()
}

/// Gain `s` such that the epsilon-floored log-average luminance of the
/// unclipped 0 EV exposure `s * E` equals `anchor_key`.
pub fn exposure_scale(hdr: &RadianceMap, anchor_key: f64, epsilon: f64) -> Result<f64> {
    check_key(anchor_key)?;
    positive("epsilon", epsilon)?;
    if epsilon >= anchor_key {
        return Err(Error::param("epsilon", "must be below the anchor key"));
    }
    let logs: Vec<f64> = hdr.pixels().iter().map(|&px| luminance(px).ln()).collect();
    let positive_count = logs.iter().filter(|l| l.is_finite()).count();
    if positive_count == 0 {
        return Err(Error::ZeroRadiance);
    }
    let n = logs.len() as f64;
    let floor = epsilon.ln();
    let target = anchor_key.ln();
    // Mean floored log-luminance after a log-gain of t; non-decreasing in t.
    let mean_log = |t: f64| logs.iter().map(|&l| (t + l).max(floor)).sum::<f64>() / n;

    let (lo_l, hi_l) = logs
        .iter()
        .filter(|l| l.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| {
            (a.min(l), b.max(l))
        });

    // Beyond `hi` every positive pixel sits above the floor and the curve
    // is linear with slope positive_count / n.
    let hi = target - lo_l;
    let at_hi = mean_log(hi);
    if at_hi <= target {
        return Ok((hi + (target - at_hi) * n / positive_count as f64).exp());
    }
    let mut lo = floor - hi_l;
    let mut hi = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_log(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// One exposure at `ev` with gain `scale`, clipped to `[0, 1]`.
pub fn expose(hdr: &RadianceMap, ev: f64, scale: f64, quantized: bool) -> RgbImage {
    let gain = 2f64.powf(ev) * scale;
    let pixels = hdr
        .pixels()
        .iter()
        .map(|px| {
            px.map(|c| {
                let v = (gain * c).clamp(0.0, 1.0);
                if quantized {
                    dequantize(quantize(v))
                } else {
                    v
                }
            })
        })
        .collect();
    RgbImage::from_raw(hdr.width(), hdr.height(), pixels)
}

pub fn synth_exposures_with(
    hdr: &RadianceMap,
    ev_offsets: &[f64],
    anchor_key: f64,
    opts: SynthOptions,
) -> Result<ExposureStack> {
    if ev_offsets.is_empty() {
        return Err(Error::EmptyStack);
    }
    let scale = exposure_scale(hdr, anchor_key, opts.epsilon)?;
    let images = ev_offsets
        .iter()
        .map(|&ev| expose(hdr, ev, scale, opts.quantize))
        .collect();
    ExposureStack::with_evs(images, ev_offsets.to_vec())
}

/// 8-bit exposures at `ev_offsets` (strictly increasing).
pub fn synth_exposures(
    hdr: &RadianceMap,
    ev_offsets: &[f64],
    anchor_key: f64,
) -> Result<ExposureStack> {
    synth_exposures_with(hdr, ev_offsets, anchor_key, SynthOptions::default())
}
