//! Multi-exposure fusion.
//!
//! The pipeline only talks to [`FusionBackend`]; the bundled backend is a
//! Mertens-style exposure fusion: per-pixel quality weights (contrast,
//! saturation, well-exposedness) blended across Laplacian pyramids.

pub mod pyramid;

use crate::config::{BackendKind, PipelineConfig, PyramidDepth};
use crate::error::{Error, Result};
use crate::image::{luminance, same_dims, ExposureStack, RgbImage};

use self::pyramid::{check_depth, collapse, gaussian_pyramid, laplacian_pyramid, max_depth, Plane};

/// Well-exposedness Gaussian: center and width on the `[0, 1]` scale.
pub const WELL_EXPOSED_MEAN: f64 = 0.5;
pub const WELL_EXPOSED_SIGMA: f64 = 0.2;
/// Added to every raw weight before normalization.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Normalized per-image blending weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMaps {
    width: usize,
    height: usize,
    maps: Vec<Vec<f64>>,
}

impl WeightMaps {
    /// Equal weight `1 / n` for every image.
    pub fn uniform(n: usize, width: usize, height: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyStack);
        }
        Ok(Self {
            width,
            height,
            maps: vec![vec![1.0 / n as f64; width * height]; n],
        })
    }

    /// Normalizes non-negative raw maps so they sum to one at each pixel.
    /// Pixels where every raw weight is zero get equal weights.
    pub fn normalized(width: usize, height: usize, mut maps: Vec<Vec<f64>>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::EmptyStack);
        }
        if maps.iter().any(|m| m.len() != width * height) {
            return Err(Error::InvalidImage("weight map size mismatch".into()));
        }
        if maps.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidImage(
                "weights must be finite and >= 0".into(),
            ));
        }
        let n = maps.len();
        for p in 0..width * height {
            let total: f64 = maps.iter().map(|m| m[p]).sum();
            for m in maps.iter_mut() {
                m[p] = if total > 0.0 {
                    m[p] / total
                } else {
                    1.0 / n as f64
                };
            }
        }
        Ok(Self {
            width,
            height,
            maps,
        })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn map(&self, i: usize) -> &[f64] {
        &self.maps[i]
    }

    pub fn maps(&self) -> &[Vec<f64>] {
        &self.maps
    }
}

/// Product of per-channel Gaussians around mid-range.
pub fn well_exposedness(px: [f64; 3]) -> f64 {
    let s2 = 2.0 * WELL_EXPOSED_SIGMA * WELL_EXPOSED_SIGMA;
    px.iter()
        .map(|&c| (-(c - WELL_EXPOSED_MEAN).powi(2) / s2).exp())
        .product()
}

/// Standard deviation across R, G, B.
pub fn saturation(px: [f64; 3]) -> f64 {
    let mu = (px[0] + px[1] + px[2]) / 3.0;
    (px.iter().map(|&c| (c - mu).powi(2)).sum::<f64>() / 3.0).sqrt()
}

/// Absolute 4-neighbour Laplacian of luminance, replicate borders.
pub fn contrast(img: &RgbImage) -> Vec<f64> {
    let (w, h) = img.dimensions();
    let gray: Vec<f64> = img.pixels().iter().map(|&px| luminance(px)).collect();
    let at = |x: usize, y: usize| gray[y * w + x];
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let c = at(x, y);
            let lap = at(x.saturating_sub(1), y)
                + at((x + 1).min(w - 1), y)
                + at(x, y.saturating_sub(1))
                + at(x, (y + 1).min(h - 1))
                - 4.0 * c;
            out.push(lap.abs());
        }
    }
    out
}

pub fn quality_weights(stack: &ExposureStack) -> Result<WeightMaps> {
    stack.ensure_ldr()?;
    let (w, h) = stack.dimensions();
    let raw = stack
        .images()
        .iter()
        .map(|img| {
            contrast(img)
                .into_iter()
                .zip(img.pixels())
                .map(|(c, &px)| c * saturation(px) * well_exposedness(px) + WEIGHT_FLOOR)
                .collect()
        })
        .collect();
    WeightMaps::normalized(w, h, raw)
}

pub(crate) fn channel_planes(img: &RgbImage) -> [Plane; 3] {
    let (w, h) = img.dimensions();
    std::array::from_fn(|c| Plane::new(w, h, img.pixels().iter().map(|px| px[c]).collect()))
}

/// Laplacian pyramid of each color channel.
pub fn decompose(img: &RgbImage, depth: usize) -> Result<[Vec<Plane>; 3]> {
    let [r, g, b] = channel_planes(img);
    Ok([
        laplacian_pyramid(&r, depth)?,
        laplacian_pyramid(&g, depth)?,
        laplacian_pyramid(&b, depth)?,
    ])
}

/// Collapses per-channel pyramids, clamping to `[0, 1]`.
pub fn reconstruct(channels: &[Vec<Plane>; 3]) -> RgbImage {
    let planes = channels.each_ref().map(|levels| collapse(levels));
    let (w, h) = (planes[0].width, planes[0].height);
    let pixels = (0..w * h)
        .map(|i| std::array::from_fn(|c| planes[c].data[i].clamp(0.0, 1.0)))
        .collect();
    RgbImage::from_raw(w, h, pixels)
}

/// Blends the stack level-wise: Laplacian levels of each image weighted by
/// the Gaussian pyramid of its weight map.
pub fn pyramid_fuse(stack: &ExposureStack, weights: &WeightMaps, depth: usize) -> Result<RgbImage> {
    let (w, h) = stack.dimensions();
    same_dims((w, h), weights.dimensions())?;
    if weights.len() != stack.len() {
        return Err(Error::InvalidImage(format!(
            "{} weight maps for {} images",
            weights.len(),
            stack.len()
        )));
    }
    check_depth(depth, w, h)?;

    let mut blended: Option<[Vec<Plane>; 3]> = None;
    for (img, wmap) in stack.images().iter().zip(weights.maps()) {
        let wpyr = gaussian_pyramid(&Plane::new(w, h, wmap.clone()), depth)?;
        let lap = decompose(img, depth)?;
        match blended.as_mut() {
            None => {
                let mut first = lap;
                for levels in first.iter_mut() {
                    for (level, wl) in levels.iter_mut().zip(&wpyr) {
                        level
                            .data
                            .iter_mut()
                            .zip(&wl.data)
                            .for_each(|(v, k)| *v *= k);
                    }
                }
                blended = Some(first);
            }
            Some(acc) => {
                for (acc_levels, levels) in acc.iter_mut().zip(&lap) {
                    for ((a, l), wl) in acc_levels.iter_mut().zip(levels).zip(&wpyr) {
                        for ((av, lv), kv) in a.data.iter_mut().zip(&l.data).zip(&wl.data) {
                            *av += lv * kv;
                        }
                    }
                }
            }
        }
    }
    Ok(reconstruct(&blended.expect("stack is non-empty")))
}

pub fn resolve_depth(depth: PyramidDepth, width: usize, height: usize) -> usize {
    match depth {
        PyramidDepth::Auto => max_depth(width, height),
        PyramidDepth::Levels(n) => n,
    }
}

/// Fuses an ordered LDR stack into one LDR image.
pub trait FusionBackend: Send + Sync {
    fn id(&self) -> &'static str;
    fn fuse(&self, stack: &ExposureStack) -> Result<RgbImage>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MertensFusion {
    pub depth: PyramidDepth,
}

impl FusionBackend for MertensFusion {
    fn id(&self) -> &'static str {
        BackendKind::Mertens.id()
    }

    fn fuse(&self, stack: &ExposureStack) -> Result<RgbImage> {
        let weights = quality_weights(stack)?;
        let (w, h) = stack.dimensions();
        pyramid_fuse(stack, &weights, resolve_depth(self.depth, w, h))
    }
}

pub fn backend(kind: BackendKind, depth: PyramidDepth) -> Box<dyn FusionBackend> {
    match kind {
        BackendKind::Mertens => Box::new(MertensFusion { depth }),
    }
}

/// Fuses with the backend selected in `cfg`.
pub fn fuse(stack: &ExposureStack, cfg: &PipelineConfig) -> Result<RgbImage> {
    backend(cfg.backend, cfg.pyramid_depth).fuse(stack)
}
