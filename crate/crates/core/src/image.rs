//! Image containers and the per-pixel helpers shared by every stage.
//!
//! Samples are linear-light `f64` values. LDR images live in `[0, 1]`;
//! radiance data is unbounded. Quantization to 8 bits only happens in
//! [`crate::hdrio`].

use crate::error::{Error, Result};

/// Rec. 709 luminance weights for linear R, G, B.
pub const LUMA_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }
    Ok(())
}

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    check_dims(width, height)?;
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidImage(format!(
            "{len} samples do not fill a {width}x{height} image"
        )));
    }
    Ok(())
}

fn check_sample(x: usize, y: usize, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidImage(format!(
            "sample {v} at ({x}, {y}) is not a finite non-negative value"
        )));
    }
    Ok(())
}

/// Three-channel image with interleaved linear samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        check_len(width, height, pixels.len())?;
        for (i, px) in pixels.iter().enumerate() {
            for &c in px {
                check_sample(i % width, i / width, c)?;
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: [f64; 3]) -> Result<Self> {
        check_dims(width, height)?;
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Callers guarantee the invariants; used for stage outputs whose
    /// construction already bounds every sample.
    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        debug_assert!(pixels.iter().flatten().all(|v| v.is_finite() && *v >= 0.0));
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<[f64; 3]> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn is_ldr(&self) -> bool {
        self.pixels.iter().flatten().all(|&v| v <= 1.0)
    }

    pub fn ensure_ldr(&self) -> Result<()> {
        for (i, px) in self.pixels.iter().enumerate() {
            for &v in px {
                if v > 1.0 {
                    return Err(Error::NotLdr {
                        x: i % self.width,
                        y: i / self.width,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// Multiplies every sample by `factor` (`factor >= 0`).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::param("factor", format!("{factor} is not >= 0")));
        }
        let pixels = self
            .pixels
            .iter()
            .map(|px| px.map(|c| c * factor))
            .collect();
        Self::new(self.width, self.height, pixels)
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks_exact(self.width) {
            pixels.extend(row.iter().rev());
        }
        Self::from_raw(self.width, self.height, pixels)
    }

    pub fn flip_vertical(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks_exact(self.width).rev() {
            pixels.extend_from_slice(row);
        }
        Self::from_raw(self.width, self.height, pixels)
    }

    pub fn mean_luminance(&self) -> f64 {
        let l = luminance_of(self);
        l.samples().iter().sum::<f64>() / l.samples().len() as f64
    }
}

/// Single-channel luminance plane.
#[derive(Debug, Clone, PartialEq)]
pub struct LuminanceMap {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl LuminanceMap {
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        check_len(width, height, samples.len())?;
        for (i, &v) in samples.iter().enumerate() {
            check_sample(i % width, i / width, v)?;
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        check_dims(width, height)?;
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        check_dims(width, height)?;
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples)
    }

    pub(crate) fn from_raw(width: usize, height: usize, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), width * height);
        debug_assert!(samples.iter().all(|v| v.is_finite() && *v >= 0.0));
        Self {
            width,
            height,
            samples,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn ensure_same_dims(&self, other: &LuminanceMap) -> Result<()> {
        same_dims(self.dimensions(), other.dimensions())
    }
}

pub(crate) fn same_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            expected_width: expected.0,
            expected_height: expected.1,
            width: actual.0,
            height: actual.1,
        });
    }
    Ok(())
}

/// Ordered exposures, darkest first.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureStack {
    images: Vec<RgbImage>,
    evs: Option<Vec<f64>>,
}

impl ExposureStack {
    pub fn new(images: Vec<RgbImage>) -> Result<Self> {
        let first = images.first().ok_or(Error::EmptyStack)?;
        let dims = first.dimensions();
        for img in &images[1..] {
            same_dims(dims, img.dimensions())?;
        }
        Ok(Self { images, evs: None })
    }

    /// Attaches EV labels; they must be strictly increasing.
    pub fn with_evs(images: Vec<RgbImage>, evs: Vec<f64>) -> Result<Self> {
        let mut stack = Self::new(images)?;
        if evs.len() != stack.images.len() {
            return Err(Error::EvCountMismatch {
                images: stack.images.len(),
                evs: evs.len(),
            });
        }
        if evs.iter().any(|v| !v.is_finite()) || evs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnorderedExposures);
        }
        stack.evs = Some(evs);
        Ok(stack)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[RgbImage] {
        &self.images
    }

    pub fn into_images(self) -> Vec<RgbImage> {
        self.images
    }

    pub fn evs(&self) -> Option<&[f64]> {
        self.evs.as_deref()
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.images[0].dimensions()
    }

    pub fn ensure_ldr(&self) -> Result<()> {
        self.images.iter().try_for_each(RgbImage::ensure_ldr)
    }
}

pub fn luminance(px: [f64; 3]) -> f64 {
    LUMA_WEIGHTS[0] * px[0] + LUMA_WEIGHTS[1] * px[1] + LUMA_WEIGHTS[2] * px[2]
}

pub fn luminance_of(img: &RgbImage) -> LuminanceMap {
    let samples = img.pixels.iter().map(|&px| luminance(px)).collect();
    LuminanceMap::from_raw(img.width, img.height, samples)
}

/// Log-average of `samples` with every value floored at `epsilon`.
pub fn geometric_mean_of(samples: &[f64], epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("{epsilon} is not > 0")));
    }
    if samples.is_empty() {
        return Err(Error::EmptyImage {
            width: 0,
            height: 0,
        });
    }
    let log_sum: f64 = samples.iter().map(|&v| v.max(epsilon).ln()).sum();
    // exp(ln eps) can round just below eps.
    Ok((log_sum / samples.len() as f64).exp().max(epsilon))
}

pub fn geometric_mean(l: &LuminanceMap, epsilon: f64) -> Result<f64> {
    geometric_mean_of(&l.samples, epsilon)
}

/// Rebuilds color from a new luminance by scaling each channel with
/// `l_new / l_orig`, clamped to `[0, 1]`. Pixels with zero original
/// luminance come out black.
pub fn restore_color(
    orig: &RgbImage,
    l_orig: &LuminanceMap,
    l_new: &LuminanceMap,
) -> Result<RgbImage> {
    same_dims(orig.dimensions(), l_orig.dimensions())?;
    same_dims(orig.dimensions(), l_new.dimensions())?;
    let pixels = orig
        .pixels
        .iter()
        .zip(&l_orig.samples)
        .zip(&l_new.samples)
        .map(|((&px, &lo), &ln)| {
            if lo > 0.0 {
                let ratio = ln / lo;
                px.map(|c| (c * ratio).clamp(0.0, 1.0))
            } else {
                [0.0; 3]
            }
        })
        .collect();
    Ok(RgbImage::from_raw(orig.width, orig.height, pixels))
}
