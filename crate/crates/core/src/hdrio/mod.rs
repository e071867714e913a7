//! File formats and synthetic exposure stacks.

mod ldr;
mod rgbe;
mod synth;

use std::fs;
use std::path::Path;

pub use self::ldr::{
    dequantize, from_rgb8, quantize, read_ldr, to_rgb8, write_ldr, LdrError, LdrFormat,
};
pub use self::rgbe::{decode_rgbe, encode_rgbe, read_rgbe, write_rgbe, RgbeEncoding, RgbeError};
pub use self::synth::{
    ev_from_shutter, expose, exposure_scale, synth_exposures, synth_exposures_with, SynthOptions,
};

use crate::error::Result;
use crate::image::RgbImage;

/// Scene-referred linear RGB radiance; unbounded above.
#[derive(Debug, Clone, PartialEq)]
pub struct RadianceMap(RgbImage);

impl RadianceMap {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        RgbImage::new(width, height, pixels).map(Self)
    }

    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Self {
        Self(RgbImage::from_raw(width, height, pixels))
    }

    pub fn from_image(img: RgbImage) -> Self {
        Self(img)
    }

    pub fn as_image(&self) -> &RgbImage {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.0.dimensions()
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        self.0.pixels()
    }
}

pub fn load_rgbe(path: impl AsRef<Path>) -> Result<RadianceMap> {
    Ok(read_rgbe(&fs::read(path)?)?)
}

pub fn save_rgbe(path: impl AsRef<Path>, map: &RadianceMap) -> Result<()> {
    fs::write(path, write_rgbe(map, RgbeEncoding::Rle))?;
    Ok(())
}

pub fn load_ldr(path: impl AsRef<Path>) -> Result<RgbImage> {
    Ok(read_ldr(&fs::read(path)?)?)
}

/// Writes PNG, or PPM when the extension is `.ppm`.
pub fn save_ldr(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_ldr(img, LdrFormat::from_path(path))?)?;
    Ok(())
}
