use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_SIGMA_SPATIAL: f64 = 16.0;
pub const DEFAULT_SIGMA_RANGE: f64 = 3.0 / 255.0;
/// Middle gray on a `[0, 1]` display scale.
pub const DEFAULT_KEY: f64 = 0.18;
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Fusion method used to merge the (possibly enhanced) stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendKind {
    #[default]
    Mertens,
}

impl BackendKind {
    pub fn id(self) -> &'static str {
        match self {
            BackendKind::Mertens => "mertens",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mertens" => Ok(BackendKind::Mertens),
            _ => Err(Error::UnknownBackend(s.to_string())),
        }
    }
}

/// Number of pyramid levels used by multi-scale fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PyramidDepth {
    /// `floor(log2(min(width, height)))`, at least one level.
    #[default]
    Auto,
    Levels(usize),
}

impl fmt::Display for PyramidDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PyramidDepth::Auto => f.write_str("auto"),
            PyramidDepth::Levels(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for PyramidDepth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(PyramidDepth::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(PyramidDepth::Levels(n)),
            _ => Err(Error::param(
                "pyramid_depth",
                format!("`{s}` is neither `auto` nor a positive level count"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Spatial Gaussian width of the bilateral filter, in pixels.
    pub sigma_spatial: f64,
    /// Range Gaussian width of the bilateral filter, in luminance units.
    pub sigma_range: f64,
    /// Target geometric-mean luminance of the middle exposure.
    pub key: f64,
    /// Luminance floor for log averages and divisions.
    pub epsilon: f64,
    /// Exposure offsets used when synthesizing stacks from radiance maps.
    pub ev_offsets: Vec<f64>,
    pub backend: BackendKind,
    pub pyramid_depth: PyramidDepth,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sigma_spatial: DEFAULT_SIGMA_SPATIAL,
            sigma_range: DEFAULT_SIGMA_RANGE,
            key: DEFAULT_KEY,
            epsilon: DEFAULT_EPSILON,
            ev_offsets: vec![-1.0, 0.0, 1.0],
            backend: BackendKind::default(),
            pyramid_depth: PyramidDepth::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        positive("sigma_spatial", self.sigma_spatial)?;
        positive("sigma_range", self.sigma_range)?;
        positive("epsilon", self.epsilon)?;
        check_key(self.key)?;
        if self.ev_offsets.is_empty() {
            return Err(Error::param(
                "ev_offsets",
                "at least one offset is required",
            ));
        }
        if self.ev_offsets.iter().any(|v| !v.is_finite())
            || self.ev_offsets.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::UnorderedExposures);
        }
        if let PyramidDepth::Levels(0) = self.pyramid_depth {
            return Err(Error::param("pyramid_depth", "must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} is not > 0")))
    }
}

pub(crate) fn check_key(key: f64) -> Result<()> {
    if key > 0.0 && key < 1.0 {
        Ok(())
    } else {
        Err(Error::param("key", format!("{key} is not in (0, 1)")))
    }
}
