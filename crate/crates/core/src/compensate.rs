//! Exposure compensation. The middle exposure's log-average luminance is
//! anchored at the key and the others are placed on a 1 EV ladder around it.

use crate::config::{check_key, positive};
use crate::error::{Error, Result};
use crate::image::{geometric_mean, LuminanceMap};

/// Per-image gains together with the 1-based index of the anchor image.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    alphas: Vec<f64>,
    middle_index: usize,
}

impl AlphaVector {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// 1-based position of the anchor image.
    pub fn middle_index(&self) -> usize {
        self.middle_index
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

/// `ceil((n + 1) / 2)`, 1-based.
pub fn middle_index(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::EmptyStack);
    }
    Ok(n / 2 + 1)
}

/// Gains from precomputed log-average luminances: image `k` gets
/// `key * 2^(k - j) / mean_k`.
pub fn alphas_from_means(means: &[f64], key: f64) -> Result<AlphaVector> {
    check_key(key)?;
    let j = middle_index(means.len())?;
    let alphas = means
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            positive("geometric_mean", g)?;
            let steps = (i + 1) as i32 - j as i32;
            Ok(key * 2f64.powi(steps) / g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlphaVector {
        alphas,
        middle_index: j,
    })
}

pub fn estimate_alphas(enhanced: &[LuminanceMap], key: f64, epsilon: f64) -> Result<AlphaVector> {
    let means = enhanced
        .iter()
        .map(|l| geometric_mean(l, epsilon))
        .collect::<Result<Vec<_>>>()?;
    alphas_from_means(&means, key)
}

pub fn compensate(l: &LuminanceMap, alpha: f64) -> Result<LuminanceMap> {
    positive("alpha", alpha)?;
    let out = l.samples().iter().map(|&v| alpha * v).collect();
    Ok(LuminanceMap::from_raw(l.width(), l.height(), out))
}
