//! Local contrast enhancement: a bilateral local average of each
//! luminance map drives a dodging-and-burning step `L^2 / L_a`.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::config::{positive, PipelineConfig};
use crate::error::Result;
use crate::image::{luminance_of, ExposureStack, LuminanceMap};

/// Range exponents are clamped here so `2^n` in [`exp_neg`] stays normal;
/// the resulting weight (about 1e-304) is indistinguishable from zero.
const EXPONENT_CLAMP: f64 = 700.0;

/// Source rows accumulated per task. Fixed, so the summation order and
/// therefore the output bits do not depend on the thread count.
const BAND_ROWS: usize = 32;

/// `exp(-x)` for `x >= 0`, relative error about 2e-15. Branch-free so the
/// row loops below vectorize.
#[inline(always)]
fn exp_neg(x: f64) -> f64 {
    const LN2_HI: f64 = 0.693_147_180_369_123_8;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    // 1.5 * 2^52: adding it rounds to an integer kept in the low mantissa bits.
    const ROUND: f64 = 6_755_399_441_055_744.0;
    let y = -x.min(EXPONENT_CLAMP);
    let t = y * std::f64::consts::LOG2_E + ROUND;
    let n = t - ROUND;
    let r = (y - n * LN2_HI) - n * LN2_LO;
    // Taylor series of e^r on |r| <= ln(2) / 2.
    let mut p = 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    let two_n = f64::from_bits((t.to_bits().wrapping_add(1023) << 52) & 0x7ff0_0000_0000_0000);
    p * two_n
}

/// Accumulators for the pixel pairs `(a[i], b[i])` that share one spatial
/// offset: each side gains the other's value weighted by
/// `spatial * exp(-(a - b)^2 * inv_r2)`.
struct PairRow<'a> {
    a: &'a [f64],
    b: &'a [f64],
    spatial: f64,
    inv_r2: f64,
    weights: &'a mut [f64],
    num_a: &'a mut [f64],
    den_a: &'a mut [f64],
    num_b: &'a mut [f64],
    den_b: &'a mut [f64],
}

#[inline(always)]
fn pair_row_body(row: PairRow<'_>) {
    let n = row.a.len();
    let (a, b, wt) = (row.a, &row.b[..n], &mut row.weights[..n]);
    for i in 0..n {
        let d = a[i] - b[i];
        wt[i] = row.spatial * exp_neg(d * d * row.inv_r2);
    }
    let (num_a, den_a) = (&mut row.num_a[..n], &mut row.den_a[..n]);
    for i in 0..n {
        num_a[i] += wt[i] * b[i];
        den_a[i] += wt[i];
    }
    let (num_b, den_b) = (&mut row.num_b[..n], &mut row.den_b[..n]);
    for i in 0..n {
        num_b[i] += wt[i] * a[i];
        den_b[i] += wt[i];
    }
}

fn pair_row_generic(row: PairRow<'_>) {
    pair_row_body(row)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
fn pair_row_avx512(row: PairRow<'_>) {
    pair_row_body(row)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
fn pair_row_avx2(row: PairRow<'_>) {
    pair_row_body(row)
}

fn pair_row_kernel() -> fn(PairRow<'_>) {
    static KERNEL: OnceLock<fn(PairRow<'_>)> = OnceLock::new();
    *KERNEL.get_or_init(|| {
        #[cfg(target_arch = "x86_64")]
        {
            if is_x86_feature_detected!("avx512f") {
                // SAFETY: the required CPU feature was detected at runtime.
                return |row| unsafe { pair_row_avx512(row) };
            }
            if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma") {
                // SAFETY: as above.
                return |row| unsafe { pair_row_avx2(row) };
            }
        }
        pair_row_generic
    })
}

/// Half-width of the square window used by [`bilateral_filter`].
pub fn window_radius(sigma_spatial: f64) -> usize {
    (2.0 * sigma_spatial).ceil() as usize
}

/// Weighted sums contributed by the pairs whose upper pixel lies in one
/// band of rows. `upper_*` covers the band rows, `lower_*` the band rows
/// plus `radius` rows below.
struct BandSums {
    upper_num: Vec<f64>,
    upper_den: Vec<f64>,
    lower_num: Vec<f64>,
    lower_den: Vec<f64>,
}

fn band_sums(
    src: &[f64],
    w: usize,
    h: usize,
    rows: std::ops::Range<usize>,
    radius: usize,
    spatial: &[f64],
    inv_r2: f64,
) -> BandSums {
    let kernel = pair_row_kernel();
    let y_base = rows.start;
    let lower_rows = (rows.end + radius).min(h) - y_base;
    let mut sums = BandSums {
        upper_num: vec![0.0; rows.len() * w],
        upper_den: vec![0.0; rows.len() * w],
        lower_num: vec![0.0; lower_rows * w],
        lower_den: vec![0.0; lower_rows * w],
    };
    let mut weights = vec![0.0; w];
    let r = radius as isize;
    for y in rows {
        for dy in 0..=radius.min(h - 1 - y) {
            // Each unordered pair once: dy > 0, or dy == 0 with dx > 0.
            let dx_start = if dy == 0 { 1 } else { -r };
            for dx in dx_start..=r {
                // pixel (x, y) pairs with (x + dx, y + dy)
                let x_lo = (-dx).max(0) as usize;
                let x_hi = (w as isize).min(w as isize - dx).max(0) as usize;
                if x_lo >= x_hi {
                    continue;
                }
                let n = x_hi - x_lo;
                let xb = (x_lo as isize + dx) as usize;
                let a0 = y * w + x_lo;
                let b0 = (y + dy) * w + xb;
                let ua = (y - y_base) * w + x_lo;
                let lb = (y + dy - y_base) * w + xb;
                kernel(PairRow {
                    a: &src[a0..a0 + n],
                    b: &src[b0..b0 + n],
                    spatial: spatial[dy * (radius + 1) + dx.unsigned_abs()],
                    inv_r2,
                    weights: &mut weights[..n],
                    num_a: &mut sums.upper_num[ua..ua + n],
                    den_a: &mut sums.upper_den[ua..ua + n],
                    num_b: &mut sums.lower_num[lb..lb + n],
                    den_b: &mut sums.lower_den[lb..lb + n],
                });
            }
        }
    }
    sums
}

/// Edge-preserving local average with kernels `exp(-r^2 / sigma^2)`.
///
/// The spatial sum is truncated to a square window of radius
/// `ceil(2 * sigma_spatial)` clipped at the image border; the per-pixel
/// normalization absorbs the clipping. Each symmetric pixel pair is
/// weighted once and credited to both ends.
pub fn bilateral_filter(
    l: &LuminanceMap,
    sigma_spatial: f64,
    sigma_range: f64,
) -> Result<LuminanceMap> {
    positive("sigma_spatial", sigma_spatial)?;
    positive("sigma_range", sigma_range)?;

    let (w, h) = l.dimensions();
    let src = l.samples();
    let radius = window_radius(sigma_spatial);
    let inv_s2 = 1.0 / (sigma_spatial * sigma_spatial);
    let inv_r2 = 1.0 / (sigma_range * sigma_range);

    // spatial[dy * (radius + 1) + |dx|]
    let mut spatial = Vec::with_capacity((radius + 1) * (radius + 1));
    for dy in 0..=radius {
        for dx in 0..=radius {
            spatial.push((-((dx * dx + dy * dy) as f64) * inv_s2).exp());
        }
    }

    // The center pixel has weight exp(0) = 1.
    let mut num = src.to_vec();
    let mut den = vec![1.0; w * h];
    let bands: Vec<_> = (0..h)
        .step_by(BAND_ROWS)
        .map(|y| y..(y + BAND_ROWS).min(h))
        .collect();
    // Bounded batches keep the number of live band buffers small.
    let batch = 2 * rayon::current_num_threads().max(1);
    for chunk in bands.chunks(batch) {
        let sums: Vec<BandSums> = chunk
            .par_iter()
            .map(|rows| band_sums(src, w, h, rows.clone(), radius, &spatial, inv_r2))
            .collect();
        for (rows, s) in chunk.iter().zip(sums) {
            let base = rows.start * w;
            add_into(&mut num[base..], &s.upper_num);
            add_into(&mut den[base..], &s.upper_den);
            add_into(&mut num[base..], &s.lower_num);
            add_into(&mut den[base..], &s.lower_den);
        }
    }

    let lo = l.min();
    let hi = l.max();
    let out = num
        .iter()
        .zip(&den)
        .map(|(n, d)| (n / d).clamp(lo, hi))
        .collect();
    Ok(LuminanceMap::from_raw(w, h, out))
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// `L^2 / L_a`, falling back to `L` wherever `L_a <= epsilon`.
pub fn dodge_burn(l: &LuminanceMap, l_avg: &LuminanceMap, epsilon: f64) -> Result<LuminanceMap> {
    l.ensure_same_dims(l_avg)?;
    positive("epsilon", epsilon)?;
    let out = l
        .samples()
        .iter()
        .zip(l_avg.samples())
        .map(|(&v, &a)| if a > epsilon { v * v / a } else { v })
        .collect();
    Ok(LuminanceMap::from_raw(l.width(), l.height(), out))
}

/// Contrast-enhanced luminance of every stack member, in stack order.
pub fn enhance_stack(stack: &ExposureStack, cfg: &PipelineConfig) -> Result<Vec<LuminanceMap>> {
    stack
        .images()
        .iter()
        .map(|img| {
            let l = luminance_of(img);
            let avg = bilateral_filter(&l, cfg.sigma_spatial, cfg.sigma_range)?;
            dodge_burn(&l, &avg, cfg.epsilon)
        })
        .collect()
}
