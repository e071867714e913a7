//! Gaussian and Laplacian pyramids on single-channel planes.
//!
//! Reduction blurs with the separable binomial kernel `[1, 4, 6, 4, 1] / 16`
//! (edge-clamped) and keeps even samples, so a level of size `n` has
//! `ceil(n / 2)` samples below it. Expansion interpolates with the same
//! kernel and clamps coarse indices at the border.

use crate::error::{Error, Result};

const KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(width * height, data.len(), "plane size mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![0.0; width * height])
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Deepest level count allowed for an image: `floor(log2(min(w, h)))`,
/// never below one.
pub fn max_depth(width: usize, height: usize) -> usize {
    let m = width.min(height).max(1);
    (usize::BITS - 1 - m.leading_zeros()).max(1) as usize
}

pub fn check_depth(depth: usize, width: usize, height: usize) -> Result<()> {
    let max = max_depth(width, height);
    if depth == 0 || depth > max {
        return Err(Error::PyramidDepth {
            depth,
            max,
            width,
            height,
        });
    }
    Ok(())
}

fn blur_rows(src: &Plane) -> Plane {
    let (w, h) = (src.width, src.height);
    let mut out = Plane::zeros(w, h);
    let last = w as isize - 1;
    for y in 0..h {
        let row = &src.data[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &c) in KERNEL.iter().enumerate() {
                let xi = (x as isize + k as isize - 2).clamp(0, last) as usize;
                acc += c * row[xi];
            }
            out.data[y * w + x] = acc;
        }
    }
    out
}

fn blur_cols(src: &Plane) -> Plane {
    let (w, h) = (src.width, src.height);
    let mut out = Plane::zeros(w, h);
    let last = h as isize - 1;
    for y in 0..h {
        for (k, &c) in KERNEL.iter().enumerate() {
            let yi = (y as isize + k as isize - 2).clamp(0, last) as usize;
            let src_row = &src.data[yi * w..(yi + 1) * w];
            let dst = &mut out.data[y * w..(y + 1) * w];
            for (d, &s) in dst.iter_mut().zip(src_row) {
                *d += c * s;
            }
        }
    }
    out
}

pub fn reduce(src: &Plane) -> Plane {
    let blurred = blur_cols(&blur_rows(src));
    let nw = src.width.div_ceil(2);
    let nh = src.height.div_ceil(2);
    let mut out = Plane::zeros(nw, nh);
    for y in 0..nh {
        for x in 0..nw {
            out.data[y * nw + x] = blurred.get(2 * x, 2 * y);
        }
    }
    out
}

/// Taps of the interpolation kernel landing on coarse samples for output
/// position `i`. Each set sums to one.
#[inline]
fn expand_taps(i: usize, coarse_len: usize) -> [(usize, f64); 3] {
    let last = coarse_len as isize - 1;
    let clamp = |v: isize| v.clamp(0, last) as usize;
    let c = (i / 2) as isize;
    if i.is_multiple_of(2) {
        [
            (clamp(c - 1), 1.0 / 8.0),
            (clamp(c), 6.0 / 8.0),
            (clamp(c + 1), 1.0 / 8.0),
        ]
    } else {
        [(clamp(c), 4.0 / 8.0), (clamp(c + 1), 4.0 / 8.0), (0, 0.0)]
    }
}

/// Upsamples `coarse` to `width x height`.
pub fn expand(coarse: &Plane, width: usize, height: usize) -> Plane {
    let cw = coarse.width;
    let mut rows = Plane::zeros(width, coarse.height);
    for y in 0..coarse.height {
        let src = &coarse.data[y * cw..(y + 1) * cw];
        for x in 0..width {
            rows.data[y * width + x] = expand_taps(x, cw).iter().map(|&(i, k)| k * src[i]).sum();
        }
    }
    let mut out = Plane::zeros(width, height);
    for y in 0..height {
        for (yi, k) in expand_taps(y, coarse.height) {
            if k == 0.0 {
                continue;
            }
            let src = &rows.data[yi * width..(yi + 1) * width];
            let dst = &mut out.data[y * width..(y + 1) * width];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += k * s;
            }
        }
    }
    out
}

pub fn gaussian_pyramid(plane: &Plane, depth: usize) -> Result<Vec<Plane>> {
    check_depth(depth, plane.width, plane.height)?;
    let mut levels = Vec::with_capacity(depth);
    levels.push(plane.clone());
    for _ in 1..depth {
        let next = reduce(levels.last().unwrap());
        levels.push(next);
    }
    Ok(levels)
}

/// Band-pass levels followed by the coarsest Gaussian level.
pub fn laplacian_pyramid(plane: &Plane, depth: usize) -> Result<Vec<Plane>> {
    let gauss = gaussian_pyramid(plane, depth)?;
    let mut levels = Vec::with_capacity(depth);
    for pair in gauss.windows(2) {
        let up = expand(&pair[1], pair[0].width, pair[0].height);
        let data = pair[0]
            .data
            .iter()
            .zip(&up.data)
            .map(|(a, b)| a - b)
            .collect();
        levels.push(Plane::new(pair[0].width, pair[0].height, data));
    }
    levels.push(gauss.last().unwrap().clone());
    Ok(levels)
}

pub fn collapse(levels: &[Plane]) -> Plane {
    let mut acc = levels.last().expect("empty pyramid").clone();
    for level in levels.iter().rev().skip(1) {
        let mut up = expand(&acc, level.width, level.height);
        for (u, &l) in up.data.iter_mut().zip(&level.data) {
            *u += l;
        }
        acc = up;
    }
    acc
}
