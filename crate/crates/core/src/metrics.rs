//! No-reference quality scores: discrete entropy of the 8-bit gray
//! histogram, and the statistical-naturalness term of TMQI.
//!
//! Naturalness combines a Gaussian model of global brightness with a Beta
//! model of mean local contrast, each normalized to peak at 1. The model
//! constants come from the TMQI reference implementation.

use std::io::Write;

use crate::error::{Error, Result};
use crate::image::{luminance, RgbImage};

pub const BRIGHTNESS_MEAN: f64 = 115.94;
pub const BRIGHTNESS_SIGMA: f64 = 27.99;
pub const CONTRAST_ALPHA: f64 = 4.4;
pub const CONTRAST_BETA: f64 = 10.1;
pub const CONTRAST_SCALE: f64 = 64.29;
pub const CONTRAST_WINDOW: usize = 11;

/// 8-bit gray levels: Rec. 709 luminance scaled to 255, rounded half up.
pub fn gray8(img: &RgbImage) -> Vec<u8> {
    img.pixels()
        .iter()
        .map(|&px| (luminance(px) * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8)
        .collect()
}

pub fn histogram(levels: &[u8]) -> [u64; 256] {
    let mut h = [0u64; 256];
    for &v in levels {
        h[v as usize] += 1;
    }
    h
}

/// Shannon entropy in bits.
pub fn histogram_entropy(hist: &[u64]) -> f64 {
    let n: u64 = hist.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let h = -hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>();
    h.max(0.0)
}

pub fn discrete_entropy(img: &RgbImage) -> f64 {
    histogram_entropy(&histogram(&gray8(img)))
}

/// Peak-normalized Gaussian density of the global mean gray level.
pub fn brightness_score(mean: f64) -> f64 {
    let z = (mean - BRIGHTNESS_MEAN) / BRIGHTNESS_SIGMA;
    (-0.5 * z * z).exp()
}

pub fn contrast_mode() -> f64 {
    (CONTRAST_ALPHA - 1.0) / (CONTRAST_ALPHA + CONTRAST_BETA - 2.0)
}

/// Peak-normalized Beta density of the mean local standard deviation.
pub fn contrast_score(mean_local_std: f64) -> f64 {
    let x = mean_local_std / CONTRAST_SCALE;
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let m = contrast_mode();
    let log = (CONTRAST_ALPHA - 1.0) * (x / m).ln()
        + (CONTRAST_BETA - 1.0) * ((1.0 - x) / (1.0 - m)).ln();
    log.exp().min(1.0)
}

pub fn naturalness_from_stats(mean: f64, mean_local_std: f64) -> f64 {
    (brightness_score(mean) * contrast_score(mean_local_std)).clamp(0.0, 1.0)
}

#[inline]
fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    while i < 0 || i >= n {
        i = if i < 0 { -i - 1 } else { 2 * n - i - 1 };
    }
    i as usize
}

/// Mean over pixels of the sample standard deviation in the centered
/// `window x window` neighbourhood, with symmetric border extension.
pub fn mean_local_std(levels: &[u8], width: usize, height: usize, window: usize) -> Result<f64> {
    if width < window || height < window {
        return Err(Error::ImageTooSmall {
            width,
            height,
            window,
        });
    }
    assert_eq!(levels.len(), width * height);
    let r = (window / 2) as isize;
    let pw = width + 2 * r as usize;
    let ph = height + 2 * r as usize;
    // Integral images over the padded plane; integer sums keep the
    // statistics exact.
    let mut sum = vec![0i64; (pw + 1) * (ph + 1)];
    let mut sq = vec![0i64; (pw + 1) * (ph + 1)];
    for y in 0..ph {
        let sy = mirror(y as isize - r, height);
        let (mut row_s, mut row_q) = (0i64, 0i64);
        for x in 0..pw {
            let sx = mirror(x as isize - r, width);
            let v = levels[sy * width + sx] as i64;
            row_s += v;
            row_q += v * v;
            let i = (y + 1) * (pw + 1) + x + 1;
            sum[i] = sum[i - pw - 1] + row_s;
            sq[i] = sq[i - pw - 1] + row_q;
        }
    }
    let n = (window * window) as i64;
    let box_sum = |t: &[i64], x: usize, y: usize| {
        let (x1, y1) = (x + window, y + window);
        t[y1 * (pw + 1) + x1] - t[y * (pw + 1) + x1] - t[y1 * (pw + 1) + x] + t[y * (pw + 1) + x]
    };
    let mut total = 0.0;
    for y in 0..height {
        for x in 0..width {
            let s = box_sum(&sum, x, y);
            let q = box_sum(&sq, x, y);
            let var_num = n * q - s * s;
            total += (var_num as f64 / (n * (n - 1)) as f64).sqrt();
        }
    }
    Ok(total / (width * height) as f64)
}

/// TMQI statistical naturalness in `[0, 1]`.
pub fn statistical_naturalness(img: &RgbImage) -> Result<f64> {
    let (w, h) = img.dimensions();
    let levels = gray8(img);
    let d = mean_local_std(&levels, w, h, CONTRAST_WINDOW)?;
    let m = levels.iter().map(|&v| v as f64).sum::<f64>() / levels.len() as f64;
    Ok(naturalness_from_stats(m, d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub image_id: String,
    pub method_id: String,
    pub entropy_bits: f64,
    pub naturalness: f64,
}

impl MetricsReport {
    pub const CSV_HEADER: [&'static str; 4] =
        ["image_id", "method_id", "entropy_bits", "naturalness"];

    pub fn csv_record(&self) -> [String; 4] {
        [
            self.image_id.clone(),
            self.method_id.clone(),
            format!("{:.6}", self.entropy_bits),
            format!("{:.6}", self.naturalness),
        ]
    }
}

pub fn score_image(image_id: &str, method_id: &str, img: &RgbImage) -> Result<MetricsReport> {
    Ok(MetricsReport {
        image_id: image_id.to_string(),
        method_id: method_id.to_string(),
        entropy_bits: discrete_entropy(img),
        naturalness: statistical_naturalness(img)?,
    })
}

/// One row per image, in input order.
pub fn score_report(method_id: &str, images: &[(String, RgbImage)]) -> Result<Vec<MetricsReport>> {
    if images.is_empty() {
        return Err(Error::EmptyStack);
    }
    images
        .iter()
        .map(|(id, img)| score_image(id, method_id, img))
        .collect()
}

pub fn write_reports_csv<W: Write>(out: W, reports: &[MetricsReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MetricsReport::CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{Beta, Continuous, Normal};

    fn gray_image(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| [f(x, y) as f64 / 255.0; 3]).unwrap()
    }

    #[test]
    fn gray8_rounds_half_up() {
        let img = RgbImage::new(3, 1, vec![[0.5; 3], [1.0; 3], [0.0; 3]]).unwrap();
        assert_eq!(gray8(&img), vec![128, 255, 0]);
        for k in 0..=255u8 {
            assert_eq!(gray8(&gray_image(1, 1, |_, _| k)), vec![k]);
        }
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(
            discrete_entropy(&RgbImage::filled(7, 3, [0.4; 3]).unwrap()),
            0.0
        );
        let ramp = gray_image(16, 16, |x, y| (y * 16 + x) as u8);
        assert!((discrete_entropy(&ramp) - 8.0).abs() < 1e-12);
        let quarter = gray_image(4, 1, |x, _| if x == 0 { 200 } else { 10 });
        let oracle = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((oracle - 0.811278).abs() < 1e-6);
        assert!((discrete_entropy(&quarter) - oracle).abs() < 1e-12);
    }

    #[test]
    fn scores_match_statrs_densities() {
        let normal = Normal::new(BRIGHTNESS_MEAN, BRIGHTNESS_SIGMA).unwrap();
        let beta = Beta::new(CONTRAST_ALPHA, CONTRAST_BETA).unwrap();
        let peak_n = normal.pdf(BRIGHTNESS_MEAN);
        let peak_b = beta.pdf(contrast_mode());
        for i in 0..=255 {
            let m = i as f64;
            assert!((brightness_score(m) - normal.pdf(m) / peak_n).abs() < 1e-12);
        }
        for i in 1..640 {
            let d = i as f64 * 0.1;
            let expected = beta.pdf(d / CONTRAST_SCALE) / peak_b;
            assert!((contrast_score(d) - expected).abs() < 1e-9, "d={d}");
        }
    }

    #[test]
    fn naturalness_peak_and_tails() {
        let d_mode = contrast_mode() * CONTRAST_SCALE;
        assert!((naturalness_from_stats(BRIGHTNESS_MEAN, d_mode) - 1.0).abs() < 1e-9);
        assert_eq!(naturalness_from_stats(128.0, 0.0), 0.0);
        assert_eq!(naturalness_from_stats(0.0, 70.0), 0.0);

        let black = RgbImage::filled(16, 16, [0.0; 3]).unwrap();
        assert!(statistical_naturalness(&black).unwrap() < 1e-4);
        let gray = gray_image(16, 16, |_, _| 128);
        assert!(statistical_naturalness(&gray).unwrap() < 1e-4);
    }

    #[test]
    fn naturalness_needs_window_sized_image() {
        let small = RgbImage::filled(10, 30, [0.5; 3]).unwrap();
        assert!(matches!(
            statistical_naturalness(&small),
            Err(Error::ImageTooSmall { .. })
        ));
        assert!(statistical_naturalness(&RgbImage::filled(11, 11, [0.5; 3]).unwrap()).is_ok());
    }

    /// Brute-force local std with explicit mirrored indexing.
    fn naive_mean_local_std(levels: &[u8], w: usize, h: usize, win: usize) -> f64 {
        let r = (win / 2) as isize;
        let mut total = 0.0;
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut vals = Vec::new();
                for dy in -r..=r {
                    for dx in -r..=r {
                        let sx = mirror(x + dx, w);
                        let sy = mirror(y + dy, h);
                        vals.push(levels[sy * w + sx] as f64);
                    }
                }
                let n = vals.len() as f64;
                let mu = vals.iter().sum::<f64>() / n;
                let var = vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0);
                total += var.sqrt();
            }
        }
        total / (w * h) as f64
    }

    #[test]
    fn local_std_matches_brute_force() {
        let (w, h) = (23, 17);
        let levels: Vec<u8> = (0..w * h)
            .map(|i| ((i * 97 + i / 5 * 31) % 256) as u8)
            .collect();
        let fast = mean_local_std(&levels, w, h, 11).unwrap();
        let slow = naive_mean_local_std(&levels, w, h, 11);
        assert!((fast - slow).abs() < 1e-9);
    }

    #[test]
    fn score_report_rows() {
        let img = RgbImage::filled(12, 12, [0.3; 3]).unwrap();
        let rows = score_report("proposed", &[("a".into(), img.clone())]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].entropy_bits, 0.0);
        let twice = score_report("x", &[("a".into(), img.clone()), ("a".into(), img)]).unwrap();
        assert_eq!(twice[0], twice[1]);
        assert!(score_report("x", &[]).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = vec![MetricsReport {
            image_id: "desk".into(),
            method_id: "mertens-proposed".into(),
            entropy_bits: 7.25,
            naturalness: 1.0 / 3.0,
        }];
        let mut buf = Vec::new();
        write_reports_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "image_id,method_id,entropy_bits,naturalness\ndesk,mertens-proposed,7.250000,0.333333\n"
        );
    }

    fn levels_strategy() -> impl Strategy<Value = (usize, usize, Vec<u8>)> {
        (11usize..20, 11usize..20)
            .prop_flat_map(|(w, h)| (Just(w), Just(h), prop::collection::vec(any::<u8>(), w * h)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn entropy_bounds_and_permutation((w, h, levels) in levels_strategy(), rot in 0usize..400) {
            let img = gray_image(w, h, |x, y| levels[y * w + x]);
            let e = discrete_entropy(&img);
            prop_assert!((0.0..=8.0).contains(&e));
            let mut shuffled = levels.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let img2 = gray_image(w, h, |x, y| shuffled[y * w + x]);
            prop_assert_eq!(discrete_entropy(&img2), e);
        }

        #[test]
        fn naturalness_flip_invariant((w, h, levels) in levels_strategy()) {
            let img = gray_image(w, h, |x, y| levels[y * w + x]);
            let n = statistical_naturalness(&img).unwrap();
            prop_assert!((0.0..=1.0).contains(&n));
            let nh = statistical_naturalness(&img.flip_horizontal()).unwrap();
            let nv = statistical_naturalness(&img.flip_vertical()).unwrap();
            prop_assert!((n - nh).abs() <= 1e-9);
            prop_assert!((n - nv).abs() <= 1e-9);
        }
    }
}
