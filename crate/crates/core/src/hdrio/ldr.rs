//! 8-bit PNG and binary PPM (P6) images. Byte `k` decodes to `k / 255`;
//! encoding rounds half up.

use std::io::Cursor;
use std::path::Path;

use thiserror::Error;

use crate::image::RgbImage;

#[derive(Debug, Error)]
pub enum LdrError {
    #[error("unrecognized image format (expected PNG or binary PPM)")]
    UnknownFormat,
    #[error("malformed PPM: {0}")]
    BadPpm(String),
    #[error("unsupported PPM maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("PNG error: {0}")]
    Png(String),
    #[error("image of {0}x{1} is too large")]
    TooLarge(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LdrFormat {
    #[default]
    Png,
    Ppm,
}

impl LdrFormat {
    /// Format implied by a file extension; anything other than `.ppm`
    /// is written as PNG.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ppm") => LdrFormat::Ppm,
            _ => LdrFormat::Png,
        }
    }

    pub fn detect(bytes: &[u8]) -> Option<Self> {
        const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";
        if bytes.starts_with(PNG_SIGNATURE) {
            Some(LdrFormat::Png)
        } else if bytes.starts_with(b"P6") {
            Some(LdrFormat::Ppm)
        } else {
            None
        }
    }
}

pub fn quantize(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

pub fn dequantize(b: u8) -> f64 {
    b as f64 / 255.0
}

pub fn to_rgb8(img: &RgbImage) -> Vec<u8> {
    img.pixels()
        .iter()
        .flat_map(|px| px.map(quantize))
        .collect()
}

pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> RgbImage {
    let pixels = bytes
        .chunks_exact(3)
        .map(|c| [dequantize(c[0]), dequantize(c[1]), dequantize(c[2])])
        .collect();
    RgbImage::from_raw(width, height, pixels)
}

pub fn read_ldr(bytes: &[u8]) -> Result<RgbImage, LdrError> {
    match LdrFormat::detect(bytes) {
        Some(LdrFormat::Png) => read_png(bytes),
        Some(LdrFormat::Ppm) => read_ppm(bytes),
        None => Err(LdrError::UnknownFormat),
    }
}

pub fn write_ldr(img: &RgbImage, format: LdrFormat) -> Result<Vec<u8>, LdrError> {
    match format {
        LdrFormat::Png => write_png(img),
        LdrFormat::Ppm => Ok(write_ppm(img)),
    }
}

fn read_png(bytes: &[u8]) -> Result<RgbImage, LdrError> {
    let err = |e: png::DecodingError| LdrError::Png(e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(err)?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(err)?;
    let (w, h) = (info.width as usize, info.height as usize);
    if w == 0 || h == 0 {
        return Err(LdrError::Png("empty image".into()));
    }
    let data = &buf[..info.buffer_size()];
    let rgb: Vec<u8> = match info.color_type {
        png::ColorType::Rgb => data.to_vec(),
        png::ColorType::Rgba => data
            .chunks_exact(4)
            .flat_map(|c| [c[0], c[1], c[2]])
            .collect(),
        png::ColorType::Grayscale => data.iter().flat_map(|&g| [g, g, g]).collect(),
        png::ColorType::GrayscaleAlpha => data.chunks_exact(2).flat_map(|c| [c[0]; 3]).collect(),
        png::ColorType::Indexed => {
            return Err(LdrError::Png("palette was not expanded".into()));
        }
    };
    Ok(from_rgb8(w, h, &rgb))
}

fn write_png(img: &RgbImage) -> Result<Vec<u8>, LdrError> {
    let (w, h) = img.dimensions();
    let (w32, h32) = match (u32::try_from(w), u32::try_from(h)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return Err(LdrError::TooLarge(w, h)),
    };
    let err = |e: png::EncodingError| LdrError::Png(e.to_string());
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w32, h32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(err)?;
        writer.write_image_data(&to_rgb8(img)).map_err(err)?;
    }
    Ok(out)
}

fn write_ppm(img: &RgbImage) -> Vec<u8> {
    let (w, h) = img.dimensions();
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.extend(to_rgb8(img));
    out
}

fn read_ppm(bytes: &[u8]) -> Result<RgbImage, LdrError> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(LdrError::BadPpm("header ends early".into())),
            }
        }
        if i == 0 && pos == 2 {
            return Err(LdrError::BadPpm(
                "magic must be followed by whitespace".into(),
            ));
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(LdrError::BadPpm("expected a number".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| LdrError::BadPpm("number out of range".into()))?;
    }
    let [w, h, maxval] = fields;
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(LdrError::BadPpm("missing whitespace after maxval".into()));
    }
    pos += 1;
    if maxval != 255 {
        return Err(LdrError::UnsupportedMaxval(maxval as u32));
    }
    if w == 0 || h == 0 {
        return Err(LdrError::BadPpm(format!("empty image {w}x{h}")));
    }
    let len = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(3))
        .ok_or(LdrError::TooLarge(w, h))?;
    let data = bytes
        .get(pos..pos + len)
        .ok_or_else(|| LdrError::BadPpm("pixel data truncated".into()))?;
    Ok(from_rgb8(w, h, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ppm_single_red_pixel() {
        let mut bytes = b"P6 1 1 255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0]);
        let img = read_ldr(&bytes).unwrap();
        assert_eq!(img.get(0, 0), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn ppm_comments_and_errors() {
        let mut bytes = b"P6\n# made by hand\n2 1\n# max\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 51, 102, 153, 204, 255]);
        let img = read_ldr(&bytes).unwrap();
        assert_eq!(img.get(1, 0), [0.6, 0.8, 1.0]);

        assert!(matches!(
            read_ldr(b"P6 1 1 65535\n\0\0\0\0\0\0"),
            Err(LdrError::UnsupportedMaxval(65535))
        ));
        assert!(matches!(
            read_ldr(b"P6 2 2 255\n\0\0\0"),
            Err(LdrError::BadPpm(_))
        ));
        assert!(matches!(
            read_ldr(b"P6 x 2 255\n"),
            Err(LdrError::BadPpm(_))
        ));
        assert!(matches!(
            read_ldr(b"P61 1 255\n\0\0\0"),
            Err(LdrError::BadPpm(_))
        ));
        assert!(matches!(read_ldr(b"GIF89a"), Err(LdrError::UnknownFormat)));
        assert!(matches!(
            read_ldr(b"\x89PNG\r\n\x1a\ngarbage"),
            Err(LdrError::Png(_))
        ));
    }

    #[test]
    fn half_rounds_up() {
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(127.49 / 255.0), 127);
    }

    #[test]
    fn format_from_path() {
        assert_eq!(LdrFormat::from_path(Path::new("a/b.PPM")), LdrFormat::Ppm);
        assert_eq!(LdrFormat::from_path(Path::new("a/b.png")), LdrFormat::Png);
        assert_eq!(LdrFormat::from_path(Path::new("noext")), LdrFormat::Png);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn eight_bit_round_trip(
            (w, h, data) in (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
                (Just(w), Just(h), prop::collection::vec(any::<u8>(), w * h * 3))
            }),
            ppm in any::<bool>(),
        ) {
            let img = from_rgb8(w, h, &data);
            let fmt = if ppm { LdrFormat::Ppm } else { LdrFormat::Png };
            let bytes = write_ldr(&img, fmt).unwrap();
            let back = read_ldr(&bytes).unwrap();
            prop_assert_eq!(to_rgb8(&back), data);
            prop_assert_eq!(back, img);
        }
    }
}
