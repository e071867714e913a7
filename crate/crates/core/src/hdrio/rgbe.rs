//! Radiance RGBE (`.hdr`) reading and writing.
//!
//! Only the standard `-Y <h> +X <w>` orientation is accepted. Scanlines
//! may be flat or use the per-component run-length encoding introduced by
//! the `2, 2, hi, lo` marker.

use thiserror::Error;

use super::RadianceMap;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RgbeError {
    #[error("missing `#?RADIANCE` or `#?RGBE` magic line")]
    BadMagic,
    #[error("malformed RGBE header: {0}")]
    BadHeader(String),
    #[error("unsupported pixel format `{0}`")]
    UnsupportedFormat(String),
    #[error("unsupported image orientation `{0}`")]
    UnsupportedOrientation(String),
    #[error("RGBE data truncated in scanline {row}")]
    Truncated { row: usize },
    #[error("corrupt RGBE scanline {row}: {reason}")]
    BadScanline { row: usize, reason: String },
}

/// Scanline layout used by [`write_rgbe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RgbeEncoding {
    Flat,
    /// Run-length encoded where the width allows it (8..=32767), flat otherwise.
    #[default]
    Rle,
}

/// `(mantissa + 0.5) / 256 * 2^(e - 128)`; a zero exponent is black.
pub fn decode_rgbe(bytes: [u8; 4]) -> [f64; 3] {
    let e = bytes[3];
    if e == 0 {
        return [0.0; 3];
    }
    let f = 2f64.powi(e as i32 - 128 - 8);
    [
        (bytes[0] as f64 + 0.5) * f,
        (bytes[1] as f64 + 0.5) * f,
        (bytes[2] as f64 + 0.5) * f,
    ]
}

/// Splits a positive normal `v` into `(m, e)` with `v = m * 2^e`, `0.5 <= m < 1`.
fn frexp(v: f64) -> (f64, i32) {
    let bits = v.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let e = raw_exp - 1022;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022u64 << 52));
    (m, e)
}

pub fn encode_rgbe(px: [f64; 3]) -> [u8; 4] {
    let v = px[0].max(px[1]).max(px[2]);
    // also catches NaN
    if v.is_nan() || v < 1e-32 {
        return [0; 4];
    }
    let (m, e) = frexp(v.min(f64::MAX));
    if e > 127 {
        return [255, 255, 255, 255];
    }
    if e < -127 {
        return [0; 4];
    }
    let scale = m * 256.0 / v;
    let q = |c: f64| (c * scale).clamp(0.0, 255.0) as u8;
    [q(px[0]), q(px[1]), q(px[2]), (e + 128) as u8]
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Option<&'a [u8]> {
        if self.pos >= self.data.len() {
            return None;
        }
        let rest = &self.data[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n')?;
        self.pos += end + 1;
        Some(&rest[..end])
    }

    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let out = self.data.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(out)
    }

    fn byte(&mut self) -> Option<u8> {
        let b = *self.data.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }
}

fn parse_resolution(line: &str) -> Result<(usize, usize), RgbeError> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let is_axis = |t: &str| matches!(t, "-Y" | "+Y" | "-X" | "+X");
    if tokens.len() != 4 || !is_axis(tokens[0]) || !is_axis(tokens[2]) {
        return Err(RgbeError::BadHeader(format!(
            "bad resolution line `{line}`"
        )));
    }
    let a: usize = tokens[1]
        .parse()
        .map_err(|_| RgbeError::BadHeader(format!("bad dimension `{}`", tokens[1])))?;
    let b: usize = tokens[3]
        .parse()
        .map_err(|_| RgbeError::BadHeader(format!("bad dimension `{}`", tokens[3])))?;
    if tokens[0] != "-Y" || tokens[2] != "+X" {
        return Err(RgbeError::UnsupportedOrientation(line.to_string()));
    }
    if a == 0 || b == 0 {
        return Err(RgbeError::BadHeader(format!("empty image `{line}`")));
    }
    Ok((b, a))
}

fn read_rle_component(
    cur: &mut Cursor<'_>,
    row: usize,
    width: usize,
    out: &mut [[u8; 4]],
    component: usize,
) -> Result<(), RgbeError> {
    let mut pos = 0;
    while pos < width {
        let count = cur.byte().ok_or(RgbeError::Truncated { row })? as usize;
        if count > 128 {
            let run = count - 128;
            if pos + run > width {
                return Err(RgbeError::BadScanline {
                    row,
                    reason: "run overflows scanline".into(),
                });
            }
            let v = cur.byte().ok_or(RgbeError::Truncated { row })?;
            out[pos..pos + run]
                .iter_mut()
                .for_each(|p| p[component] = v);
            pos += run;
        } else {
            if count == 0 || pos + count > width {
                return Err(RgbeError::BadScanline {
                    row,
                    reason: "invalid literal length".into(),
                });
            }
            let bytes = cur.take(count).ok_or(RgbeError::Truncated { row })?;
            for (p, &v) in out[pos..pos + count].iter_mut().zip(bytes) {
                p[component] = v;
            }
            pos += count;
        }
    }
    Ok(())
}

pub fn read_rgbe(bytes: &[u8]) -> Result<RadianceMap, RgbeError> {
    let mut cur = Cursor {
        data: bytes,
        pos: 0,
    };
    let magic = cur.line().ok_or(RgbeError::BadMagic)?;
    if !(magic.starts_with(b"#?RADIANCE") || magic.starts_with(b"#?RGBE")) {
        return Err(RgbeError::BadMagic);
    }
    loop {
        let line = cur
            .line()
            .ok_or_else(|| RgbeError::BadHeader("header is not terminated".into()))?;
        let line = String::from_utf8_lossy(line);
        let line = line.trim();
        if line.is_empty() {
            break;
        }
        if let Some(fmt) = line.strip_prefix("FORMAT=") {
            if fmt.trim() != "32-bit_rle_rgbe" {
                return Err(RgbeError::UnsupportedFormat(fmt.trim().to_string()));
            }
        }
    }
    let res = cur
        .line()
        .ok_or_else(|| RgbeError::BadHeader("missing resolution line".into()))?;
    let (width, height) = parse_resolution(String::from_utf8_lossy(res).trim())?;

    let mut pixels = Vec::with_capacity(width * height);
    let mut line = vec![[0u8; 4]; width];
    for row in 0..height {
        let head: [u8; 4] = cur
            .take(4)
            .ok_or(RgbeError::Truncated { row })?
            .try_into()
            .unwrap();
        let rle = (8..=0x7fff).contains(&width) && head[0] == 2 && head[1] == 2 && head[2] < 128;
        if rle {
            let len = ((head[2] as usize) << 8) | head[3] as usize;
            if len != width {
                return Err(RgbeError::BadScanline {
                    row,
                    reason: format!("encoded width {len} does not match {width}"),
                });
            }
            for c in 0..4 {
                read_rle_component(&mut cur, row, width, &mut line, c)?;
            }
        } else {
            line[0] = head;
            let rest = cur
                .take(4 * (width - 1))
                .ok_or(RgbeError::Truncated { row })?;
            for (p, chunk) in line[1..].iter_mut().zip(rest.chunks_exact(4)) {
                *p = chunk.try_into().unwrap();
            }
        }
        pixels.extend(line.iter().map(|&p| decode_rgbe(p)));
    }
    Ok(RadianceMap::from_raw(width, height, pixels))
}

fn write_rle_component(out: &mut Vec<u8>, data: &[u8]) {
    const MIN_RUN: usize = 4;
    let n = data.len();
    let mut cur = 0;
    while cur < n {
        // find the next run of at least MIN_RUN equal bytes
        let mut beg_run = cur;
        let mut run_count = 0;
        while run_count < MIN_RUN && beg_run < n {
            beg_run += run_count;
            run_count = 1;
            while beg_run + run_count < n
                && run_count < 127
                && data[beg_run] == data[beg_run + run_count]
            {
                run_count += 1;
            }
        }
        if run_count < MIN_RUN {
            beg_run = n;
        }
        // short runs just before a long one are cheaper as a run
        if beg_run - cur > 1 && beg_run - cur < MIN_RUN {
            let mut i = cur + 1;
            while i < beg_run && data[i] == data[cur] {
                i += 1;
            }
            if i == beg_run {
                out.push((128 + beg_run - cur) as u8);
                out.push(data[cur]);
                cur = beg_run;
            }
        }
        while cur < beg_run {
            let count = (beg_run - cur).min(128);
            out.push(count as u8);
            out.extend_from_slice(&data[cur..cur + count]);
            cur += count;
        }
        if run_count >= MIN_RUN {
            out.push((128 + run_count) as u8);
            out.push(data[beg_run]);
            cur += run_count;
        }
    }
}

pub fn write_rgbe(map: &RadianceMap, encoding: RgbeEncoding) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut out = Vec::with_capacity(w * h * 4 + 64);
    out.extend_from_slice(b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n");
    out.extend_from_slice(format!("-Y {h} +X {w}\n").as_bytes());
    let rle = encoding == RgbeEncoding::Rle && (8..=0x7fff).contains(&w);
    let mut comp = vec![0u8; w];
    for row in map.pixels().chunks_exact(w) {
        let encoded: Vec<[u8; 4]> = row.iter().map(|&px| encode_rgbe(px)).collect();
        if rle {
            out.extend_from_slice(&[2, 2, (w >> 8) as u8, (w & 0xff) as u8]);
            for c in 0..4 {
                for (dst, px) in comp.iter_mut().zip(&encoded) {
                    *dst = px[c];
                }
                write_rle_component(&mut out, &comp);
            }
        } else {
            for px in &encoded {
                out.extend_from_slice(px);
            }
        }
    }
    out
}
