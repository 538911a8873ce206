//! Image files: portable graymap (ASCII `P2` and binary `P5`) and a raw
//! float format that keeps observed values unclamped.
//!
//! Float layout: the 8-byte magic `MDSEGF64`, width and height as `u64`
//! little-endian, then `width * height` `f64` little-endian values in
//! row-major order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{Image, Mask};

pub const FLOAT_MAGIC: &[u8; 8] = b"MDSEGF64";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    PgmAscii,
    PgmBinary,
    Float,
}

impl ImageFormat {
    /// `.ascii.pgm` is ASCII graymap, `.pgm` binary graymap, `.f64` float.
    pub fn from_path(path: &Path) -> Result<Self> {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_ascii_lowercase();
        if name.ends_with(".ascii.pgm") {
            Ok(ImageFormat::PgmAscii)
        } else if name.ends_with(".pgm") {
            Ok(ImageFormat::PgmBinary)
        } else if name.ends_with(".f64") {
            Ok(ImageFormat::Float)
        } else {
            Err(Error::InvalidConfig(format!(
                "{}: cannot infer image format (use .pgm, .ascii.pgm or .f64)",
                path.display()
            )))
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn header_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn dims_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::DimensionMismatch {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Reads any supported format; the format is detected from the contents.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_image(&bytes, path)
}

/// Decodes file contents; `path` is used only in error messages.
pub fn decode_image(bytes: &[u8], path: &Path) -> Result<Image> {
    if bytes.starts_with(FLOAT_MAGIC) {
        decode_float(bytes, path)
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes, path)
    } else {
        Err(header_err(path, "unrecognised magic number"))
    }
}

pub fn write_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_image(img, ImageFormat::from_path(path)?);
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn encode_image(img: &Image, format: ImageFormat) -> Vec<u8> {
    match format {
        ImageFormat::Float => encode_float(img),
        ImageFormat::PgmAscii | ImageFormat::PgmBinary => encode_pgm(img, format),
    }
}

/// Reads a mask: pixels with value at least one half are foreground.
pub fn read_mask(path: impl AsRef<Path>) -> Result<Mask> {
    Ok(Mask::from_image(&read_image(path)?, 0.5))
}

pub fn write_mask(path: impl AsRef<Path>, mask: &Mask) -> Result<()> {
    write_image(path, &mask.to_image())
}

fn encode_float(img: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 8 * img.len());
    out.extend_from_slice(FLOAT_MAGIC);
    out.extend_from_slice(&(img.width() as u64).to_le_bytes());
    out.extend_from_slice(&(img.height() as u64).to_le_bytes());
    for v in img.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn decode_float(bytes: &[u8], path: &Path) -> Result<Image> {
    if bytes.len() < 24 {
        return Err(header_err(path, "truncated float header"));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (width, height) = (word(8), word(16));
    if width == 0 || height == 0 {
        return Err(header_err(path, format!("zero dimension {width}x{height}")));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(24))
        .ok_or_else(|| header_err(path, "dimensions overflow"))?;
    if bytes.len() as u64 != expected {
        return Err(dims_err(
            path,
            format!(
                "{width}x{height} needs {expected} bytes, file has {}",
                bytes.len()
            ),
        ));
    }
    let values = bytes[24..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Image::new(width as usize, height as usize, values)
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn encode_pgm(img: &Image, format: ImageFormat) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    match format {
        ImageFormat::PgmBinary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend(img.values().iter().map(|&v| quantize(v)));
            out
        }
        _ => {
            let mut text = format!("P2\n{w} {h}\n255\n");
            for row in img.values().chunks(w) {
                let line: Vec<String> = row.iter().map(|&v| quantize(v).to_string()).collect();
                text.push_str(&line.join(" "));
                text.push('\n');
            }
            text.into_bytes()
        }
    }
}

/// Whitespace-separated header tokens with `#` comments.
struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str, path: &Path) -> Result<u64> {
        let tok = self
            .token()
            .ok_or_else(|| header_err(path, format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                header_err(
                    path,
                    format!("{what} `{}` is not a number", String::from_utf8_lossy(tok)),
                )
            })
    }
}

fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Image> {
    let binary = bytes.starts_with(b"P5");
    let mut cur = HeaderCursor { bytes, pos: 2 };
    if cur.pos < bytes.len() && !bytes[cur.pos].is_ascii_whitespace() && bytes[cur.pos] != b'#' {
        return Err(header_err(path, "unrecognised magic number"));
    }
    let width = cur.number("width", path)?;
    let height = cur.number("height", path)?;
    let maxval = cur.number("maxval", path)?;
    if width == 0 || height == 0 {
        return Err(header_err(path, format!("zero dimension {width}x{height}")));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(header_err(
            path,
            format!("maxval {maxval} outside 1..=65535"),
        ));
    }
    let n = width
        .checked_mul(height)
        .filter(|&n| n <= usize::MAX as u64 / 2)
        .ok_or_else(|| header_err(path, "dimensions overflow"))? as usize;
    let scale = 1.0 / maxval as f64;

    let samples: Vec<u64> = if binary {
        // exactly one whitespace byte separates maxval from the raster
        let start = cur.pos + 1;
        let raster = bytes.get(start..).unwrap_or_default();
        let depth = if maxval > 255 { 2 } else { 1 };
        if raster.len() != n * depth {
            return Err(dims_err(
                path,
                format!(
                    "{width}x{height} at {depth} byte(s) per sample needs {} bytes, raster has {}",
                    n * depth,
                    raster.len()
                ),
            ));
        }
        if depth == 1 {
            raster.iter().map(|&b| b as u64).collect()
        } else {
            raster
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as u64)
                .collect()
        }
    } else {
        let mut out = Vec::with_capacity(n);
        while let Some(tok) = cur.token() {
            let v = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| {
                    dims_err(
                        path,
                        format!("sample `{}` is not a number", String::from_utf8_lossy(tok)),
                    )
                })?;
            out.push(v);
        }
        if out.len() != n {
            return Err(dims_err(
                path,
                format!("{width}x{height} needs {n} samples, found {}", out.len()),
            ));
        }
        out
    };
    if let Some(bad) = samples.iter().find(|&&s| s > maxval) {
        return Err(dims_err(
            path,
            format!("sample {bad} exceeds maxval {maxval}"),
        ));
    }
    let values = samples.iter().map(|&s| s as f64 * scale).collect();
    Image::new(width as usize, height as usize, values)
}
