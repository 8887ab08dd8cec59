//! Binary PGM (`P5`, maxval 255).

use super::{ImageGray, RasterError};

/// Encodes as `P5\n<width> <height>\n255\n` followed by the raw row-major pixels.
pub fn write_pgm(img: &ImageGray) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

/// Decodes a binary PGM with maxval 255. Header fields may be separated by
/// any ASCII whitespace and `#` comments, as netpbm allows.
pub fn read_pgm(bytes: &[u8]) -> Result<ImageGray, RasterError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(RasterError::MalformedHeader("missing P5 magic".into()));
    }
    let mut cursor = HeaderCursor { bytes, pos: 2 };
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(RasterError::MalformedHeader("no separator after maxval".into())),
    }
    if maxval != 255 {
        return Err(RasterError::UnsupportedMaxval(maxval));
    }
    let (width, height) = (width as usize, height as usize);
    if width == 0 || height == 0 {
        return Err(RasterError::InvalidDimensions { width, height });
    }
    let expected = width
        .checked_mul(height)
        .ok_or(RasterError::InvalidDimensions { width, height })?;
    let data = &bytes[cursor.pos..];
    if data.len() < expected {
        return Err(RasterError::TruncatedPixelData {
            expected,
            actual: data.len(),
        });
    }
    ImageGray::from_pixels(width, height, data[..expected].to_vec())
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_separators(&mut self) -> bool {
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        self.pos > start
    }

    fn number(&mut self, field: &str) -> Result<u32, RasterError> {
        if !self.skip_separators() {
            return Err(RasterError::MalformedHeader(format!(
                "expected whitespace before {field}"
            )));
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| RasterError::MalformedHeader(format!("invalid {field}")))
    }
}
