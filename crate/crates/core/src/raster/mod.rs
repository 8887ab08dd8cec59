//! Grayscale rasters, the embedded bitmap font, and image serialization.
//!
//! Everything in this crate works on a single 8-bit channel where `0` is ink
//! and `255` is the white background.

mod font;
mod glyphs;
mod png;
mod pnm;

pub use self::font::{render_text, FontFace, GLYPH_HEIGHT, GLYPH_WIDTH};
pub use self::png::{read_png, write_png};
pub use self::pnm::{read_pgm, write_pgm};

use thiserror::Error;

/// Intensity of an untouched background pixel.
pub const BACKGROUND: u8 = 255;
/// Intensity of a glyph pixel.
pub const INK: u8 = 0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RasterError {
    #[error("text to render is empty")]
    EmptyText,
    #[error("no glyph for character {0:?}")]
    UnsupportedChar(char),
    #[error("glyph scale must be at least 1")]
    ZeroScale,
    #[error("image dimensions must be positive, got {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("expected {expected} pixels for the given dimensions, got {actual}")]
    PixelCountMismatch { expected: usize, actual: usize },
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("truncated pixel data: expected {expected} bytes, got {actual}")]
    TruncatedPixelData { expected: usize, actual: usize },
    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),
    #[error("PNG codec error: {0}")]
    Png(String),
}

/// Row-major 8-bit grayscale image.
#[derive(Clone, PartialEq, Eq)]
pub struct ImageGray {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl ImageGray {
    /// An image of the given size with every pixel set to `fill`.
    pub fn filled(width: usize, height: usize, fill: u8) -> Result<Self, RasterError> {
        check_dimensions(width, height)?;
        Ok(Self {
            width,
            height,
            pixels: vec![fill; width * height],
        })
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, RasterError> {
        check_dimensions(width, height)?;
        let expected = width * height;
        if pixels.len() != expected {
            return Err(RasterError::PixelCountMismatch {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// Pixel at `(x, y)`. Panics when out of bounds.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        self.pixels[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    /// Expands to RGBA with opaque alpha, the layout canvas APIs expect.
    pub fn to_rgba(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|&p| [p, p, p, 255]).collect()
    }
}

impl std::fmt::Debug for ImageGray {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImageGray")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

fn check_dimensions(width: usize, height: usize) -> Result<(), RasterError> {
    if width == 0 || height == 0 || width.checked_mul(height).is_none() {
        return Err(RasterError::InvalidDimensions { width, height });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dimensions() {
        assert_eq!(
            ImageGray::filled(0, 3, 0),
            Err(RasterError::InvalidDimensions { width: 0, height: 3 })
        );
    }

    #[test]
    fn rejects_pixel_count_mismatch() {
        assert_eq!(
            ImageGray::from_pixels(2, 2, vec![0; 3]),
            Err(RasterError::PixelCountMismatch { expected: 4, actual: 3 })
        );
    }

    #[test]
    fn row_major_access() {
        let img = ImageGray::from_pixels(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(img.get(2, 0), 3);
        assert_eq!(img.get(0, 1), 4);
        assert_eq!(img.row(1), &[4, 5, 6]);
    }
}
