use std::collections::BTreeMap;

use super::glyphs::GLYPHS;
use super::{ImageGray, RasterError, BACKGROUND, INK};

pub const GLYPH_WIDTH: usize = 8;
pub const GLYPH_HEIGHT: usize = 8;

/// Fixed-cell 8x8 bitmap font.
#[derive(Debug, Clone)]
pub struct FontFace {
    glyphs: BTreeMap<char, [u8; GLYPH_HEIGHT]>,
}

impl FontFace {
    /// The built-in face covering `0-9`, `A-Z` and `a-z`.
    pub fn embedded() -> Self {
        Self {
            glyphs: GLYPHS.iter().copied().collect(),
        }
    }

    pub fn has_glyph(&self, c: char) -> bool {
        self.glyphs.contains_key(&c)
    }

    /// Whether the pixel at column `x`, row `y` of glyph `c` is ink.
    pub fn is_ink(&self, c: char, x: usize, y: usize) -> Option<bool> {
        let rows = self.glyphs.get(&c)?;
        Some(rows[y] >> x & 1 == 1)
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.glyphs.keys().copied()
    }

    /// Renders `text` with every glyph cell scaled by `scale` and a uniform
    /// `padding` border. Spaces occupy a blank cell.
    pub fn render(&self, text: &str, scale: usize, padding: usize) -> Result<ImageGray, RasterError> {
        if text.is_empty() {
            return Err(RasterError::EmptyText);
        }
        if scale == 0 {
            return Err(RasterError::ZeroScale);
        }
        let cells: Vec<Option<&[u8; GLYPH_HEIGHT]>> = text
            .chars()
            .map(|c| match c {
                ' ' => Ok(None),
                c => self.glyphs.get(&c).map(Some).ok_or(RasterError::UnsupportedChar(c)),
            })
            .collect::<Result<_, _>>()?;

        let cell_w = GLYPH_WIDTH * scale;
        let cell_h = GLYPH_HEIGHT * scale;
        let width = cells.len() * cell_w + 2 * padding;
        let height = cell_h + 2 * padding;
        let mut img = ImageGray::filled(width, height, BACKGROUND)?;

        for (i, rows) in cells.iter().enumerate() {
            let Some(rows) = rows else { continue };
            let left = padding + i * cell_w;
            for (gy, bits) in rows.iter().enumerate() {
                for gx in 0..GLYPH_WIDTH {
                    if bits >> gx & 1 == 0 {
                        continue;
                    }
                    for sy in 0..scale {
                        let y = padding + gy * scale + sy;
                        let start = y * width + left + gx * scale;
                        img.pixels[start..start + scale].fill(INK);
                    }
                }
            }
        }
        Ok(img)
    }
}

impl Default for FontFace {
    fn default() -> Self {
        Self::embedded()
    }
}

/// Renders `text` with the embedded font.
pub fn render_text(text: &str, scale: usize, padding: usize) -> Result<ImageGray, RasterError> {
    FontFace::embedded().render(text, scale, padding)
}
