use std::io::Cursor;

use png::{BitDepth, ColorType, Transformations};

use super::{ImageGray, RasterError};

/// Encodes as an 8-bit grayscale, non-interlaced PNG.
pub fn write_png(img: &ImageGray) -> Vec<u8> {
    let mut out = Vec::new();
    encode(img, &mut out).expect("encoding a valid image into memory cannot fail");
    out
}

fn encode(img: &ImageGray, out: &mut Vec<u8>) -> Result<(), png::EncodingError> {
    let mut encoder = png::Encoder::new(out, img.width() as u32, img.height() as u32);
    encoder.set_color(ColorType::Grayscale);
    encoder.set_depth(BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(img.pixels())?;
    writer.finish()
}

/// Decodes any PNG into grayscale. Color inputs are reduced with Rec. 601
/// luma weights; alpha is dropped.
pub fn read_png(bytes: &[u8]) -> Result<ImageGray, RasterError> {
    let png_err = |e: png::DecodingError| RasterError::Png(e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(Transformations::EXPAND | Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| RasterError::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    buf.truncate(info.buffer_size());

    let channels = match info.color_type {
        ColorType::Grayscale => 1,
        ColorType::GrayscaleAlpha => 2,
        ColorType::Rgb => 3,
        ColorType::Rgba => 4,
        ColorType::Indexed => return Err(RasterError::Png("palette was not expanded".into())),
    };
    let (width, height) = (info.width as usize, info.height as usize);
    let pixels = buf
        .chunks_exact(info.line_size)
        .flat_map(|line| line[..width * channels].chunks_exact(channels))
        .map(|px| match px {
            [g] | [g, _] => *g,
            [r, g, b, ..] => {
                let luma = 0.299 * f64::from(*r) + 0.587 * f64::from(*g) + 0.114 * f64::from(*b);
                luma.round().clamp(0.0, 255.0) as u8
            }
            _ => unreachable!(),
        })
        .collect();
    ImageGray::from_pixels(width, height, pixels)
}
