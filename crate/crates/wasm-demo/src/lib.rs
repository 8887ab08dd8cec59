//! WebAssembly bindings for the static browser demo in `www/`.
//!
//! Everything runs client-side: seeded rendering, Gaussian blur and the
//! answer metrics. The pure functions are plain Rust so they can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

use blurcap_core::evaluate;
use blurcap_core::filter::gaussian_kernel_2d;
use blurcap_core::raster::{render_text, ImageGray};
use blurcap_core::{gaussian_blur, Alphabet, ChallengeSpec};
use wasm_bindgen::prelude::*;

const SCALE: usize = 4;
const PADDING: usize = 8;
const MAX_RADIUS: f64 = 8.0;
const MAX_TEXT_CHARS: usize = 32;

/// A rendered grayscale image expanded to RGBA for a canvas.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Rendered {
    width: usize,
    height: usize,
    rgba: Vec<u8>,
    text: String,
}

#[wasm_bindgen]
impl Rendered {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    /// RGBA bytes, row-major, for `ImageData`.
    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// The rendered text.
    #[wasm_bindgen(getter)]
    pub fn text(&self) -> String {
        self.text.clone()
    }
}

impl Rendered {
    fn new(image: &ImageGray, text: String) -> Self {
        Self {
            width: image.width(),
            height: image.height(),
            rgba: image.to_rgba(),
            text,
        }
    }
}

fn check_radius(radius: f64) -> Result<(), String> {
    if !(0.0..=MAX_RADIUS).contains(&radius) {
        return Err(format!("radius must be between 0 and {MAX_RADIUS}"));
    }
    Ok(())
}

pub fn captcha(seed: u32, radius: f64, exclude_confusables: bool) -> Result<Rendered, String> {
    check_radius(radius)?;
    let spec = ChallengeSpec {
        seed: u64::from(seed),
        radius,
        scale: SCALE,
        padding: PADDING,
        alphabet: if exclude_confusables {
            Alphabet::without_confusables()
        } else {
            Alphabet::alphanumeric()
        },
    };
    let (truth, image) = spec.render().map_err(|e| e.to_string())?;
    Ok(Rendered::new(&image, truth))
}

pub fn blurred_text(text: &str, radius: f64) -> Result<Rendered, String> {
    check_radius(radius)?;
    if text.chars().count() > MAX_TEXT_CHARS {
        return Err(format!("at most {MAX_TEXT_CHARS} characters"));
    }
    let sharp = render_text(text, SCALE, PADDING).map_err(|e| e.to_string())?;
    let image = gaussian_blur(&sharp, radius).map_err(|e| e.to_string())?;
    Ok(Rendered::new(&image, text.to_owned()))
}

pub fn kernel_weights(sigma: f64) -> Result<Vec<f64>, String> {
    check_radius(sigma)?;
    gaussian_kernel_2d(sigma)
        .map(|k| k.weights().to_vec())
        .map_err(|e| e.to_string())
}

/// Seeded two-word CAPTCHA. `text` on the result holds the answer.
#[wasm_bindgen]
pub fn render_captcha(seed: u32, radius: f64, exclude_confusables: bool) -> Result<Rendered, JsError> {
    captcha(seed, radius, exclude_confusables).map_err(|e| JsError::new(&e))
}

/// Any alphanumeric text, rendered and blurred.
#[wasm_bindgen]
pub fn blur_text(text: &str, radius: f64) -> Result<Rendered, JsError> {
    blurred_text(text, radius).map_err(|e| JsError::new(&e))
}

/// Square Gaussian kernel weights, row-major; side length is the square root
/// of the length.
#[wasm_bindgen]
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>, JsError> {
    kernel_weights(sigma).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn similarity(truth: &str, response: &str) -> f64 {
    evaluate::char_similarity(truth, response)
}

#[wasm_bindgen]
pub fn exact_match(truth: &str, response: &str) -> bool {
    evaluate::exact_match(truth, response)
}
