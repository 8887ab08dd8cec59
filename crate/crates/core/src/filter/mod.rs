//! Convolution kernels and Gaussian blur.
//!
//! Kernels are sampled from the isotropic 2D Gaussian
//! `G(x, y) = exp(-(x² + y²) / 2σ²) / (2πσ²)` on integer offsets within
//! `[-h, h]` where `h = ⌈3σ⌉`, then renormalized so the truncated weights sum
//! to one. Blur radius and σ are the same number.
//!
//! Every pixel read outside the image is clamped to the nearest edge pixel,
//! and accumulations run in `f64` with a single final rounding
//! (half away from zero) and clamp to `0..=255`.

mod kernel;

pub use self::kernel::Kernel;

use thiserror::Error;

use crate::raster::ImageGray;

/// Radii below this are treated as "no blur".
pub const MIN_EFFECTIVE_RADIUS: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("sigma must be positive and finite, got {0}")]
    NonPositiveSigma(f64),
    #[error("blur radius must be non-negative and finite, got {0}")]
    NegativeRadius(f64),
    #[error("kernel size must be odd and positive, got {0}")]
    EvenKernelSize(usize),
    #[error("kernel of size {size} needs {expected} weights, got {actual}")]
    KernelShape {
        size: usize,
        expected: usize,
        actual: usize,
    },
}

/// How reads outside the image are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderPolicy {
    /// Replicate the nearest edge pixel.
    #[default]
    Clamp,
}

impl BorderPolicy {
    #[inline]
    fn resolve(self, coord: isize, len: usize) -> usize {
        match self {
            BorderPolicy::Clamp => coord.clamp(0, len as isize - 1) as usize,
        }
    }
}

fn support(sigma: f64) -> Result<usize, FilterError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(FilterError::NonPositiveSigma(sigma));
    }
    Ok((3.0 * sigma).ceil() as usize)
}

/// Normalized 1D Gaussian of length `2⌈3σ⌉ + 1`, indexed from offset `-h`.
pub fn gaussian_kernel_1d(sigma: f64) -> Result<Vec<f64>, FilterError> {
    let h = support(sigma)? as isize;
    let two_var = 2.0 * sigma * sigma;
    let raw: Vec<f64> = (-h..=h).map(|d| (-((d * d) as f64) / two_var).exp()).collect();
    let sum: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / sum).collect())
}

/// Normalized 2D Gaussian kernel sampled directly from the 2D density. The
/// separable factor is the matching [`gaussian_kernel_1d`].
pub fn gaussian_kernel_2d(sigma: f64) -> Result<Kernel, FilterError> {
    let h = support(sigma)? as isize;
    let size = (2 * h + 1) as usize;
    let two_var = 2.0 * sigma * sigma;
    let norm = 1.0 / (std::f64::consts::PI * two_var);
    let mut weights = Vec::with_capacity(size * size);
    for dy in -h..=h {
        for dx in -h..=h {
            weights.push(norm * (-((dx * dx + dy * dy) as f64) / two_var).exp());
        }
    }
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    Kernel::with_factor(size, weights, gaussian_kernel_1d(sigma)?)
}

/// Weighted sums before rounding, one per output pixel.
pub fn convolve_accumulate(img: &ImageGray, kernel: &Kernel, border: BorderPolicy) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let half = kernel.half() as isize;
    let src = img.pixels();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for dy in -half..=half {
                let row = border.resolve(y + dy, h) * w;
                for dx in -half..=half {
                    let col = border.resolve(x + dx, w);
                    acc += kernel.weight(dx, dy) * f64::from(src[row + col]);
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Full 2D convolution: every output pixel is the kernel-weighted sum of its
/// neighborhood.
pub fn convolve(img: &ImageGray, kernel: &Kernel, border: BorderPolicy) -> ImageGray {
    let pixels = convolve_accumulate(img, kernel, border)
        .into_iter()
        .map(quantize)
        .collect();
    ImageGray::from_pixels(img.width(), img.height(), pixels).expect("dimensions preserved")
}

/// Gaussian blur with `σ = radius` via two 1D passes. The horizontal pass is
/// kept in floating point; rounding happens once after the vertical pass.
pub fn gaussian_blur(img: &ImageGray, radius: f64) -> Result<ImageGray, FilterError> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(FilterError::NegativeRadius(radius));
    }
    if radius < MIN_EFFECTIVE_RADIUS {
        return Ok(img.clone());
    }
    let taps = gaussian_kernel_1d(radius)?;
    let half = (taps.len() / 2) as isize;
    let border = BorderPolicy::Clamp;
    let (w, h) = (img.width(), img.height());

    let mut rows = vec![0.0f64; w * h];
    for y in 0..h {
        let src = img.row(y);
        let dst = &mut rows[y * w..(y + 1) * w];
        for (x, out) in dst.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, tap) in taps.iter().enumerate() {
                let col = border.resolve(x as isize + i as isize - half, w);
                acc += tap * f64::from(src[col]);
            }
            *out = acc;
        }
    }

    let mut pixels = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, tap) in taps.iter().enumerate() {
                let row = border.resolve(y as isize + i as isize - half, h);
                acc += tap * rows[row * w + x];
            }
            pixels[y * w + x] = quantize(acc);
        }
    }
    Ok(ImageGray::from_pixels(w, h, pixels).expect("dimensions preserved"))
}

/// Sum of absolute differences over all horizontally and vertically adjacent
/// pixel pairs.
pub fn total_variation(img: &ImageGray) -> f64 {
    let (w, h) = (img.width(), img.height());
    let mut total: u64 = 0;
    for y in 0..h {
        let row = img.row(y);
        total += row.windows(2).map(|p| u64::from(p[0].abs_diff(p[1]))).sum::<u64>();
        if y + 1 < h {
            let below = img.row(y + 1);
            total += row
                .iter()
                .zip(below)
                .map(|(a, b)| u64::from(a.abs_diff(*b)))
                .sum::<u64>();
        }
    }
    debug_assert!(w > 0);
    total as f64
}

#[inline]
fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, px: &[u8]) -> ImageGray {
        ImageGray::from_pixels(w, h, px.to_vec()).unwrap()
    }

    #[test]
    fn sigma_one_has_seven_taps() {
        assert_eq!(gaussian_kernel_1d(1.0).unwrap().len(), 7);
        assert_eq!(gaussian_kernel_2d(1.0).unwrap().size(), 7);
    }

    #[test]
    fn rejects_bad_sigma() {
        for s in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(gaussian_kernel_1d(s).is_err());
            assert!(gaussian_kernel_2d(s).is_err());
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for sigma in [0.3, 0.5, 1.0, 1.7, 2.0, 3.5] {
            let k = gaussian_kernel_2d(sigma).unwrap();
            let sum: f64 = k.weights().iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "sigma {sigma}: {sum}");
            assert!(k.weights().iter().all(|&w| w >= 0.0));
            let g = gaussian_kernel_1d(sigma).unwrap();
            assert!((g.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn neighbor_ratio_follows_density() {
        let k = gaussian_kernel_2d(1.0).unwrap();
        let ratio = k.weight(1, 0) / k.weight(0, 0);
        assert!((ratio - (-0.5f64).exp()).abs() <= 1e-9);
        assert!((ratio - 0.606531).abs() <= 1e-6);
    }

    #[test]
    fn one_dimensional_is_symmetric() {
        let g = gaussian_kernel_1d(2.0).unwrap();
        let n = g.len();
        for i in 0..n {
            assert_eq!(g[i], g[n - 1 - i]);
        }
    }

    #[test]
    fn outer_product_matches_2d() {
        let g = gaussian_kernel_1d(1.0).unwrap();
        let k = gaussian_kernel_2d(1.0).unwrap();
        let h = k.half() as isize;
        for dy in -h..=h {
            for dx in -h..=h {
                let outer = g[(dx + h) as usize] * g[(dy + h) as usize];
                assert!((outer - k.weight(dx, dy)).abs() <= 1e-12);
            }
        }
        assert!(k.check_separable(1e-12));
    }

    #[test]
    fn identity_kernel_is_identity() {
        let src = img(3, 2, &[0, 9, 200, 255, 17, 3]);
        assert_eq!(convolve(&src, &Kernel::identity(), BorderPolicy::Clamp), src);
    }

    #[test]
    fn edge_detector_zeroes_constant_image() {
        let k = Kernel::from_rows(&[[-1.0, -1.0, -1.0], [-1.0, 8.0, -1.0], [-1.0, -1.0, -1.0]]).unwrap();
        let src = ImageGray::filled(6, 4, 173).unwrap();
        assert!(convolve(&src, &k, BorderPolicy::Clamp).pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn box_kernel_on_impulse() {
        let k = Kernel::new(3, vec![1.0 / 9.0; 9]).unwrap();
        let src = img(3, 3, &[0, 0, 0, 0, 255, 0, 0, 0, 0]);
        assert_eq!(convolve(&src, &k, BorderPolicy::Clamp).get(1, 1), 28);
    }

    #[test]
    fn negative_results_clamp_to_zero() {
        let k = Kernel::from_rows(&[[0.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let src = ImageGray::filled(2, 2, 50).unwrap();
        assert!(convolve(&src, &k, BorderPolicy::Clamp).pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn blur_radius_zero_is_copy() {
        let src = img(2, 2, &[0, 255, 255, 0]);
        assert_eq!(gaussian_blur(&src, 0.0).unwrap(), src);
        assert_eq!(gaussian_blur(&src, 0.049).unwrap(), src);
    }

    #[test]
    fn blur_rejects_negative_radius() {
        let src = ImageGray::filled(2, 2, 0).unwrap();
        assert_eq!(gaussian_blur(&src, -1.0), Err(FilterError::NegativeRadius(-1.0)));
        assert!(gaussian_blur(&src, f64::NAN).is_err());
    }

    #[test]
    fn blur_preserves_constants() {
        for v in [0u8, 1, 127, 254, 255] {
            let src = ImageGray::filled(9, 5, v).unwrap();
            for r in [0.5, 1.0, 2.0, 3.3] {
                assert_eq!(gaussian_blur(&src, r).unwrap(), src, "value {v} radius {r}");
            }
        }
    }

    #[test]
    fn blur_on_single_pixel_image() {
        let src = ImageGray::filled(1, 1, 42).unwrap();
        assert_eq!(gaussian_blur(&src, 2.0).unwrap(), src);
    }

    #[test]
    fn total_variation_examples() {
        assert_eq!(total_variation(&ImageGray::filled(4, 4, 9).unwrap()), 0.0);
        assert_eq!(total_variation(&img(2, 1, &[0, 255])), 255.0);
        let step = img(3, 3, &[0, 255, 255, 0, 255, 255, 0, 255, 255]);
        assert_eq!(total_variation(&step), 765.0);
    }
}
