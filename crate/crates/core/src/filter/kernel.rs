use super::FilterError;

/// Square convolution mask of odd size `k`, stored row-major by `(dy, dx)`
/// over offsets `-h..=h` with `h = (k - 1) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
    factor: Option<Vec<f64>>,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self, FilterError> {
        if size.is_multiple_of(2) {
            return Err(FilterError::EvenKernelSize(size));
        }
        if weights.len() != size * size {
            return Err(FilterError::KernelShape {
                size,
                expected: size * size,
                actual: weights.len(),
            });
        }
        Ok(Self {
            size,
            weights,
            factor: None,
        })
    }

    /// Kernel with a known 1D factor `g` such that `weight(dx, dy) ≈ g[dx]·g[dy]`.
    pub(super) fn with_factor(size: usize, weights: Vec<f64>, factor: Vec<f64>) -> Result<Self, FilterError> {
        if factor.len() != size {
            return Err(FilterError::KernelShape {
                size,
                expected: size,
                actual: factor.len(),
            });
        }
        let mut kernel = Self::new(size, weights)?;
        kernel.factor = Some(factor);
        Ok(kernel)
    }

    pub fn from_rows<const N: usize>(rows: &[[f64; N]; N]) -> Result<Self, FilterError> {
        Self::new(N, rows.iter().flatten().copied().collect())
    }

    /// The 1×1 kernel with weight one.
    pub fn identity() -> Self {
        Self {
            size: 1,
            weights: vec![1.0],
            factor: Some(vec![1.0]),
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn half(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn separable_factor(&self) -> Option<&[f64]> {
        self.factor.as_deref()
    }

    /// Weight at offset `(dx, dy)`, both in `-h..=h`.
    #[inline]
    pub fn weight(&self, dx: isize, dy: isize) -> f64 {
        let h = self.half() as isize;
        debug_assert!(dx.abs() <= h && dy.abs() <= h);
        self.weights[((dy + h) as usize) * self.size + (dx + h) as usize]
    }

    /// Whether the stored factor reproduces every weight within `tol`.
    pub fn check_separable(&self, tol: f64) -> bool {
        let Some(g) = &self.factor else { return false };
        (0..self.size).all(|r| (0..self.size).all(|c| (g[r] * g[c] - self.weights[r * self.size + c]).abs() <= tol))
    }
}
