//! Orthonormal type-II 2-D DCT by separable basis-matrix products.

use std::f64::consts::PI;

use super::ImageGrid;
use crate::error::{EbfError, Result};

/// Row-major `n × n` orthonormal DCT-II matrix: `C[k][j] = s_k·cos(π(j+½)k/n)`.
pub fn dct_basis(n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    let s0 = (1.0 / n as f64).sqrt();
    let s = (2.0 / n as f64).sqrt();
    for k in 0..n {
        let scale = if k == 0 { s0 } else { s };
        for j in 0..n {
            c[k * n + j] = scale * (PI * (j as f64 + 0.5) * k as f64 / n as f64).cos();
        }
    }
    c
}

/// Cached basis matrices for one image shape.
#[derive(Debug, Clone)]
pub struct Dct2Plan {
    height: usize,
    width: usize,
    col_basis: Vec<f64>,
    row_basis: Vec<f64>,
}

impl Dct2Plan {
    pub fn new(height: usize, width: usize) -> Self {
        Self { height, width, col_basis: dct_basis(height), row_basis: dct_basis(width) }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Applies `C_h · Z · C_wᵀ` (forward) or `C_hᵀ · Z · C_w` (inverse).
    fn apply(&self, data: &[f64], inverse: bool) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        // Along rows.
        let mut tmp = vec![0.0; h * w];
        for r in 0..h {
            let row = &data[r * w..(r + 1) * w];
            for k in 0..w {
                let mut acc = 0.0;
                for (j, &v) in row.iter().enumerate() {
                    let b = if inverse { self.row_basis[j * w + k] } else { self.row_basis[k * w + j] };
                    acc += b * v;
                }
                tmp[r * w + k] = acc;
            }
        }
        // Along columns.
        let mut out = vec![0.0; h * w];
        for k in 0..h {
            for j in 0..h {
                let b = if inverse { self.col_basis[j * h + k] } else { self.col_basis[k * h + j] };
                if b == 0.0 {
                    continue;
                }
                let src = &tmp[j * w..(j + 1) * w];
                let dst = &mut out[k * w..(k + 1) * w];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += b * s;
                }
            }
        }
        out
    }

    pub fn forward(&self, img: &ImageGrid) -> Result<Vec<f64>> {
        if img.shape() != self.shape() {
            return Err(EbfError::ShapeMismatch { expected: self.height * self.width, got: img.len() });
        }
        Ok(self.apply(img.pixels(), false))
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Result<ImageGrid> {
        let n = self.height * self.width;
        if coeffs.len() != n {
            return Err(EbfError::ShapeMismatch { expected: n, got: coeffs.len() });
        }
        ImageGrid::new(self.height, self.width, self.apply(coeffs, true))
    }
}

/// Orthonormal 2-D DCT-II coefficients of `img`, row-major in (k_row, k_col).
pub fn dct2_forward(img: &ImageGrid) -> Vec<f64> {
    Dct2Plan::new(img.height(), img.width()).forward(img).expect("plan built for this shape")
}

/// Inverse of [`dct2_forward`] for a declared shape.
pub fn dct2_inverse(coeffs: &[f64], height: usize, width: usize) -> Result<ImageGrid> {
    if height == 0 || width == 0 {
        return Err(EbfError::InvalidParameter("image dimensions must be positive".into()));
    }
    Dct2Plan::new(height, width).inverse(coeffs)
}
