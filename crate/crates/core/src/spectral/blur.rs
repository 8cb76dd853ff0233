//! Gaussian blur with half-sample symmetric (reflective) boundaries.
//!
//! Under this extension the blur matrix is diagonalized exactly by the
//! orthonormal DCT-II, `R K Rᵀ = Λ`.

use super::dct::Dct2Plan;
use super::ImageGrid;
use crate::error::{EbfError, Result};

/// Sampled 1-D Gaussian on `[-r, r]` with `r = ⌈4σ⌉`, normalized to sum 1.
/// Index `r` is the centre tap.
pub fn gaussian_kernel_1d(sigma_ker: f64) -> Result<Vec<f64>> {
    if !(sigma_ker.is_finite() && sigma_ker > 0.0) {
        return Err(EbfError::InvalidParameter(format!("sigma_ker must be > 0, got {sigma_ker}")));
    }
    let radius = (4.0 * sigma_ker).ceil() as isize;
    let mut taps: Vec<f64> =
        (-radius..=radius).map(|j| (-((j * j) as f64) / (2.0 * sigma_ker * sigma_ker)).exp()).collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(taps)
}

/// Maps any integer index into `[0, n)` by half-sample mirroring
/// (`… x1 x0 | x0 x1 … x_{n−1} | x_{n−1} …`).
fn reflect(idx: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = idx.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

fn convolve_rows(data: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let mut out = vec![0.0; h * w];
    for row in 0..h {
        let src = &data[row * w..(row + 1) * w];
        for c in 0..w {
            out[row * w + c] =
                taps.iter().enumerate().map(|(t, &k)| k * src[reflect(c as isize + t as isize - r, w)]).sum();
        }
    }
    out
}

fn convolve_cols(data: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let mut out = vec![0.0; h * w];
    for row in 0..h {
        for (t, &k) in taps.iter().enumerate() {
            let src_row = reflect(row as isize + t as isize - r, h);
            let src = &data[src_row * w..(src_row + 1) * w];
            let dst = &mut out[row * w..(row + 1) * w];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += k * s;
            }
        }
    }
    out
}

/// Spatial Gaussian blur `K z` with reflective boundaries.
pub fn blur_image(img: &ImageGrid, sigma_ker: f64) -> Result<ImageGrid> {
    let taps = gaussian_kernel_1d(sigma_ker)?;
    let (h, w) = img.shape();
    let rows = convolve_rows(img.pixels(), h, w, &taps);
    ImageGrid::new(h, w, convolve_cols(&rows, h, w, &taps))
}

/// DCT eigenvalues of the blur matrix: `DCT2(K e₁) / DCT2(e₁)` elementwise,
/// with e₁ the unit impulse at pixel (0, 0).
pub fn blur_eigenvalues(sigma_ker: f64, height: usize, width: usize) -> Result<Vec<f64>> {
    if height == 0 || width == 0 {
        return Err(EbfError::InvalidParameter("image dimensions must be positive".into()));
    }
    let mut impulse = ImageGrid::filled(height, width, 0.0);
    impulse.pixels_mut()[0] = 1.0;
    let blurred = blur_image(&impulse, sigma_ker)?;
    let plan = Dct2Plan::new(height, width);
    let num = plan.forward(&blurred)?;
    let den = plan.forward(&impulse)?;
    Ok(num.iter().zip(&den).map(|(a, b)| a / b).collect())
}
