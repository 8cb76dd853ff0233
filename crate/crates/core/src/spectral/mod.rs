//! The deblurring forward model in DCT coordinates.
//!
//! With `F = K Rᵀ` and `R K Rᵀ = Λ`, every quantity that depends on
//! `S(γ) = σ⁻¹I + FΓFᵀ` is diagonal in the DCT basis and costs O(n).

pub mod blur;
pub mod dct;
pub mod dense;

use crate::error::{EbfError, Result};
use crate::hyperprior::Hyperprior;

pub use blur::{blur_eigenvalues, blur_image, gaussian_kernel_1d};
pub use dct::{dct2_forward, dct2_inverse, Dct2Plan};

/// A grayscale image, row-major, nominal intensity range [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl ImageGrid {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(EbfError::InvalidParameter("image dimensions must be positive".into()));
        }
        if pixels.len() != height * width {
            return Err(EbfError::ShapeMismatch { expected: height * width, got: pixels.len() });
        }
        Ok(Self { height, width, pixels })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self { height, width, pixels: vec![value; height * width] }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn norm(&self) -> f64 {
        self.pixels.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Blur eigenvalues Λ in the DCT basis together with the noise precision σ.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    lambda: Vec<f64>,
    sigma: f64,
    height: usize,
    width: usize,
}

impl SpectralOperator {
    pub fn new(lambda: Vec<f64>, sigma: f64, height: usize, width: usize) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(EbfError::InvalidParameter(format!(
                "noise precision sigma must be positive and finite, got {sigma}"
            )));
        }
        if height == 0 || width == 0 {
            return Err(EbfError::InvalidParameter("image dimensions must be positive".into()));
        }
        if lambda.len() != height * width {
            return Err(EbfError::ShapeMismatch { expected: height * width, got: lambda.len() });
        }
        if lambda.iter().any(|l| !l.is_finite()) {
            return Err(EbfError::InvalidParameter("eigenvalues must be finite".into()));
        }
        Ok(Self { lambda, sigma, height, width })
    }

    /// Gaussian blur of width `sigma_ker` under reflective boundaries.
    pub fn gaussian_blur(sigma_ker: f64, sigma: f64, height: usize, width: usize) -> Result<Self> {
        Self::new(blur_eigenvalues(sigma_ker, height, width)?, sigma, height, width)
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Number of unknowns n (equal to the number of measurements m).
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got == self.len() {
            Ok(())
        } else {
            Err(EbfError::ShapeMismatch { expected: self.len(), got })
        }
    }
}

/// Hyperparameters γ ≥ 0 together with their support.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaState {
    gamma: Vec<f64>,
    active: Vec<usize>,
}

impl GammaState {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if let Some((i, g)) = gamma.iter().enumerate().find(|(_, g)| !(g.is_finite() && **g >= 0.0)) {
            return Err(EbfError::InvalidParameter(format!("gamma[{i}] = {g} is not a finite nonnegative number")));
        }
        let active = gamma.iter().enumerate().filter(|(_, g)| **g > 0.0).map(|(i, _)| i).collect();
        Ok(Self { gamma, active })
    }

    pub fn zeros(n: usize) -> Self {
        Self { gamma: vec![0.0; n], active: Vec::new() }
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Indices with γᵢ > 0, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.gamma
    }
}

/// Right-hand side `Fᵀy = Λ ⊙ DCT2(y)`.
pub fn ft_y(op: &SpectralOperator, y: &ImageGrid) -> Result<Vec<f64>> {
    if y.shape() != op.shape() {
        return Err(EbfError::ShapeMismatch { expected: op.len(), got: y.len() });
    }
    Ok(op.lambda.iter().zip(dct2_forward(y)).map(|(l, c)| l * c).collect())
}

/// Diagonal of `FᵀS⁻¹F`: σλᵢ² − σ²λᵢ⁴γᵢ/(1+σλᵢ²γᵢ), evaluated as σλᵢ²/(1+σλᵢ²γᵢ).
pub fn q_diag(op: &SpectralOperator, state: &GammaState) -> Result<Vec<f64>> {
    op.check_len(state.len())?;
    let s = op.sigma;
    Ok(op
        .lambda
        .iter()
        .zip(state.gamma())
        .map(|(l, g)| {
            let sl2 = s * l * l;
            sl2 / (1.0 + sl2 * g)
        })
        .collect())
}

/// Conditional posterior mean `x = Γ Fᵀ S⁻¹ y`, elementwise γᵢσ(Fᵀy)ᵢ/(1+σλᵢ²γᵢ).
pub fn x_update(op: &SpectralOperator, state: &GammaState, fty: &[f64]) -> Result<Vec<f64>> {
    op.check_len(state.len())?;
    op.check_len(fty.len())?;
    let s = op.sigma;
    Ok(op
        .lambda
        .iter()
        .zip(state.gamma())
        .zip(fty)
        .map(|((l, &g), b)| if g == 0.0 { 0.0 } else { g * s * b / (1.0 + s * l * l * g) })
        .collect())
}

/// `log det S(γ) = −m·log σ + Σ log(1+σλᵢ²γᵢ)`.
pub fn log_det_s(op: &SpectralOperator, state: &GammaState) -> Result<f64> {
    op.check_len(state.len())?;
    let s = op.sigma;
    let sum: f64 = op.lambda.iter().zip(state.gamma()).map(|(l, g)| (s * l * l * g).ln_1p()).sum();
    Ok(-(op.len() as f64) * s.ln() + sum)
}

/// `yᵀ S⁻¹ y`.
pub fn quad_form(op: &SpectralOperator, state: &GammaState, y: &ImageGrid) -> Result<f64> {
    SpectralModel::new(op.clone(), y)?.quad_form(state)
}

/// `J(γ) = ½yᵀS⁻¹y + ½log det S + Σ H(γᵢ)`; +∞ if any H(γᵢ) is not finite.
pub fn objective_j(op: &SpectralOperator, state: &GammaState, y: &ImageGrid, prior: &Hyperprior) -> Result<f64> {
    SpectralModel::new(op.clone(), y)?.objective(state, prior)
}

/// The forward operator bound to one observation, with the data transforms
/// precomputed.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    op: SpectralOperator,
    /// DCT2(y).
    y_hat: Vec<f64>,
    /// Fᵀy = Λ ⊙ DCT2(y).
    fty: Vec<f64>,
}

impl SpectralModel {
    pub fn new(op: SpectralOperator, y: &ImageGrid) -> Result<Self> {
        if y.shape() != op.shape() {
            return Err(EbfError::ShapeMismatch { expected: op.len(), got: y.len() });
        }
        let y_hat = dct2_forward(y);
        Ok(Self::from_coefficients(op, y_hat))
    }

    /// Builds the model from `DCT2(y)` directly.
    pub fn from_coefficients(op: SpectralOperator, y_hat: Vec<f64>) -> Self {
        let fty = op.lambda.iter().zip(&y_hat).map(|(l, c)| l * c).collect();
        Self { op, y_hat, fty }
    }

    pub fn operator(&self) -> &SpectralOperator {
        &self.op
    }

    pub fn y_hat(&self) -> &[f64] {
        &self.y_hat
    }

    pub fn fty(&self) -> &[f64] {
        &self.fty
    }

    pub fn len(&self) -> usize {
        self.op.len()
    }

    pub fn is_empty(&self) -> bool {
        self.op.is_empty()
    }

    pub fn q_diag(&self, state: &GammaState) -> Result<Vec<f64>> {
        q_diag(&self.op, state)
    }

    pub fn x_update(&self, state: &GammaState) -> Result<Vec<f64>> {
        x_update(&self.op, state, &self.fty)
    }

    /// `p̃ = FᵀS⁻¹y`, elementwise σ(Fᵀy)ᵢ/(1+σλᵢ²γᵢ).
    pub fn p_tilde(&self, state: &GammaState) -> Result<Vec<f64>> {
        self.op.check_len(state.len())?;
        let s = self.op.sigma;
        Ok(self
            .op
            .lambda
            .iter()
            .zip(state.gamma())
            .zip(&self.fty)
            .map(|((l, g), b)| s * b / (1.0 + s * l * l * g))
            .collect())
    }

    pub fn log_det(&self, state: &GammaState) -> Result<f64> {
        log_det_s(&self.op, state)
    }

    /// `yᵀS⁻¹y = σ‖y‖² − σ²Σγᵢ(Fᵀy)ᵢ²/(1+σλᵢ²γᵢ)`, summed in the
    /// cancellation-free form Σ σŷᵢ²/(1+σλᵢ²γᵢ).
    pub fn quad_form(&self, state: &GammaState) -> Result<f64> {
        self.op.check_len(state.len())?;
        let s = self.op.sigma;
        Ok(self
            .op
            .lambda
            .iter()
            .zip(state.gamma())
            .zip(&self.y_hat)
            .map(|((l, g), c)| s * c * c / (1.0 + s * l * l * g))
            .sum())
    }

    fn data_terms(&self, state: &GammaState) -> Result<f64> {
        Ok(0.5 * self.quad_form(state)? + 0.5 * self.log_det(state)?)
    }

    /// `J(γ)` with H summed over every coordinate; +∞ when any H(γᵢ) is not finite.
    pub fn objective(&self, state: &GammaState, prior: &Hyperprior) -> Result<f64> {
        let h: f64 = state.gamma().iter().map(|&g| prior.h_value(g)).sum();
        if !h.is_finite() {
            return Ok(f64::INFINITY);
        }
        Ok(self.data_terms(state)? + h)
    }

    /// `J(γ)` with H summed over the active set only, i.e. with the zero
    /// coordinates removed from the problem. Equal to [`Self::objective`] for
    /// priors with H(0) = 0.
    pub fn reduced_objective(&self, state: &GammaState, prior: &Hyperprior) -> Result<f64> {
        let h: f64 = state.active().iter().map(|&i| prior.h_value(state.gamma()[i])).sum();
        Ok(self.data_terms(state)? + h)
    }

    /// Gradient of J on the active set: ½q̃ᵢ − ½p̃ᵢ² + H'(γᵢ). Inactive entries are 0.
    pub fn active_gradient(&self, state: &GammaState, prior: &Hyperprior) -> Result<Vec<f64>> {
        let q = self.q_diag(state)?;
        let p = self.p_tilde(state)?;
        let mut g = vec![0.0; self.len()];
        for &i in state.active() {
            g[i] = 0.5 * q[i] - 0.5 * p[i] * p[i] + prior.h_prime_unchecked(state.gamma()[i]);
        }
        Ok(g)
    }
}
