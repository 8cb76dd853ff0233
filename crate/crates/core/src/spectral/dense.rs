//! Dense reference implementation for small problems.
//!
//! Every quantity is computed from an explicit `S(γ) = σ⁻¹I + FΓFᵀ` through a
//! Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{blur_image, dct2_inverse, GammaState, ImageGrid};
use crate::error::{EbfError, Result};
use crate::hyperprior::Hyperprior;

/// `y = Fx + ε` with ε of precision σ.
#[derive(Debug, Clone)]
pub struct DenseProblem {
    f: DMatrix<f64>,
    y: DVector<f64>,
    sigma: f64,
}

/// Quantities derived from one factorization of `S(γ)`.
#[derive(Debug, Clone)]
pub struct DenseStats {
    /// `p̃ = FᵀS⁻¹y`.
    pub p_tilde: DVector<f64>,
    /// `Q̃ = FᵀS⁻¹F`.
    pub q_tilde: DMatrix<f64>,
    pub log_det: f64,
    /// `yᵀS⁻¹y`.
    pub quad: f64,
}

impl DenseProblem {
    pub fn new(f: DMatrix<f64>, y: DVector<f64>, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(EbfError::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if f.nrows() != y.len() {
            return Err(EbfError::ShapeMismatch { expected: f.nrows(), got: y.len() });
        }
        Ok(Self { f, y, sigma })
    }

    /// Explicit `F = K Rᵀ` for Gaussian deblurring. Column i is the blurred
    /// i-th DCT basis image.
    pub fn deblurring(y: &ImageGrid, sigma_ker: f64, sigma: f64) -> Result<Self> {
        let (h, w) = y.shape();
        let n = h * w;
        let mut f = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            let basis = dct2_inverse(&e, h, w)?;
            let col = blur_image(&basis, sigma_ker)?;
            f.set_column(i, &DVector::from_column_slice(col.pixels()));
            e[i] = 0.0;
        }
        Self::new(f, DVector::from_column_slice(y.pixels()), sigma)
    }

    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.f.ncols()
    }

    pub fn m(&self) -> usize {
        self.f.nrows()
    }

    fn check(&self, state: &GammaState) -> Result<()> {
        if state.len() == self.n() {
            Ok(())
        } else {
            Err(EbfError::ShapeMismatch { expected: self.n(), got: state.len() })
        }
    }

    /// `σ⁻¹I + FΓFᵀ − drop·f_i f_iᵀ` family; `drop` is used for leave-one-out.
    fn s_matrix(&self, gamma: &[f64]) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.m(), self.n(), |r, c| self.f[(r, c)] * gamma[c]);
        let mut s = &scaled * self.f.transpose();
        for d in 0..self.m() {
            s[(d, d)] += 1.0 / self.sigma;
        }
        s
    }

    fn factor(s: DMatrix<f64>) -> Cholesky<f64, Dyn> {
        Cholesky::new(s).expect("S is positive definite for sigma > 0 and gamma >= 0")
    }

    fn stats_from(&self, chol: &Cholesky<f64, Dyn>) -> DenseStats {
        let s_inv_y = chol.solve(&self.y);
        let s_inv_f = chol.solve(&self.f);
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        DenseStats {
            p_tilde: self.f.transpose() * &s_inv_y,
            q_tilde: self.f.transpose() * s_inv_f,
            log_det,
            quad: self.y.dot(&s_inv_y),
        }
    }

    pub fn stats(&self, state: &GammaState) -> Result<DenseStats> {
        self.check(state)?;
        Ok(self.stats_from(&Self::factor(self.s_matrix(state.gamma()))))
    }

    /// `(pᵢ, qᵢ) = (f_iᵀS₋ᵢ⁻¹y, f_iᵀS₋ᵢ⁻¹f_i)` where `S₋ᵢ` omits coordinate i.
    pub fn leave_one_out(&self, state: &GammaState, i: usize) -> Result<(f64, f64)> {
        self.check(state)?;
        if i >= self.n() {
            return Err(EbfError::InvalidParameter(format!("index {i} out of range")));
        }
        let mut g = state.gamma().to_vec();
        g[i] = 0.0;
        let chol = Self::factor(self.s_matrix(&g));
        let fi = self.f.column(i).into_owned();
        let s_inv_fi = chol.solve(&fi);
        Ok((s_inv_fi.dot(&self.y), s_inv_fi.dot(&fi)))
    }
}

/// `J(γ)`; +∞ when any H(γᵢ) is not finite.
pub fn dense_objective(dp: &DenseProblem, state: &GammaState, prior: &Hyperprior) -> Result<f64> {
    let st = dp.stats(state)?;
    let h: f64 = state.gamma().iter().map(|&g| prior.h_value(g)).sum();
    if !h.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * st.quad + 0.5 * st.log_det + h)
}

/// `∂J/∂γᵢ = ½q̃ᵢᵢ − ½p̃ᵢ² + H'(γᵢ)`. Requires every γᵢ > 0 unless H'(0+) is finite.
pub fn dense_gradient(dp: &DenseProblem, state: &GammaState, prior: &Hyperprior) -> Result<Vec<f64>> {
    let st = dp.stats(state)?;
    state
        .gamma()
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let hp = if g > 0.0 { prior.h_prime(g)? } else { prior.h_prime_at_zero() };
            Ok(0.5 * st.q_tilde[(i, i)] - 0.5 * st.p_tilde[i] * st.p_tilde[i] + hp)
        })
        .collect()
}

/// `∂²J/∂γᵢ∂γⱼ = −½q̃ᵢⱼ² + p̃ᵢq̃ᵢⱼp̃ⱼ + δᵢⱼH''(γᵢ)`.
pub fn dense_hessian(dp: &DenseProblem, state: &GammaState, prior: &Hyperprior) -> Result<DMatrix<f64>> {
    let st = dp.stats(state)?;
    let n = dp.n();
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let q = st.q_tilde[(i, j)];
            hess[(i, j)] = -0.5 * q * q + st.p_tilde[i] * q * st.p_tilde[j];
        }
        hess[(i, i)] += prior.h_second(state.gamma()[i])?;
    }
    Ok(hess)
}

/// Conditional posterior of x given γ: mean `ΓFᵀS⁻¹y`, covariance `Γ − ΓFᵀS⁻¹FΓ`.
pub fn posterior_moments_dense(dp: &DenseProblem, state: &GammaState) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let st = dp.stats(state)?;
    let g = state.gamma();
    let n = dp.n();
    let mean = DVector::from_fn(n, |i, _| g[i] * st.p_tilde[i]);
    let cov = DMatrix::from_fn(n, n, |i, j| {
        let base = if i == j { g[i] } else { 0.0 };
        base - g[i] * st.q_tilde[(i, j)] * g[j]
    });
    Ok((mean, cov))
}
