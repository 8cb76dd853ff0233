//! Generalized-Gamma hyperpriors π(γ) ∝ exp(−H(γ)) with
//! H(γ) = −(ζα−1)·log γ + (γ/β)^ζ.
//!
//! Values at γ = 0 and the one-sided slope H'(0+) are extended reals and use
//! the floating-point infinities directly.

use std::fmt;
use std::str::FromStr;

use crate::error::{EbfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PriorKind {
    None,
    Gamma,
    InverseGamma,
    HalfGaussian,
    HalfLaplace,
    HalfGeneralizedGaussian,
}

impl PriorKind {
    pub fn name(self) -> &'static str {
        match self {
            PriorKind::None => "none",
            PriorKind::Gamma => "gamma",
            PriorKind::InverseGamma => "inv-gamma",
            PriorKind::HalfGaussian => "half-gaussian",
            PriorKind::HalfLaplace => "half-laplace",
            PriorKind::HalfGeneralizedGaussian => "half-gg",
        }
    }
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PriorKind {
    type Err = EbfError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => PriorKind::None,
            "gamma" => PriorKind::Gamma,
            "inv-gamma" => PriorKind::InverseGamma,
            "half-gaussian" => PriorKind::HalfGaussian,
            "half-laplace" => PriorKind::HalfLaplace,
            "half-gg" => PriorKind::HalfGeneralizedGaussian,
            other => return Err(EbfError::InvalidParameter(format!(
                "unknown prior '{other}' (expected none | gamma | inv-gamma | half-gaussian | half-laplace | half-gg)"
            ))),
        })
    }
}

/// Curvature of H on γ > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    Convex,
    Concave,
    Neither,
}

/// A validated member of the generalized-Gamma family, or the flat prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperprior {
    kind: PriorKind,
    alpha: f64,
    beta: f64,
    zeta: f64,
    /// 1 − ζα, stored exactly so the ζα = 1 members carry no log term.
    log_coef: f64,
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(EbfError::InvalidParameter(format!("{name} must be a positive finite number, got {v}")))
    }
}

impl Hyperprior {
    /// No hyperprior: H ≡ 0 (plain sparse Bayesian learning).
    pub fn none() -> Self {
        Self { kind: PriorKind::None, alpha: 1.0, beta: 1.0, zeta: 1.0, log_coef: 0.0 }
    }

    /// Gamma(α, β). α = 1 is normalized to the half-Laplace prior.
    pub fn gamma(alpha: f64, beta: f64) -> Result<Self> {
        require_positive("alpha", alpha)?;
        require_positive("beta", beta)?;
        if alpha == 1.0 {
            return Self::half_laplace(beta);
        }
        Ok(Self { kind: PriorKind::Gamma, alpha, beta, zeta: 1.0, log_coef: 1.0 - alpha })
    }

    /// Inverse Gamma(α, β): H(γ) = (α+1)·log γ + β/γ.
    pub fn inverse_gamma(alpha: f64, beta: f64) -> Result<Self> {
        require_positive("alpha", alpha)?;
        require_positive("beta", beta)?;
        Ok(Self { kind: PriorKind::InverseGamma, alpha, beta, zeta: -1.0, log_coef: 1.0 + alpha })
    }

    /// Half-Gaussian N⁺(0, θ²): H(γ) = γ²/(2θ²), stored as ζ = 2, α = ½, β = √2·θ.
    pub fn half_gaussian(theta: f64) -> Result<Self> {
        require_positive("theta", theta)?;
        Ok(Self {
            kind: PriorKind::HalfGaussian,
            alpha: 0.5,
            beta: std::f64::consts::SQRT_2 * theta,
            zeta: 2.0,
            log_coef: 0.0,
        })
    }

    /// Half-Laplace: H(γ) = γ/β.
    pub fn half_laplace(beta: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        Ok(Self { kind: PriorKind::HalfLaplace, alpha: 1.0, beta, zeta: 1.0, log_coef: 0.0 })
    }

    /// Half-generalized-Gaussian: H(γ) = (γ/β)^ζ with α = 1/ζ.
    ///
    /// ζ must lie in (0, 1); the boundary members ζ = 1 and ζ = 2 are
    /// normalized to the half-Laplace and half-Gaussian priors.
    pub fn half_generalized_gaussian(zeta: f64, beta: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        if zeta == 1.0 {
            return Self::half_laplace(beta);
        }
        if zeta == 2.0 {
            return Self::half_gaussian(beta / std::f64::consts::SQRT_2);
        }
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(EbfError::InvalidParameter(format!(
                "half-generalized-Gaussian needs 0 < zeta < 1 (or 1, 2), got {zeta}"
            )));
        }
        Ok(Self { kind: PriorKind::HalfGeneralizedGaussian, alpha: 1.0 / zeta, beta, zeta, log_coef: 0.0 })
    }

    /// Builds a prior from CLI-style parameters. Unused parameters are ignored;
    /// missing required ones are an error.
    pub fn from_parts(
        kind: PriorKind,
        alpha: Option<f64>,
        beta: Option<f64>,
        zeta: Option<f64>,
        theta: Option<f64>,
    ) -> Result<Self> {
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| EbfError::InvalidParameter(format!("prior '{kind}' requires --{name}")))
        };
        match kind {
            PriorKind::None => Ok(Self::none()),
            PriorKind::Gamma => Self::gamma(need("alpha", alpha)?, need("beta", beta)?),
            PriorKind::InverseGamma => Self::inverse_gamma(need("alpha", alpha)?, need("beta", beta)?),
            PriorKind::HalfGaussian => Self::half_gaussian(need("theta", theta)?),
            PriorKind::HalfLaplace => Self::half_laplace(need("beta", beta)?),
            PriorKind::HalfGeneralizedGaussian => {
                Self::half_generalized_gaussian(need("zeta", zeta)?, need("beta", beta)?)
            }
        }
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// θ of the half-Gaussian parameterization (β/√2).
    pub fn theta(&self) -> f64 {
        self.beta / std::f64::consts::SQRT_2
    }

    /// The coefficient 1 − ζα of the 1/γ term in H'.
    pub fn log_coef(&self) -> f64 {
        self.log_coef
    }

    pub fn is_none(&self) -> bool {
        self.kind == PriorKind::None
    }

    /// H(γ) for γ ≥ 0, including its limit at γ = 0.
    pub fn h_value(&self, gamma: f64) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        if gamma == 0.0 {
            return self.h_at_zero();
        }
        let log_term = if self.log_coef == 0.0 { 0.0 } else { self.log_coef * gamma.ln() };
        log_term + (gamma / self.beta).powf(self.zeta)
    }

    fn h_at_zero(&self) -> f64 {
        if self.zeta < 0.0 || self.log_coef < 0.0 {
            f64::INFINITY
        } else if self.log_coef > 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }

    /// H'(γ) for γ > 0.
    pub fn h_prime(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0) {
            return Err(EbfError::InvalidParameter(format!(
                "h_prime needs gamma > 0 (got {gamma}); use h_prime_at_zero"
            )));
        }
        Ok(self.h_prime_unchecked(gamma))
    }

    pub(crate) fn h_prime_unchecked(&self, gamma: f64) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        self.log_coef / gamma + self.zeta / self.beta * (gamma / self.beta).powf(self.zeta - 1.0)
    }

    /// lim_{γ→0+} H'(γ).
    pub fn h_prime_at_zero(&self) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        if self.zeta < 0.0 || self.log_coef < 0.0 {
            return f64::NEG_INFINITY;
        }
        if self.log_coef > 0.0 {
            return f64::INFINITY;
        }
        // ζα = 1: only the power term remains.
        if self.zeta > 1.0 {
            0.0
        } else if self.zeta == 1.0 {
            1.0 / self.beta
        } else {
            f64::INFINITY
        }
    }

    /// H''(γ) for γ > 0.
    pub fn h_second(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0) {
            return Err(EbfError::InvalidParameter(format!("h_second needs gamma > 0, got {gamma}")));
        }
        Ok(self.h_second_unchecked(gamma))
    }

    pub(crate) fn h_second_unchecked(&self, gamma: f64) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        let power = if self.zeta == 1.0 {
            0.0
        } else {
            self.zeta * (self.zeta - 1.0) / (self.beta * self.beta) * (gamma / self.beta).powf(self.zeta - 2.0)
        };
        -self.log_coef / (gamma * gamma) + power
    }

    /// Whether H is convex, concave, or neither on γ > 0.
    pub fn curvature_class(&self) -> Curvature {
        match self.kind {
            PriorKind::None | PriorKind::HalfLaplace | PriorKind::HalfGaussian => Curvature::Convex,
            // (1−α)·log γ is convex exactly when α ≥ 1.
            PriorKind::Gamma if self.alpha > 1.0 => Curvature::Convex,
            PriorKind::Gamma => Curvature::Concave,
            PriorKind::HalfGeneralizedGaussian => Curvature::Concave,
            PriorKind::InverseGamma => Curvature::Neither,
        }
    }

    /// True when H' > 0 on all of γ > 0.
    pub fn is_strictly_increasing(&self) -> bool {
        match self.kind {
            PriorKind::None => false,
            PriorKind::Gamma => self.alpha < 1.0,
            PriorKind::InverseGamma => false,
            PriorKind::HalfGaussian | PriorKind::HalfLaplace | PriorKind::HalfGeneralizedGaussian => true,
        }
    }

    /// True when H' ≥ 0 on γ > 0 (flat prior included).
    pub fn is_nondecreasing(&self) -> bool {
        self.is_none() || self.is_strictly_increasing()
    }

    /// Whether the stationarity condition of H can be cleared to a polynomial
    /// by multiplying with γ² (ζ ∈ {−1, 1, 2} or no prior).
    pub fn has_polynomial_derivative(&self) -> bool {
        self.is_none() || self.zeta == 1.0 || self.zeta == 2.0 || self.zeta == -1.0
    }

    /// Coefficients (lowest degree first) of γ²·H'(γ) when it is a polynomial.
    pub(crate) fn gamma_sq_h_prime_poly(&self) -> Option<[f64; 4]> {
        if self.is_none() {
            return Some([0.0; 4]);
        }
        let s = self.zeta / self.beta.powf(self.zeta);
        if self.zeta == 1.0 {
            Some([0.0, self.log_coef, s, 0.0])
        } else if self.zeta == 2.0 {
            Some([0.0, self.log_coef, 0.0, s])
        } else if self.zeta == -1.0 {
            Some([s, self.log_coef, 0.0, 0.0])
        } else {
            None
        }
    }

    /// Short human-readable description with parameters.
    pub fn describe(&self) -> String {
        match self.kind {
            PriorKind::None => "none".into(),
            PriorKind::Gamma => format!("gamma(alpha={}, beta={})", self.alpha, self.beta),
            PriorKind::InverseGamma => format!("inv-gamma(alpha={}, beta={})", self.alpha, self.beta),
            PriorKind::HalfGaussian => format!("half-gaussian(theta={})", self.theta()),
            PriorKind::HalfLaplace => format!("half-laplace(beta={})", self.beta),
            PriorKind::HalfGeneralizedGaussian => {
                format!("half-gg(zeta={}, beta={})", self.zeta, self.beta)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6 * x.max(1.0);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn h_value_examples() {
        assert_eq!(Hyperprior::half_laplace(1.0).unwrap().h_value(2.0), 2.0);
        assert!((Hyperprior::half_gaussian(1.0).unwrap().h_value(2.0) - 2.0).abs() < 1e-14);
        assert!((Hyperprior::gamma(0.5, 1.0).unwrap().h_value(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(Hyperprior::none().h_value(3.0), 0.0);
    }

    #[test]
    fn h_value_limits_at_zero() {
        assert_eq!(Hyperprior::gamma(1.5, 1.0).unwrap().h_value(0.0), f64::INFINITY);
        assert_eq!(Hyperprior::gamma(0.5, 1.0).unwrap().h_value(0.0), f64::NEG_INFINITY);
        assert_eq!(Hyperprior::inverse_gamma(1.0, 1.0).unwrap().h_value(0.0), f64::INFINITY);
        assert_eq!(Hyperprior::half_laplace(1.0).unwrap().h_value(0.0), 0.0);
        assert_eq!(Hyperprior::half_gaussian(1.0).unwrap().h_value(0.0), 0.0);
        assert_eq!(Hyperprior::half_generalized_gaussian(0.5, 1.0).unwrap().h_value(0.0), 0.0);
    }

    #[test]
    fn h_prime_examples() {
        let hl = Hyperprior::half_laplace(0.1).unwrap();
        assert!((hl.h_prime(0.37).unwrap() - 10.0).abs() < 1e-12);
        assert!((Hyperprior::half_gaussian(1.0).unwrap().h_prime(3.0).unwrap() - 3.0).abs() < 1e-12);
        let hgg = Hyperprior::half_generalized_gaussian(0.5, 1.0).unwrap();
        assert!((hgg.h_prime(4.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((fd(|g| hgg.h_value(g), 4.0) - 0.25).abs() < 1e-8);
        assert!(hl.h_prime(0.0).is_err());
    }

    #[test]
    fn h_prime_at_zero_regimes() {
        assert!((Hyperprior::half_laplace(0.1).unwrap().h_prime_at_zero() - 10.0).abs() < 1e-12);
        assert_eq!(Hyperprior::half_gaussian(3.0).unwrap().h_prime_at_zero(), 0.0);
        assert_eq!(Hyperprior::inverse_gamma(2.0, 0.5).unwrap().h_prime_at_zero(), f64::NEG_INFINITY);
        assert_eq!(Hyperprior::gamma(1.5, 1.0).unwrap().h_prime_at_zero(), f64::NEG_INFINITY);
        assert_eq!(Hyperprior::gamma(0.5, 1.0).unwrap().h_prime_at_zero(), f64::INFINITY);
        assert_eq!(Hyperprior::half_generalized_gaussian(0.5, 1.0).unwrap().h_prime_at_zero(), f64::INFINITY);
        assert_eq!(Hyperprior::none().h_prime_at_zero(), 0.0);
    }

    #[test]
    fn h_second_examples() {
        assert_eq!(Hyperprior::half_laplace(1.0).unwrap().h_second(5.0).unwrap(), 0.0);
        assert!((Hyperprior::half_gaussian(2.0).unwrap().h_second(7.0).unwrap() - 0.25).abs() < 1e-14);
        // H = ½·log γ + γ, so H'' = −½/γ².
        let g = Hyperprior::gamma(0.5, 1.0).unwrap();
        assert!((g.h_second(2.0).unwrap() + 0.125).abs() < 1e-15);
        assert!((fd(|x| g.h_prime_unchecked(x), 2.0) + 0.125).abs() < 1e-8);
    }

    #[test]
    fn curvature_examples() {
        assert_eq!(Hyperprior::half_laplace(1.0).unwrap().curvature_class(), Curvature::Convex);
        assert_eq!(Hyperprior::half_generalized_gaussian(0.5, 1.0).unwrap().curvature_class(), Curvature::Concave);
        let ig = Hyperprior::inverse_gamma(1.0, 1.0).unwrap();
        assert_eq!(ig.curvature_class(), Curvature::Neither);
        assert!(ig.h_second(0.5).unwrap() > 0.0 && ig.h_second(2.0).unwrap() < 0.0);
        assert_eq!(Hyperprior::gamma(1.5, 1.0).unwrap().curvature_class(), Curvature::Convex);
        assert_eq!(Hyperprior::gamma(0.5, 1.0).unwrap().curvature_class(), Curvature::Concave);
    }

    #[test]
    fn construction_validates() {
        assert!(Hyperprior::half_laplace(0.0).is_err());
        assert!(Hyperprior::gamma(-1.0, 1.0).is_err());
        assert!(Hyperprior::half_generalized_gaussian(1.5, 1.0).is_err());
        assert!(Hyperprior::half_generalized_gaussian(0.0, 1.0).is_err());
        assert_eq!(Hyperprior::gamma(1.0, 0.3).unwrap().kind(), PriorKind::HalfLaplace);
        assert_eq!(Hyperprior::half_generalized_gaussian(2.0, 1.0).unwrap().kind(), PriorKind::HalfGaussian);
    }

    #[test]
    fn parse_names() {
        for kind in [
            PriorKind::None,
            PriorKind::Gamma,
            PriorKind::InverseGamma,
            PriorKind::HalfGaussian,
            PriorKind::HalfLaplace,
            PriorKind::HalfGeneralizedGaussian,
        ] {
            assert_eq!(kind.name().parse::<PriorKind>().unwrap(), kind);
        }
        assert!("laplace".parse::<PriorKind>().is_err());
    }
}
