//! Real roots of real polynomials up to degree four.
//!
//! Closed forms (stable quadratic formula, Cardano / trigonometric cubic,
//! Ferrari quartic) provide initial estimates. Every estimate is then polished
//! inside the monotone interval of the polynomial that contains it, which is
//! bounded by the real critical points, so near-multiple roots that the closed
//! forms smear into a complex pair are still recovered.

use std::f64::consts::PI;

use crate::error::{EbfError, Result};

/// Leading coefficients below this fraction of the coefficient norm are dropped.
const DEFLATE_TOL: f64 = 1e-14;
/// Newton polish steps applied to each closed-form estimate before bracketing.
const NEWTON_POLISH_STEPS: usize = 3;

/// A real polynomial stored lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from coefficients `c0 + c1 x + c2 x² + ...`.
    ///
    /// Leading coefficients that are negligible relative to the coefficient
    /// norm are removed so the stored degree is the effective one.
    pub fn new(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > 5 {
            return Err(EbfError::InvalidParameter(format!(
                "polynomial needs 1..=5 coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(EbfError::InvalidParameter("polynomial coefficients must be finite".into()));
        }
        let mut coeffs = coeffs.to_vec();
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        while coeffs.len() > 1 && coeffs.last().unwrap().abs() <= DEFLATE_TOL * norm {
            coeffs.pop();
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative by Horner's scheme.
    fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs: Vec<f64> = self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
        Polynomial { coeffs: if coeffs.is_empty() { vec![0.0] } else { coeffs } }
    }

    /// Magnitude scale used in residual tolerances: Σ|cᵢ|·max(1,|x|)^deg.
    pub fn residual_scale(&self, x: f64) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.abs()).sum();
        sum * x.abs().max(1.0).powi(self.degree() as i32)
    }

    /// Rounding-error scale of Horner evaluation at x: Σ|cᵢ||x|ⁱ.
    fn horner_scale(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x.abs() + c.abs())
    }

    /// All distinct real roots in ascending order.
    pub fn real_roots(&self) -> Vec<f64> {
        let c = &self.coeffs;
        match self.degree() {
            0 => Vec::new(),
            1 => vec![-c[0] / c[1]],
            2 => quadratic_estimates(c[2], c[1], c[0]).into_iter().map(|r| newton_polish(self, r)).collect(),
            3 => self.refine(&cubic_estimates(c[3], c[2], c[1], c[0])),
            _ => self.refine(&quartic_estimates(c[4], c[3], c[2], c[1], c[0])),
        }
    }

    /// Upper bound on the magnitude of any root (Cauchy).
    fn cauchy_bound(&self) -> f64 {
        let lead = *self.coeffs.last().unwrap();
        1.0 + self.coeffs[..self.degree()].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max)
    }

    /// Locates every root between consecutive critical points, using the
    /// closed-form estimates as starting guesses.
    fn refine(&self, estimates: &[f64]) -> Vec<f64> {
        let critical = self.derivative().real_roots();
        let bound = self.cauchy_bound();
        let estimates: Vec<f64> = estimates.iter().filter(|r| r.is_finite()).map(|&r| newton_polish(self, r)).collect();

        let mut breaks = Vec::with_capacity(critical.len() + 2);
        breaks.push((-bound, self.eval(-bound)));
        for &c in critical.iter().filter(|c| c.abs() < bound) {
            let v = self.eval(c);
            // A value within rounding noise at a critical point is a touching root.
            let v = if v.abs() <= 32.0 * f64::EPSILON * self.horner_scale(c) { 0.0 } else { v };
            breaks.push((c, v));
        }
        breaks.push((bound, self.eval(bound)));

        let mut roots: Vec<f64> = breaks.iter().filter(|(_, v)| *v == 0.0).map(|(c, _)| *c).collect();
        for pair in breaks.windows(2) {
            let (lo, vlo) = pair[0];
            let (hi, vhi) = pair[1];
            if vlo == 0.0 || vhi == 0.0 || vlo.signum() == vhi.signum() {
                continue;
            }
            let guess = estimates
                .iter()
                .copied()
                .filter(|r| *r > lo && *r < hi)
                .min_by(|a, b| self.eval(*a).abs().partial_cmp(&self.eval(*b).abs()).unwrap());
            roots.push(bracketed_root(self, lo, hi, vlo, guess));
        }
        sort_dedup(roots)
    }
}

fn sort_dedup(mut roots: Vec<f64>) -> Vec<f64> {
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()));
    roots
}

fn newton_polish(poly: &Polynomial, mut x: f64) -> f64 {
    for _ in 0..NEWTON_POLISH_STEPS {
        let (p, dp) = poly.eval_with_derivative(x);
        if p == 0.0 || dp == 0.0 {
            break;
        }
        let next = x - p / dp;
        if !next.is_finite() || poly.eval(next).abs() >= p.abs() {
            break;
        }
        x = next;
    }
    x
}

/// Safeguarded Newton iteration on a sign-change bracket.
fn bracketed_root(poly: &Polynomial, mut lo: f64, mut hi: f64, vlo: f64, guess: Option<f64>) -> f64 {
    let lo_sign = vlo.signum();
    let mut x = guess.unwrap_or(0.5 * (lo + hi));
    for _ in 0..200 {
        let (p, dp) = poly.eval_with_derivative(x);
        if p == 0.0 {
            return x;
        }
        if p.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let newton = x - p / dp;
        x = if dp != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if x == lo || x == hi {
            break;
        }
    }
    // Return whichever bracket end has the smaller residual.
    [x, lo, hi].into_iter().min_by(|a, b| poly.eval(*a).abs().partial_cmp(&poly.eval(*b).abs()).unwrap()).unwrap()
}

/// Roots of `a x² + b x + c` via the cancellation-free formula.
fn quadratic_estimates(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    let noise = 4.0 * f64::EPSILON * (b * b + (4.0 * a * c).abs());
    if disc < -noise {
        return Vec::new();
    }
    if disc <= noise {
        return vec![-b / (2.0 * a)];
    }
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    let mut roots = if q == 0.0 { vec![0.0] } else { vec![q / a, c / q] };
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots.dedup();
    roots
}

/// Estimates for `a x³ + b x² + c x + d` from the depressed cubic.
fn cubic_estimates(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let (b, c, d) = (b / a, c / a, d / a);
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    depressed_cubic(p, q).into_iter().map(|t| t - shift).collect()
}

/// Real roots of `t³ + p t + q`.
fn depressed_cubic(p: f64, q: f64) -> Vec<f64> {
    if p == 0.0 {
        return vec![(-q).cbrt()];
    }
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    if disc > 0.0 {
        // One real root (Cardano), with the cube root taken on the
        // non-cancelling branch.
        let u = -(half_q.abs() + disc.sqrt()).cbrt().copysign(half_q);
        let t = if u == 0.0 { 0.0 } else { u - third_p / u };
        vec![t]
    } else {
        // Three real roots (trigonometric form).
        let r = (-third_p).sqrt();
        let arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3).map(|k| 2.0 * r * (phi - 2.0 * PI * k as f64 / 3.0).cos()).collect()
    }
}

/// Estimates for `a x⁴ + b x³ + c x² + d x + e` by Ferrari's resolvent cubic.
fn quartic_estimates(a: f64, b: f64, c: f64, d: f64, e: f64) -> Vec<f64> {
    let (b, c, d, e) = (b / a, c / a, d / a, e / a);
    let shift = b / 4.0;
    let b2 = b * b;
    let p = c - 3.0 * b2 / 8.0;
    let q = d - b * c / 2.0 + b2 * b / 8.0;
    let r = e - b * d / 4.0 + b2 * c / 16.0 - 3.0 * b2 * b2 / 256.0;

    let mut ys = Vec::new();
    if q.abs() <= 1e-14 * (p.abs() + r.abs() + 1.0) {
        // Biquadratic: y⁴ + p y² + r.
        for z in quadratic_estimates(1.0, p, r) {
            if z > 0.0 {
                ys.push(z.sqrt());
                ys.push(-z.sqrt());
            } else if z == 0.0 {
                ys.push(0.0);
            }
        }
    } else {
        // Resolvent 8m³ + 8p m² + (2p² − 8r) m − q² = 0 always has a positive root.
        let m =
            cubic_estimates(8.0, 8.0 * p, 2.0 * p * p - 8.0 * r, -q * q).into_iter().fold(f64::NEG_INFINITY, f64::max);
        if m > 0.0 {
            let s = (2.0 * m).sqrt();
            let base = 0.5 * p + m;
            let skew = q / (2.0 * s);
            ys.extend(quadratic_estimates(1.0, -s, base + skew));
            ys.extend(quadratic_estimates(1.0, s, base - skew));
        }
    }
    ys.into_iter().map(|y| y - shift).collect()
}

/// Real roots of `a x² + b x + c`, ascending.
pub fn real_roots_quadratic(a: f64, b: f64, c: f64) -> Result<Vec<f64>> {
    if a == 0.0 {
        return Err(EbfError::DegeneratePolynomial);
    }
    Ok(Polynomial::new(&[c, b, a])?.real_roots())
}

/// Real roots of `a x³ + b x² + c x + d`, ascending with multiplicities collapsed.
///
/// A zero leading coefficient degrades to the quadratic (or linear) solve.
pub fn real_roots_cubic(a: f64, b: f64, c: f64, d: f64) -> Result<Vec<f64>> {
    Ok(Polynomial::new(&[d, c, b, a])?.real_roots())
}

/// Real roots of `a x⁴ + b x³ + c x² + d x + e`, ascending with multiplicities collapsed.
pub fn real_roots_quartic(a: f64, b: f64, c: f64, d: f64, e: f64) -> Result<Vec<f64>> {
    Ok(Polynomial::new(&[e, d, c, b, a])?.real_roots())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len(), "got {got:?}, want {want:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol * w.abs().max(1.0), "got {got:?}, want {want:?}");
        }
    }

    #[test]
    fn quadratic_examples() {
        close(&real_roots_quadratic(1.0, -3.0, 2.0).unwrap(), &[1.0, 2.0], 1e-14);
        assert!(real_roots_quadratic(1.0, 0.0, 1.0).unwrap().is_empty());
        close(&real_roots_quadratic(2.0, 1.0, -1.0).unwrap(), &[-1.0, 0.5], 1e-14);
    }

    #[test]
    fn quadratic_rejects_zero_leading() {
        assert!(matches!(real_roots_quadratic(0.0, 1.0, 1.0), Err(EbfError::DegeneratePolynomial)));
    }

    #[test]
    fn quadratic_without_cancellation() {
        // b² ≫ 4ac: the small root must keep full relative precision.
        let roots = real_roots_quadratic(1.0, -1e8, 1.0).unwrap();
        assert!((roots[0] - 1e-8).abs() <= 1e-22);
        assert!((roots[1] - 1e8).abs() <= 1e-6);
    }

    #[test]
    fn cubic_examples() {
        close(&real_roots_cubic(1.0, -6.0, 11.0, -6.0).unwrap(), &[1.0, 2.0, 3.0], 1e-12);
        close(&real_roots_cubic(1.0, 0.0, 0.0, -1.0).unwrap(), &[1.0], 1e-14);
        close(&real_roots_cubic(1.0, 0.0, -3.0, 2.0).unwrap(), &[-2.0, 1.0], 1e-12);
    }

    #[test]
    fn cubic_with_zero_leading_delegates() {
        close(&real_roots_cubic(0.0, 1.0, -3.0, 2.0).unwrap(), &[1.0, 2.0], 1e-14);
        close(&real_roots_cubic(0.0, 0.0, 2.0, -1.0).unwrap(), &[0.5], 1e-14);
    }

    #[test]
    fn triple_root() {
        // (x − 2)³
        close(&real_roots_cubic(1.0, -6.0, 12.0, -8.0).unwrap(), &[2.0], 1e-5);
    }

    #[test]
    fn quartic_examples() {
        close(&real_roots_quartic(1.0, 0.0, -5.0, 0.0, 4.0).unwrap(), &[-2.0, -1.0, 1.0, 2.0], 1e-12);
        assert!(real_roots_quartic(1.0, 0.0, 0.0, 0.0, 1.0).unwrap().is_empty());
        close(&real_roots_quartic(1.0, -2.0, 0.0, 0.0, 0.0).unwrap(), &[0.0, 2.0], 1e-12);
    }

    #[test]
    fn quartic_double_roots() {
        // (x − 1)²(x + 3)² = x⁴ + 4x³ − 2x² − 12x + 9
        close(&real_roots_quartic(1.0, 4.0, -2.0, -12.0, 9.0).unwrap(), &[-3.0, 1.0], 1e-10);
    }

    #[test]
    fn deflation_of_tiny_leading_coefficient() {
        let p = Polynomial::new(&[-2.0, 0.0, 1.0, 1e-20]).unwrap();
        assert_eq!(p.degree(), 2);
        close(&p.real_roots(), &[-2f64.sqrt(), 2f64.sqrt()], 1e-14);
    }

    #[test]
    fn derivative_of_quartic() {
        let p = Polynomial::new(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(p.derivative().coeffs(), &[2.0, 6.0, 12.0, 20.0]);
    }
}
