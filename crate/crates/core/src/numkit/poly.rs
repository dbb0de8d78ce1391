use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex polynomial with ascending coefficients, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Monic polynomial `Π (z - r)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }
}

/// Real polynomial with ascending coefficients.
///
/// Used for kernel factors and the coefficient functions of differential
/// operators. Trailing zeros are trimmed so that equality is structural.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RealPoly {
    coeffs: Vec<f64>,
}

impl RealPoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `x`
    pub fn x() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    /// `(x - r)^n`
    pub fn linear_power(r: f64, n: usize) -> Self {
        let base = Self::new(vec![-r, 1.0]);
        base.pow(n)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| &acc * self)
    }

    /// `p(shift + factor * t)` as a polynomial in `t`.
    pub fn compose_affine(&self, shift: f64, factor: f64) -> Self {
        let inner = Self::new(vec![shift, factor]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, &c| &(&acc * &inner) + &Self::constant(c))
    }
}

impl Add for &RealPoly {
    type Output = RealPoly;

    fn add(self, rhs: &RealPoly) -> RealPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RealPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + rhs.coeffs.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &RealPoly {
    type Output = RealPoly;

    fn sub(self, rhs: &RealPoly) -> RealPoly {
        self + &(-rhs)
    }
}

impl Neg for &RealPoly {
    type Output = RealPoly;

    fn neg(self) -> RealPoly {
        self.scale(-1.0)
    }
}

impl Mul for &RealPoly {
    type Output = RealPoly;

    fn mul(self, rhs: &RealPoly) -> RealPoly {
        if self.is_zero() || rhs.is_zero() {
            return RealPoly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RealPoly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_roots_expands_product() {
        let p = ComplexPoly::from_roots(&[Complex64::new(2.0, 0.0), Complex64::new(0.0, 3.0)]);
        // z^2 - (2 + 3i) z + 6i
        assert_eq!(p.coeffs()[0], Complex64::new(0.0, 6.0));
        assert_eq!(p.coeffs()[1], Complex64::new(-2.0, -3.0));
        assert_eq!(p.coeffs()[2], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let p = RealPoly::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert!(RealPoly::new(vec![0.0]).is_zero());
    }

    #[test]
    fn compose_affine_matches_direct_evaluation() {
        let p = RealPoly::new(vec![0.5, -1.0, 2.0, 0.25]);
        let q = p.compose_affine(0.3, -1.7);
        for t in [-1.0, -0.2, 0.4, 1.3] {
            assert!((q.eval(t) - p.eval(0.3 - 1.7 * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_power() {
        // d/dx (x - 1)^3 = 3 (x - 1)^2
        let p = RealPoly::linear_power(1.0, 3).derivative();
        assert_eq!(p, RealPoly::linear_power(1.0, 2).scale(3.0));
    }
}
