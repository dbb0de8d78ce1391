//! Truncated Taylor series ("jets") for exact derivatives of closed forms.
//!
//! A jet of order `n` stores `c_0..=c_n` with `f(x0 + h) = Σ c_k h^k + O(h^{n+1})`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Jet {
    pub fn constant(v: Complex64, order: usize) -> Self {
        let mut c = vec![zero(); order + 1];
        c[0] = v;
        Self { c }
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut c = vec![zero(); order + 1];
        c[0] = Complex64::new(x0, 0.0);
        if order >= 1 {
            c[1] = Complex64::new(1.0, 0.0);
        }
        Self { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> Complex64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c.get(k).copied().unwrap_or_default() * fact
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    pub fn recip(&self) -> Self {
        Self::constant(Complex64::new(1.0, 0.0), self.order()).div(self)
    }

    pub fn div(&self, b: &Jet) -> Self {
        let n = self.c.len();
        let mut q = vec![zero(); n];
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= b.c[j] * q[k - j];
            }
            q[k] = acc / b.c[0];
        }
        Self { c: q }
    }

    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut e = vec![zero(); n];
        e[0] = self.c[0].exp();
        for k in 1..n {
            let s: Complex64 = (1..=k).map(|j| self.c[j] * e[k - j] * j as f64).sum();
            e[k] = s / k as f64;
        }
        Self { c: e }
    }

    pub fn ln(&self) -> Self {
        let n = self.c.len();
        let mut l = vec![zero(); n];
        l[0] = self.c[0].ln();
        for k in 1..n {
            let s: Complex64 = (1..k).map(|j| l[j] * self.c[k - j] * j as f64).sum();
            l[k] = (self.c[k] - s / k as f64) / self.c[0];
        }
        Self { c: l }
    }

    fn sin_cos_pair(&self, hyperbolic: bool) -> (Self, Self) {
        let n = self.c.len();
        let mut s = vec![zero(); n];
        let mut c = vec![zero(); n];
        if hyperbolic {
            s[0] = self.c[0].sinh();
            c[0] = self.c[0].cosh();
        } else {
            s[0] = self.c[0].sin();
            c[0] = self.c[0].cos();
        }
        let sign = if hyperbolic { 1.0 } else { -1.0 };
        for k in 1..n {
            let mut ds = zero();
            let mut dc = zero();
            for j in 1..=k {
                let w = self.c[j] * j as f64;
                ds += w * c[k - j];
                dc += w * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = dc * sign / k as f64;
        }
        (Self { c: s }, Self { c })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos_pair(false).0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos_pair(false).1
    }

    pub fn sinh(&self) -> Self {
        self.sin_cos_pair(true).0
    }

    pub fn cosh(&self) -> Self {
        self.sin_cos_pair(true).1
    }

    /// `self^p` on the principal branch; the value at the expansion point must be nonzero.
    pub fn powc(&self, p: Complex64) -> Self {
        let n = self.c.len();
        let mut y = vec![zero(); n];
        y[0] = self.c[0].powc(p);
        for k in 1..n {
            let s: Complex64 = (1..=k)
                .map(|j| self.c[j] * y[k - j] * ((p + 1.0) * j as f64 - k as f64))
                .sum();
            y[k] = s / (self.c[0] * k as f64);
        }
        Self { c: y }
    }

    pub fn powf(&self, p: f64) -> Self {
        self.powc(Complex64::new(p, 0.0))
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn powi(&self, n: usize) -> Self {
        (0..n).fold(Self::constant(Complex64::new(1.0, 0.0), self.order()), |acc, _| &acc * self)
    }

    /// Jet of `F(self)` given `F(a_0)` and the jet of `F'(self)`.
    fn antiderivative(&self, y0: Complex64, dy: &Jet) -> Self {
        let n = self.c.len();
        let mut y = vec![zero(); n];
        y[0] = y0;
        for k in 1..n {
            let s: Complex64 = (1..=k).map(|j| self.c[j] * dy.c[k - j] * j as f64).sum();
            y[k] = s / k as f64;
        }
        Self { c: y }
    }

    fn one_minus_square(&self) -> Self {
        (-&(self * self)).add_scalar(Complex64::new(1.0, 0.0))
    }

    pub fn asin(&self) -> Self {
        let d = self.one_minus_square().powf(-0.5);
        self.antiderivative(self.c[0].asin(), &d)
    }

    pub fn acos(&self) -> Self {
        let d = -&self.one_minus_square().powf(-0.5);
        self.antiderivative(self.c[0].acos(), &d)
    }

    pub fn asinh(&self) -> Self {
        let d = (self * self).add_scalar(Complex64::new(1.0, 0.0)).powf(-0.5);
        self.antiderivative(self.c[0].asinh(), &d)
    }

    pub fn acosh(&self) -> Self {
        let d = (self * self).add_scalar(Complex64::new(-1.0, 0.0)).powf(-0.5);
        self.antiderivative(self.c[0].acosh(), &d)
    }
}

impl Add for &Jet {
    type Output = Jet;

    fn add(self, rhs: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;

    fn sub(self, rhs: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;

    fn neg(self) -> Jet {
        Jet {
            c: self.c.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;

    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.c.len().min(rhs.c.len());
        let c = (0..n)
            .map(|k| (0..=k).map(|j| self.c[j] * rhs.c[k - j]).sum())
            .collect();
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORDER: usize = 6;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    // Central differences are too noisy at order 6; compare against known
    // closed-form derivative sequences instead.
    #[test]
    fn exp_of_linear_matches_powers() {
        let t = Complex64::new(0.4, -1.3);
        let x = Jet::variable(0.7, ORDER);
        let e = x.scale(t).exp();
        for k in 0..=ORDER {
            let expect = t.powu(k as u32) * (t * 0.7).exp();
            assert!(close(e.derivative(k), expect, 1e-13));
        }
    }

    #[test]
    fn sin_cos_cycle() {
        let x = Jet::variable(0.3, ORDER);
        let s = x.sin();
        let cycle = [0.3f64.sin(), 0.3f64.cos(), -0.3f64.sin(), -0.3f64.cos()];
        for k in 0..=ORDER {
            assert!(close(s.derivative(k), Complex64::new(cycle[k % 4], 0.0), 1e-13));
        }
    }

    #[test]
    fn ln_inverts_exp() {
        let x = Jet::variable(0.2, ORDER);
        let back = x.sin().exp().ln();
        let direct = x.sin();
        for k in 0..=ORDER {
            assert!(close(back.coeffs()[k], direct.coeffs()[k], 1e-13));
        }
    }

    #[test]
    fn inverse_trig_round_trips() {
        let x = Jet::variable(0.35, ORDER);
        for (f, g) in [
            (x.asin().sin(), x.clone()),
            (x.acos().cos(), x.clone()),
            (x.asinh().sinh(), x.clone()),
        ] {
            for k in 0..=ORDER {
                assert!(close(f.coeffs()[k], g.coeffs()[k], 1e-12));
            }
        }
        let y = Jet::variable(1.6, ORDER);
        let r = y.acosh().cosh();
        for k in 0..=ORDER {
            assert!(close(r.coeffs()[k], y.coeffs()[k], 1e-12));
        }
    }

    #[test]
    fn power_and_division() {
        let x = Jet::variable(1.7, ORDER);
        let p = x.powf(2.5);
        // d^k/dx^k x^{2.5}
        let mut falling = 1.0;
        for k in 0..=ORDER {
            let expect = falling * 1.7f64.powf(2.5 - k as f64);
            assert!(close(p.derivative(k), Complex64::new(expect, 0.0), 1e-12));
            falling *= 2.5 - k as f64;
        }
        let q = x.sqrt().div(&x.sqrt());
        assert!(close(q.value(), Complex64::new(1.0, 0.0), 1e-15));
        assert!(q.coeffs()[1..].iter().all(|c| c.norm() < 1e-14));
    }
}
