//! Moment kernels of the form `Σ p_i(x) exp(q_i(x))` on `[a, b]`.
//!
//! Polynomials are stored in the local coordinate `t = (x - c) / h` with
//! `c` the midpoint and `h` the half width, which keeps high-degree kernels
//! well scaled on `t ∈ [-1, 1]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GopError, Result};
use crate::numkit::{integrate, QuadratureSpec, RealPoly};
use crate::operators::DiffOperator;

/// Relative size below which boundary derivatives count as vanishing.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTerm {
    pub p: RealPoly,
    pub q: RealPoly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelExpr {
    a: f64,
    b: f64,
    terms: Vec<KernelTerm>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |b, i| b * (n - i) as f64 / (i + 1) as f64)
}

impl KernelExpr {
    fn check_support(a: f64, b: f64) -> Result<()> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(GopError::InvalidInput(format!("kernel support [{a}, {b}]")));
        }
        Ok(())
    }

    /// Kernel from local-coordinate terms.
    pub fn from_local(a: f64, b: f64, terms: Vec<KernelTerm>) -> Result<Self> {
        Self::check_support(a, b)?;
        Ok(Self { a, b, terms }.merged())
    }

    /// `p(x) exp(q(x))` with `p`, `q` given in the global variable `x`.
    pub fn from_global(a: f64, b: f64, p: &RealPoly, q: &RealPoly) -> Result<Self> {
        Self::check_support(a, b)?;
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        Self::from_local(
            a,
            b,
            vec![KernelTerm {
                p: p.compose_affine(c, h),
                q: q.compose_affine(c, h),
            }],
        )
    }

    pub fn polynomial(a: f64, b: f64, p: &RealPoly) -> Result<Self> {
        Self::from_global(a, b, p, &RealPoly::zero())
    }

    /// `(x-a)^{4m} (x-b)^{4m} exp(-α (x-β0)² (x-β1)²)` on `[a, b]`.
    pub fn phi_p(a: f64, b: f64, m: usize, alpha: f64, beta0: f64, beta1: f64) -> Result<Self> {
        Self::check_support(a, b)?;
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let e = 4 * m;
        // x - a = h (t + 1), x - b = h (t - 1)
        let p = &RealPoly::linear_power(-1.0, e) * &RealPoly::linear_power(1.0, e);
        let p = p.scale(h.powi(2 * e as i32));
        let q_global = (&RealPoly::linear_power(beta0, 2) * &RealPoly::linear_power(beta1, 2)).scale(-alpha);
        Self::from_local(
            a,
            b,
            vec![KernelTerm {
                p,
                q: q_global.compose_affine(c, h),
            }],
        )
    }

    /// `(x-a)^r (b-x)^r exp(q(x))` on `[a, b]`, built in local coordinates so
    /// that the boundary roots stay exact.
    pub fn vanishing(a: f64, b: f64, r: usize, q: &RealPoly) -> Result<Self> {
        Self::check_support(a, b)?;
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let p = (&RealPoly::linear_power(-1.0, r) * &RealPoly::linear_power(1.0, r)).scale(h.powi(2 * r as i32));
        let p = if r % 2 == 1 { p.scale(-1.0) } else { p };
        Self::from_local(a, b, vec![KernelTerm { p, q: q.compose_affine(c, h) }])
    }

    /// `x^s (1-x)^s` on `[0, 1]`.
    pub fn beta_bump(s: usize) -> Result<Self> {
        let p = &RealPoly::x().pow(s) * &RealPoly::new(vec![1.0, -1.0]).pow(s);
        Self::polynomial(0.0, 1.0, &p)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    fn center_half(&self) -> (f64, f64) {
        (0.5 * (self.a + self.b), 0.5 * (self.b - self.a))
    }

    fn merged(mut self) -> Self {
        let mut out: Vec<KernelTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            if t.p.is_zero() {
                continue;
            }
            if let Some(s) = out.iter_mut().find(|s| s.q == t.q) {
                s.p = &s.p + &t.p;
            } else {
                out.push(t);
            }
        }
        out.retain(|t| !t.p.is_zero());
        self.terms = out;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn eval_local(&self, t: f64) -> f64 {
        self.terms.iter().map(|k| k.p.eval(t) * k.q.eval(t).exp()).sum()
    }

    /// Bound on the rounding error of `eval_local(t)` from cancellation
    /// among the polynomial coefficients.
    fn rounding_floor(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|k| {
                let abs: f64 = k.p.coeffs().iter().rev().fold(0.0, |acc, c| acc * t.abs() + c.abs());
                16.0 * (k.p.degree() + 1) as f64 * f64::EPSILON * abs * k.q.eval(t).exp()
            })
            .sum()
    }

    /// Kernel value; zero outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        let (c, h) = self.center_half();
        self.eval_local((x - c) / h)
    }

    pub fn derivative(&self) -> Self {
        let (_, h) = self.center_half();
        let terms = self
            .terms
            .iter()
            .map(|k| KernelTerm {
                p: (&k.p.derivative() + &(&k.p * &k.q.derivative())).scale(1.0 / h),
                q: k.q.clone(),
            })
            .collect();
        Self {
            a: self.a,
            b: self.b,
            terms,
        }
        .merged()
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |k, _| k.derivative())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            a: self.a,
            b: self.b,
            terms: self
                .terms
                .iter()
                .map(|k| KernelTerm {
                    p: k.p.scale(s),
                    q: k.q.clone(),
                })
                .collect(),
        }
        .merged()
    }

    pub fn add(&self, other: &KernelExpr) -> Result<Self> {
        if self.a != other.a || self.b != other.b {
            return Err(GopError::InvalidInput("kernels with different supports".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            a: self.a,
            b: self.b,
            terms,
        }
        .merged())
    }

    /// Multiplies by a polynomial given in the global variable.
    pub fn mul_poly(&self, g: &RealPoly) -> Self {
        let (c, h) = self.center_half();
        let gl = g.compose_affine(c, h);
        Self {
            a: self.a,
            b: self.b,
            terms: self
                .terms
                .iter()
                .map(|k| KernelTerm {
                    p: &k.p * &gl,
                    q: k.q.clone(),
                })
                .collect(),
        }
        .merged()
    }

    /// `x ↦ φ(x - s)`
    pub fn translate(&self, s: f64) -> Self {
        Self {
            a: self.a + s,
            b: self.b + s,
            terms: self.terms.clone(),
        }
    }

    /// `x ↦ φ(x / s)` for `s > 0`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(GopError::InvalidInput(format!("kernel dilation factor {s}")));
        }
        Ok(Self {
            a: self.a * s,
            b: self.b * s,
            terms: self.terms.clone(),
        })
    }

    fn magnitude(&self) -> f64 {
        (0..=64)
            .map(|i| self.eval_local(-1.0 + 2.0 * i as f64 / 64.0).abs())
            .fold(0.0, f64::max)
    }

    /// Checks `φ^{(ℓ)}(a) = φ^{(ℓ)}(b) = 0` for `ℓ < orders`, relative to
    /// the kernel's size and above the rounding floor of its coefficients.
    pub fn check_boundary(&self, orders: usize) -> Result<()> {
        let mut d = self.clone();
        for order in 0..orders {
            let scale = d.magnitude().max(f64::MIN_POSITIVE);
            for (x, t) in [(self.a, -1.0), (self.b, 1.0)] {
                let value = d.eval_local(t);
                if value.abs() > BOUNDARY_TOL * scale + d.rounding_floor(t) {
                    return Err(GopError::BoundaryViolation { order, x, value });
                }
            }
            d = d.derivative();
        }
        Ok(())
    }

    /// `A* φ = Σ_n (-1)^n Σ_ℓ C(n, ℓ) g_n^{(ℓ)} φ^{(n-ℓ)}` for `A = Σ g_n d^n`,
    /// valid because the boundary terms of the integration by parts vanish.
    pub fn adjoint_apply(&self, op: &DiffOperator) -> Result<Self> {
        self.check_boundary(op.order())?;
        let mut derivs = vec![self.clone()];
        for _ in 0..op.order() {
            let next = derivs.last().expect("nonempty").derivative();
            derivs.push(next);
        }
        let mut out = Self {
            a: self.a,
            b: self.b,
            terms: Vec::new(),
        };
        for (n, g) in op.coeffs().iter().enumerate() {
            if g.is_zero() {
                continue;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for l in 0..=n {
                let gl = g.nth_derivative(l);
                if gl.is_zero() {
                    continue;
                }
                out = out.add(&derivs[n - l].mul_poly(&gl).scale(sign * binomial(n, l)))?;
            }
        }
        Ok(out)
    }

    /// `∫_a^b f(x) φ(x) dx`
    pub fn moment(&self, f: impl Fn(f64) -> Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
        let (c, h) = self.center_half();
        integrate(
            |x| {
                let t = ((x - c) / h).clamp(-1.0, 1.0);
                f(x) * self.eval_local(t)
            },
            self.a,
            self.b,
            spec,
        )
    }

    /// Weights `w_s` with `φ(x) = Σ w_s (x - a)^s`, for kernels whose
    /// exponents are constant.
    pub fn monomial_weights(&self) -> Option<Vec<f64>> {
        let (_, h) = self.center_half();
        let mut acc = RealPoly::zero();
        for k in &self.terms {
            if k.q.degree() > 0 {
                return None;
            }
            // t = u / h - 1 with u = x - a
            let factor = k.q.eval(0.0).exp();
            acc = &acc + &k.p.compose_affine(-1.0, 1.0 / h).scale(factor);
        }
        Some(acc.coeffs().to_vec())
    }

    /// Canonical identifier: support plus a digest of the coefficient bits.
    pub fn id(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.a.to_bits().to_le_bytes());
        hasher.update(self.b.to_bits().to_le_bytes());
        for k in &self.terms {
            hasher.update((k.p.coeffs().len() as u64).to_le_bytes());
            for c in k.p.coeffs() {
                hasher.update(c.to_bits().to_le_bytes());
            }
            hasher.update((k.q.coeffs().len() as u64).to_le_bytes());
            for c in k.q.coeffs() {
                hasher.update(c.to_bits().to_le_bytes());
            }
        }
        let digest = hasher.finalize();
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        format!("ker:{:?}:{:?}:{hex}", self.a, self.b)
    }
}
