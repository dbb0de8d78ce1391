//! Base operators, spectral maps and the sampling-grid rules of iteration
//! operators `φ(A)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GopError, Result};
use crate::families::{EigenFamily, EigenRegion, GPreset, SparseExpansion};
use crate::numkit::RealPoly;

/// Imaginary parts of cosine-map roots up to this size are treated as noise.
pub const COS_IMAG_TOL: f64 = 1e-7;
/// Real parts of cosine-map roots within this much of ±1 are clamped.
pub const COS_CLAMP_TOL: f64 = 1e-9;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |b, i| b * (n - i) as f64 / (i + 1) as f64)
}

/// `Σ g_n(x) d^n/dx^n` with polynomial coefficients; `coeffs[n] = g_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffOperator {
    coeffs: Vec<RealPoly>,
}

impl DiffOperator {
    pub fn new(mut coeffs: Vec<RealPoly>) -> Self {
        while coeffs.last().is_some_and(RealPoly::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn identity() -> Self {
        Self::new(vec![RealPoly::constant(1.0)])
    }

    /// `d/dx`
    pub fn derivative() -> Self {
        Self::nth_derivative(1)
    }

    /// `d^n/dx^n`
    pub fn nth_derivative(n: usize) -> Self {
        let mut c = vec![RealPoly::zero(); n + 1];
        c[n] = RealPoly::constant(1.0);
        Self::new(c)
    }

    /// `(x² - 1) d²/dx² + 2x d/dx`
    pub fn legendre() -> Self {
        Self::new(vec![
            RealPoly::zero(),
            RealPoly::new(vec![0.0, 2.0]),
            RealPoly::new(vec![-1.0, 0.0, 1.0]),
        ])
    }

    /// `x d/dx`
    pub fn euler() -> Self {
        Self::new(vec![RealPoly::zero(), RealPoly::x()])
    }

    pub fn coeffs(&self) -> &[RealPoly] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &DiffOperator) -> DiffOperator {
        let mut out: Vec<RealPoly> = Vec::new();
        for (m, g) in self.coeffs.iter().enumerate() {
            if g.is_zero() {
                continue;
            }
            for (n, a) in other.coeffs.iter().enumerate() {
                for i in 0..=m {
                    let term = &a.nth_derivative(i) * g;
                    if term.is_zero() {
                        continue;
                    }
                    let idx = m - i + n;
                    if out.len() <= idx {
                        out.resize(idx + 1, RealPoly::zero());
                    }
                    out[idx] = &out[idx] + &term.scale(binomial(m, i));
                }
            }
        }
        DiffOperator::new(out)
    }

    pub fn pow(&self, k: usize) -> DiffOperator {
        (0..k).fold(Self::identity(), |acc, _| acc.compose(self))
    }

    /// Coefficients of the operator at a point: `A f(x) = Σ w_n f^{(n)}(x)`.
    pub fn weights_at(&self, x: f64) -> Vec<f64> {
        self.coeffs.iter().map(|g| g.eval(x)).collect()
    }
}

/// Scalar function `φ` transporting eigenvalues of `A` to those of `φ(A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum SpectralMap {
    Identity,
    /// `e^{τλ}`
    ExpScale { tau: f64 },
    /// `cos(τλ)` in the frequency coordinate `λ = sqrt(-μ_B)`
    CosSqrt { tau: f64 },
    /// `1/λ`
    Reciprocal,
}

impl SpectralMap {
    pub fn apply(&self, l: Complex64) -> Result<Complex64> {
        match *self {
            SpectralMap::Identity => Ok(l),
            SpectralMap::ExpScale { tau } => Ok((l * tau).exp()),
            SpectralMap::CosSqrt { tau } => Ok((l * tau).cos()),
            SpectralMap::Reciprocal => {
                if l.norm() == 0.0 {
                    Err(GopError::RegionViolation(l))
                } else {
                    Ok(l.inv())
                }
            }
        }
    }

    /// Principal preimage of `mu`.
    pub fn invert(&self, mu: Complex64) -> Result<Complex64> {
        match *self {
            SpectralMap::Identity => Ok(mu),
            SpectralMap::ExpScale { tau } => {
                if mu.norm() == 0.0 || !mu.norm().is_finite() {
                    return Err(GopError::BranchViolation(mu));
                }
                let mut arg = mu.arg();
                if arg >= std::f64::consts::PI {
                    arg -= 2.0 * std::f64::consts::PI;
                }
                Ok(Complex64::new(mu.norm().ln(), arg) / tau)
            }
            SpectralMap::CosSqrt { tau } => {
                if mu.im.abs() > COS_IMAG_TOL || mu.re.abs() > 1.0 + COS_CLAMP_TOL || !mu.re.is_finite() {
                    return Err(GopError::BranchViolation(mu));
                }
                Ok(Complex64::new(mu.re.clamp(-1.0, 1.0).acos() / tau.abs(), 0.0))
            }
            SpectralMap::Reciprocal => {
                if mu.norm() == 0.0 {
                    Err(GopError::BranchViolation(mu))
                } else {
                    Ok(mu.inv())
                }
            }
        }
    }

    /// Checks that the map separates every pair of points of `region`.
    pub fn check_injective(&self, region: &EigenRegion) -> Result<()> {
        let pi = std::f64::consts::PI * (1.0 + 1e-12);
        match (*self, *region) {
            (SpectralMap::ExpScale { tau }, _) | (SpectralMap::CosSqrt { tau }, _) if tau == 0.0 || !tau.is_finite() => {
                Err(GopError::InvalidInput(format!("step size tau = {tau}")))
            }
            (SpectralMap::ExpScale { tau }, EigenRegion::Strip { half_width }) if tau.abs() * half_width > pi => {
                Err(GopError::InvalidInput(format!(
                    "e^(tau z) is not injective on a strip of half width {half_width} for tau = {tau}"
                )))
            }
            (SpectralMap::CosSqrt { tau }, EigenRegion::RealInterval { upper }) => {
                if tau.abs() * upper > pi {
                    Err(GopError::InvalidInput(format!(
                        "cos(tau z) is not injective on [0, {upper}) for tau = {tau}; need |tau| <= pi/C"
                    )))
                } else {
                    Ok(())
                }
            }
            (SpectralMap::CosSqrt { .. }, r) => Err(GopError::InvalidInput(format!(
                "cos(tau z) needs a real frequency interval, got {r:?}"
            ))),
            _ => Ok(()),
        }
    }
}

/// One term `weight · f^{(order)}(point)` of a grid rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub point: f64,
    pub weight: Complex64,
    pub order: usize,
}

/// Concrete realization of `φ(A)` on function samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IterationAction {
    /// `A` itself, realized by derivative values.
    PlainPower(DiffOperator),
    /// `f ↦ e^{H(x) - H(y)} f(y)`, `y = G^{-1}(τ + G(x))`
    GeneralizedShift { g: GPreset, h: RealPoly, tau: f64 },
    /// `½ [f(G^{-1}(G(x) + τ)) + f(G^{-1}(G(x) - τ))]` for eigenfunctions `cos(λ G)`
    SymmetricShift { g: GPreset, tau: f64 },
    /// `f ↦ f(a x)`
    Dilation { a: f64 },
    /// `½ (S_τ + S_{-τ})`
    HalfSumShift { tau: f64 },
}

fn merge_points(mut pts: Vec<GridPoint>) -> Vec<GridPoint> {
    let mut out: Vec<GridPoint> = Vec::with_capacity(pts.len());
    for p in pts.drain(..) {
        let tol = 1e-12 * p.point.abs().max(1.0);
        if let Some(q) = out
            .iter_mut()
            .find(|q| q.order == p.order && (q.point - p.point).abs() <= tol)
        {
            q.weight += p.weight;
        } else {
            out.push(p);
        }
    }
    out
}

impl IterationAction {
    pub fn plain_shift(tau: f64) -> Self {
        IterationAction::GeneralizedShift {
            g: GPreset::Linear,
            h: RealPoly::zero(),
            tau,
        }
    }

    /// Affine `G` and `H` make the action commute with `d/dx`; returns the
    /// shift length and constant weight when that is the case.
    pub fn as_translation(&self, k: usize) -> Option<(f64, Complex64)> {
        match self {
            IterationAction::GeneralizedShift {
                g: GPreset::Linear,
                h,
                tau,
            } if h.degree() <= 1 => {
                let beta = h.coeffs().get(1).copied().unwrap_or(0.0);
                let s = *tau * k as f64;
                Some((s, Complex64::new((-beta * s).exp(), 0.0)))
            }
            _ => None,
        }
    }

    /// `φ(A)^k f(x0) = Σ weight · f^{(order)}(point)`.
    pub fn grid_points(&self, x0: f64, k: usize) -> Result<Vec<GridPoint>> {
        let one = Complex64::new(1.0, 0.0);
        match self {
            IterationAction::PlainPower(op) => {
                let pk = op.pow(k);
                Ok(pk
                    .weights_at(x0)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, w)| *w != 0.0)
                    .map(|(n, w)| GridPoint {
                        point: x0,
                        weight: w.into(),
                        order: n,
                    })
                    .collect())
            }
            IterationAction::GeneralizedShift { g, h, tau } => {
                check_in(g, x0)?;
                let y = g
                    .inverse(g.eval(x0) + *tau * k as f64)
                    .map_err(|_| escape(x0, k, *tau, g))?;
                let w = (h.eval(x0) - h.eval(y)).exp();
                Ok(vec![GridPoint {
                    point: y,
                    weight: w.into(),
                    order: 0,
                }])
            }
            IterationAction::SymmetricShift { g, tau } => symmetric_grid(g, *tau, x0, k),
            IterationAction::HalfSumShift { tau } => symmetric_grid(&GPreset::Linear, *tau, x0, k),
            IterationAction::Dilation { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(GopError::InvalidInput(format!("dilation factor {a}")));
                }
                Ok(vec![GridPoint {
                    point: a.powi(k as i32) * x0,
                    weight: one,
                    order: 0,
                }])
            }
        }
    }
}

fn check_in(g: &GPreset, x0: f64) -> Result<()> {
    if g.domain().contains(x0) {
        Ok(())
    } else {
        Err(GopError::DomainEscape(format!(
            "start point {x0} is outside the domain {} of {}",
            g.domain(),
            g.name()
        )))
    }
}

fn escape(x0: f64, k: usize, tau: f64, g: &GPreset) -> GopError {
    GopError::DomainEscape(format!(
        "G(x0) + k tau = {} leaves the image {} of {} (x0 = {x0}, k = {k}, tau = {tau})",
        g.eval(x0) + tau * k as f64,
        g.image(),
        g.name()
    ))
}

fn symmetric_grid(g: &GPreset, tau: f64, x0: f64, k: usize) -> Result<Vec<GridPoint>> {
    check_in(g, x0)?;
    let g0 = g.eval(x0);
    let img = g.image();
    let scale = 0.5f64.powi(k as i32);
    let mut pts = Vec::with_capacity(k + 1);
    for r in 0..=k {
        let s = g0 + (k as f64 - 2.0 * r as f64) * tau;
        // cos(λ s) is even in s, so a sample at -s stands in for s.
        let target = if img.contains(s) {
            s
        } else if img.contains(-s) {
            -s
        } else {
            return Err(GopError::DomainEscape(format!(
                "symmetric shift needs G^(-1)({s}) outside the image {img} of {}",
                g.name()
            )));
        };
        pts.push(GridPoint {
            point: g.inverse(target)?,
            weight: Complex64::new(scale * binomial(k, r), 0.0),
            order: 0,
        });
    }
    Ok(merge_points(pts))
}

/// Iteration operator: a grid rule paired with the spectral map it realizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub action: IterationAction,
    pub map: SpectralMap,
}

impl Iteration {
    pub fn new(action: IterationAction, map: SpectralMap) -> Self {
        Self { action, map }
    }

    /// `φ(λ)` for a family parameter `λ`.
    pub fn mapped(&self, family: &EigenFamily, l: Complex64) -> Result<Complex64> {
        self.map.apply(family.spectral_parameter(l))
    }

    /// Family parameter from a root of the Prony polynomial.
    pub fn unmap(&self, family: &EigenFamily, mu: Complex64) -> Result<Complex64> {
        Ok(family.parameter_from_spectral(self.map.invert(mu)?))
    }

    /// Checks injectivity of the map and, at `x0`, that the grid rule
    /// multiplies random eigenfunctions by `φ(λ)`.
    pub fn validate_for(&self, family: &EigenFamily, x0: f64) -> Result<()> {
        self.map.check_injective(&family.region())?;
        let grid = match self.action.grid_points(x0, 1) {
            Ok(g) => g,
            Err(GopError::DomainEscape(_)) => return Ok(()),
            Err(e) => return Err(e),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..3 {
            let l = family.region().sample(&mut rng);
            let v = SparseExpansion::eigenfunction(family, l)?;
            let lhs = match apply_grid(&grid, &v) {
                Ok(z) => z,
                Err(GopError::Unsupported(_)) | Err(GopError::DomainViolation { .. }) => return Ok(()),
                Err(e) => return Err(e),
            };
            let rhs = self.mapped(family, l)? * v.eval(x0)?;
            if (lhs - rhs).norm() > 1e-8 * (1.0 + lhs.norm().max(rhs.norm())) {
                return Err(GopError::InvalidInput(format!(
                    "iteration {:?} with map {:?} does not act on the {} family as claimed",
                    self.action,
                    self.map,
                    family.name()
                )));
            }
        }
        Ok(())
    }
}

/// Evaluates a grid rule on an expansion.
pub fn apply_grid(grid: &[GridPoint], f: &SparseExpansion) -> Result<Complex64> {
    grid.iter().try_fold(Complex64::new(0.0, 0.0), |acc, p| {
        Ok(acc + p.weight * f.eval_derivative(p.point, p.order)?)
    })
}
