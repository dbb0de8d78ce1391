//! Eigenfunction families `λ ↦ v_λ` and sparse expansions over them.

mod presets;

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use presets::GPreset;

use crate::error::{GopError, Result};
use crate::numkit::{Jet, RealPoly};

/// Slack used when testing membership in intervals and regions.
const MEMBERSHIP_TOL: f64 = 1e-12;

/// Real interval, possibly unbounded; open ends exclude the endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn real_line() -> Self {
        Self::closed(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `(0, ∞)`
    pub fn positive() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_open: true,
            hi_open: false,
        }
    }

    /// `(-∞, 0)`
    pub fn negative() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: 0.0,
            lo_open: false,
            hi_open: true,
        }
    }

    fn slack(v: f64) -> f64 {
        MEMBERSHIP_TOL * v.abs().max(1.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        let lo_ok = if self.lo_open {
            x > self.lo
        } else {
            x >= self.lo - Self::slack(self.lo)
        };
        let hi_ok = if self.hi_open {
            x < self.hi
        } else {
            x <= self.hi + Self::slack(self.hi)
        };
        lo_ok && hi_ok
    }

    /// Pulls a point that passed [`Interval::contains`] onto the closed interval.
    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo).min(self.hi)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_open { '(' } else { '[' };
        let r = if self.hi_open { ')' } else { ']' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// Admissible eigen-parameter region of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EigenRegion {
    /// `ℝ + i[-w, w)`
    Strip { half_width: f64 },
    /// `[0, upper)` on the real axis
    RealInterval { upper: f64 },
    /// `{0, 1, 2, ...}`
    NonNegInteger,
    /// the real axis
    RealLine,
}

impl EigenRegion {
    pub fn contains(&self, l: Complex64) -> bool {
        let tol = MEMBERSHIP_TOL * l.norm().max(1.0);
        match *self {
            EigenRegion::Strip { half_width } => {
                l.re.is_finite() && l.im >= -half_width - tol && l.im < half_width + tol
            }
            EigenRegion::RealInterval { upper } => {
                l.im.abs() <= tol && l.re >= -tol && l.re < upper + tol
            }
            EigenRegion::NonNegInteger => {
                l.im.abs() <= tol && l.re >= -tol && (l.re - l.re.round()).abs() <= tol
            }
            EigenRegion::RealLine => l.im.abs() <= tol && l.re.is_finite(),
        }
    }

    /// Draws a parameter from a desk-scale part of the region.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Complex64 {
        match *self {
            EigenRegion::Strip { half_width } => Complex64::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-half_width..half_width),
            ),
            EigenRegion::RealInterval { upper } => Complex64::new(rng.random_range(0.0..upper), 0.0),
            EigenRegion::NonNegInteger => Complex64::new(rng.random_range(0..20) as f64, 0.0),
            EigenRegion::RealLine => Complex64::new(rng.random_range(-3.0..3.0), 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `e^{λx}`, operator `d/dx`
    Exponential,
    /// `cos(λx)`, operator `-d²/dx²`
    Cosine,
    /// `exp(H(x) + λ G(x))`, operator `(1/G') d/dx - H'/G'`
    GeneralizedExp { g: GPreset, h: RealPoly },
    /// `exp(-α (x - λ)²)`, operator `(1/2α) d/dx + x`
    ShiftedGaussian { alpha: f64 },
    /// `cos(λ arccos x)`, operator `(1 - x²) d²/dx² - x d/dx`
    ChebyshevLike,
    /// `P_n`, operator `(x² - 1) d²/dx² + 2x d/dx`; parameter is the degree `n`
    Legendre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenFamily {
    kind: FamilyKind,
    domain: Interval,
    band_constant: f64,
}

impl EigenFamily {
    /// `e^{Tx}` with `T ∈ ℝ + i[-Cπ, Cπ)`.
    pub fn exponential(band_constant: f64) -> Result<Self> {
        Self::build(FamilyKind::Exponential, Interval::real_line(), band_constant)
    }

    /// `cos(αx)` with `α ∈ [0, C)`.
    pub fn cosine(band_constant: f64) -> Result<Self> {
        Self::build(FamilyKind::Cosine, Interval::real_line(), band_constant)
    }

    /// `exp(H + λG)` with `|Im λ| ≤ C`, on the natural interval of `g`.
    pub fn generalized_exp(g: GPreset, h: RealPoly, band_constant: f64) -> Result<Self> {
        g.validate()?;
        Self::build(FamilyKind::GeneralizedExp { g, h }, g.domain(), band_constant)
    }

    pub fn shifted_gaussian(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha != 0.0) {
            return Err(GopError::InvalidInput(format!("gaussian width alpha = {alpha}")));
        }
        Self::build(FamilyKind::ShiftedGaussian { alpha }, Interval::real_line(), 1.0)
    }

    /// `cos(λ arccos x)` with `λ ∈ [0, C)`.
    pub fn chebyshev_like(band_constant: f64) -> Result<Self> {
        Self::build(FamilyKind::ChebyshevLike, Interval::closed(-1.0, 1.0), band_constant)
    }

    pub fn legendre() -> Self {
        Self {
            kind: FamilyKind::Legendre,
            domain: Interval::closed(-1.0, 1.0),
            band_constant: 1.0,
        }
    }

    fn build(kind: FamilyKind, domain: Interval, band_constant: f64) -> Result<Self> {
        if !(band_constant.is_finite() && band_constant > 0.0) {
            return Err(GopError::InvalidInput(format!("band constant must be positive, got {band_constant}")));
        }
        Ok(Self {
            kind,
            domain,
            band_constant,
        })
    }

    /// Restricts the domain to a sub-interval of the current one.
    pub fn with_domain(mut self, domain: Interval) -> Result<Self> {
        if !(self.domain.contains(domain.lo) || domain.lo == self.domain.lo)
            || !(self.domain.contains(domain.hi) || domain.hi == self.domain.hi)
            || domain.lo > domain.hi
        {
            return Err(GopError::InvalidInput(format!(
                "domain {domain} is not inside {}",
                self.domain
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn band_constant(&self) -> f64 {
        self.band_constant
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Exponential => "exponential",
            FamilyKind::Cosine => "cosine",
            FamilyKind::GeneralizedExp { .. } => "generalized_exp",
            FamilyKind::ShiftedGaussian { .. } => "shifted_gaussian",
            FamilyKind::ChebyshevLike => "chebyshev_like",
            FamilyKind::Legendre => "legendre",
        }
    }

    pub fn region(&self) -> EigenRegion {
        let c = self.band_constant;
        match self.kind {
            FamilyKind::Exponential => EigenRegion::Strip {
                half_width: c * std::f64::consts::PI,
            },
            FamilyKind::GeneralizedExp { .. } => EigenRegion::Strip { half_width: c },
            FamilyKind::Cosine | FamilyKind::ChebyshevLike => EigenRegion::RealInterval { upper: c },
            FamilyKind::ShiftedGaussian { .. } => EigenRegion::RealLine,
            FamilyKind::Legendre => EigenRegion::NonNegInteger,
        }
    }

    /// Even families allow folding `f^{(o)}(-x) = (-1)^o f^{(o)}(x)`.
    pub fn is_even(&self) -> bool {
        matches!(self.kind, FamilyKind::Cosine)
    }

    pub fn check_parameter(&self, l: Complex64) -> Result<()> {
        if self.region().contains(l) {
            Ok(())
        } else {
            Err(GopError::RegionViolation(l))
        }
    }

    pub fn check_point(&self, x: f64) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(GopError::DomainViolation {
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
            })
        }
    }

    /// Eigenvalue of the family's operator for parameter `l`.
    ///
    /// The chebyshev-like family reports `-λ²`, the eigenvalue of the
    /// second-order operator; its iteration maps act on `λ` itself.
    pub fn eigenvalue_of(&self, l: Complex64) -> Result<Complex64> {
        self.check_parameter(l)?;
        Ok(match self.kind {
            FamilyKind::Exponential | FamilyKind::GeneralizedExp { .. } | FamilyKind::ShiftedGaussian { .. } => l,
            FamilyKind::Cosine => l * l,
            FamilyKind::ChebyshevLike => -l * l,
            FamilyKind::Legendre => l * (l + 1.0),
        })
    }

    /// Value fed to the spectral map for parameter `l`.
    pub fn spectral_parameter(&self, l: Complex64) -> Complex64 {
        match self.kind {
            FamilyKind::Legendre => l * (l + 1.0),
            _ => l,
        }
    }

    /// Inverse of [`EigenFamily::spectral_parameter`]; for Legendre this is
    /// the unrounded degree `(-1 + sqrt(1 + 4μ)) / 2`.
    pub fn parameter_from_spectral(&self, mu: Complex64) -> Complex64 {
        match self.kind {
            FamilyKind::Legendre => ((mu * 4.0 + 1.0).sqrt() - 1.0) * 0.5,
            _ => mu,
        }
    }

    /// Snaps a recovered parameter onto the region where the family
    /// requires it (integer Legendre degrees, real frequencies).
    pub fn snap_parameter(&self, l: Complex64) -> Complex64 {
        match self.kind {
            FamilyKind::Legendre => Complex64::new(l.re.round().max(0.0), 0.0),
            _ => l,
        }
    }

    fn legendre_degree(l: Complex64) -> Result<usize> {
        if l.im != 0.0 || l.re < 0.0 || l.re.fract() != 0.0 {
            return Err(GopError::RegionViolation(l));
        }
        Ok(l.re as usize)
    }

    /// `v_λ(x)`.
    pub fn eigenfunction(&self, l: Complex64, x: f64) -> Result<Complex64> {
        self.check_point(x)?;
        let xc = Complex64::new(x, 0.0);
        Ok(match &self.kind {
            FamilyKind::Exponential => (l * x).exp(),
            FamilyKind::Cosine => (l * x).cos(),
            FamilyKind::GeneralizedExp { g, h } => (h.eval(x) + l * g.eval(x)).exp(),
            FamilyKind::ShiftedGaussian { alpha } => {
                let d = xc - l;
                (-d * d * *alpha).exp()
            }
            FamilyKind::ChebyshevLike => (l * x.clamp(-1.0, 1.0).acos()).cos(),
            FamilyKind::Legendre => Complex64::new(legendre_eval(Self::legendre_degree(l)?, x), 0.0),
        })
    }

    /// Taylor jet of `v_λ` at `x` up to `order`.
    pub fn eigenfunction_jet(&self, l: Complex64, x: f64, order: usize) -> Result<Jet> {
        self.check_point(x)?;
        let t = Jet::variable(x, order);
        let jet = match &self.kind {
            FamilyKind::Exponential => t.scale(l).exp(),
            FamilyKind::Cosine => t.scale(l).cos(),
            FamilyKind::GeneralizedExp { g, h } => {
                let hj = poly_jet(h, &t);
                (&hj + &g.jet(&t).scale(l)).exp()
            }
            FamilyKind::ShiftedGaussian { alpha } => {
                let d = t.add_scalar(-l);
                (&d * &d).scale((-*alpha).into()).exp()
            }
            FamilyKind::ChebyshevLike => {
                if order > 0 && (x.abs() - 1.0).abs() < MEMBERSHIP_TOL {
                    return Err(GopError::Unsupported(
                        "derivatives of the chebyshev-like family at x = ±1".into(),
                    ));
                }
                t.acos().scale(l).cos()
            }
            FamilyKind::Legendre => legendre_jet(Self::legendre_degree(l)?, &t),
        };
        if jet.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(GopError::NonFinite("eigenfunction derivatives"));
        }
        Ok(jet)
    }

    /// Applies the family's operator to `v_λ` at `x` using exact derivatives.
    pub fn apply_operator(&self, l: Complex64, x: f64) -> Result<Complex64> {
        let j = self.eigenfunction_jet(l, x, 2)?;
        let (v, d1, d2) = (j.derivative(0), j.derivative(1), j.derivative(2));
        Ok(match &self.kind {
            FamilyKind::Exponential => d1,
            FamilyKind::Cosine => -d2,
            FamilyKind::GeneralizedExp { g, h } => {
                let gp = g.derivative(x);
                d1 / gp - v * h.derivative().eval(x) / gp
            }
            FamilyKind::ShiftedGaussian { alpha } => d1 / (2.0 * alpha) + v * x,
            FamilyKind::ChebyshevLike => d2 * (1.0 - x * x) - d1 * x,
            FamilyKind::Legendre => d2 * (x * x - 1.0) + d1 * (2.0 * x),
        })
    }
}

fn poly_jet(p: &RealPoly, t: &Jet) -> Jet {
    p.coeffs()
        .iter()
        .rev()
        .fold(Jet::constant(Complex64::new(0.0, 0.0), t.order()), |acc, &c| {
            (&acc * t).add_scalar(c.into())
        })
}

/// `P_n(x)` by the three-term recurrence.
pub fn legendre_eval(n: usize, x: f64) -> f64 {
    if x == 1.0 {
        return 1.0;
    }
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn legendre_jet(n: usize, t: &Jet) -> Jet {
    let one = Jet::constant(Complex64::new(1.0, 0.0), t.order());
    if n == 0 {
        return one;
    }
    let (mut p0, mut p1) = (one, t.clone());
    for k in 1..n {
        let kf = k as f64;
        let a = (&p1 * t).scale(((2.0 * kf + 1.0) / (kf + 1.0)).into());
        let b = p0.scale((kf / (kf + 1.0)).into());
        p0 = p1;
        p1 = &a - &b;
    }
    p1
}

/// One term `c · v_λ` of a sparse expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub lambda: Complex64,
    pub coeff: Complex64,
}

/// `f = Σ c_j v_{λ_j}` over a fixed family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseExpansion {
    family: EigenFamily,
    terms: Vec<Term>,
}

impl SparseExpansion {
    pub fn new(family: EigenFamily, terms: Vec<Term>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            family.check_parameter(t.lambda)?;
            if t.coeff == Complex64::new(0.0, 0.0) {
                return Err(GopError::InvalidInput(format!("coefficient {i} is zero")));
            }
            if terms[..i].iter().any(|s| s.lambda == t.lambda) {
                return Err(GopError::InvalidInput(format!("parameter {} appears twice", t.lambda)));
            }
        }
        Ok(Self { family, terms })
    }

    /// Single eigenfunction with coefficient one.
    pub fn eigenfunction(family: &EigenFamily, lambda: Complex64) -> Result<Self> {
        Self::new(
            family.clone(),
            vec![Term {
                lambda,
                coeff: Complex64::new(1.0, 0.0),
            }],
        )
    }

    pub fn family(&self) -> &EigenFamily {
        &self.family
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn m(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        self.terms.iter().try_fold(Complex64::new(0.0, 0.0), |acc, t| {
            Ok(acc + t.coeff * self.family.eigenfunction(t.lambda, x)?)
        })
    }

    pub fn eval_derivative(&self, x: f64, order: usize) -> Result<Complex64> {
        if order == 0 {
            return self.eval(x);
        }
        self.terms.iter().try_fold(Complex64::new(0.0, 0.0), |acc, t| {
            Ok(acc + t.coeff * self.family.eigenfunction_jet(t.lambda, x, order)?.derivative(order))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rodrigues_p9(x: f64) -> f64 {
        // P_9(x) = 1/(2^9 9!) d^9/dx^9 (x^2 - 1)^9, expanded with integers.
        let n = 9i128;
        let mut acc = 0.0;
        for k in 0..=n {
            let power = 2 * k;
            if power < n {
                continue;
            }
            let binom = (0..k).fold(1i128, |b, i| b * (n - i) / (i + 1));
            let sign = if (n - k) % 2 == 0 { 1 } else { -1 };
            let falling: i128 = (0..n).map(|i| power - i).product();
            acc += (sign * binom * falling) as f64 * x.powi((power - n) as i32);
        }
        let fact9: f64 = (1..=9).map(|i| i as f64).product();
        acc / (2f64.powi(9) * fact9)
    }

    #[test]
    fn legendre_matches_rodrigues() {
        assert!((legendre_eval(9, 0.3) - rodrigues_p9(0.3)).abs() < 1e-12);
        assert_eq!(legendre_eval(0, -0.7), 1.0);
        assert_eq!(legendre_eval(1, 0.5), 0.5);
        assert_eq!(legendre_eval(17, 1.0), 1.0);
    }

    #[test]
    fn legendre_table_values_at_one() {
        let fam = EigenFamily::legendre();
        let f = SparseExpansion::new(
            fam,
            vec![
                Term { lambda: c(1.0, 0.0), coeff: c(1.703, 0.0) },
                Term { lambda: c(4.0, 0.0), coeff: c(3.193, 0.0) },
                Term { lambda: c(9.0, 0.0), coeff: c(3.710, 0.0) },
            ],
        )
        .unwrap();
        assert!((f.eval(1.0).unwrap() - c(8.606, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn simple_evaluations() {
        let e = SparseExpansion::eigenfunction(&EigenFamily::exponential(1.0).unwrap(), c(0.0, 0.0)).unwrap();
        assert_eq!(e.eval(5.0).unwrap(), c(1.0, 0.0));
        let cos = SparseExpansion::new(
            EigenFamily::cosine(10.0).unwrap(),
            vec![
                Term { lambda: c(2.0, 0.0), coeff: c(1.0, 0.0) },
                Term { lambda: c(3.0, 0.0), coeff: c(-1.0, 0.0) },
            ],
        )
        .unwrap();
        assert_eq!(cos.eval(0.0).unwrap(), c(0.0, 0.0));
        let d2 = cos.eval_derivative(0.4, 2).unwrap();
        let expect = -4.0 * (0.8f64).cos() + 9.0 * (1.2f64).cos();
        assert!((d2 - c(expect, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn derivative_rules() {
        let t = c(0.3, 1.1);
        let f = SparseExpansion::new(
            EigenFamily::exponential(1.0).unwrap(),
            vec![Term { lambda: t, coeff: c(2.0, -1.0) }],
        )
        .unwrap();
        for m in 0..6 {
            let expect = c(2.0, -1.0) * t.powu(m) * (t * 0.8).exp();
            assert!((f.eval_derivative(0.8, m as usize).unwrap() - expect).norm() < 1e-12);
        }
        let g = SparseExpansion::eigenfunction(&EigenFamily::shifted_gaussian(1.0).unwrap(), c(0.6, 0.0)).unwrap();
        assert!(g.eval_derivative(0.6, 1).unwrap().norm() < 1e-15);
    }

    #[test]
    fn domain_and_region_violations() {
        let cheb = EigenFamily::chebyshev_like(5.0).unwrap();
        assert!(matches!(cheb.eigenfunction(c(1.0, 0.0), 1.5), Err(GopError::DomainViolation { .. })));
        let leg = EigenFamily::legendre();
        assert!(matches!(leg.eigenvalue_of(c(2.5, 0.0)), Err(GopError::RegionViolation(_))));
        assert_eq!(leg.eigenvalue_of(c(4.0, 0.0)).unwrap(), c(20.0, 0.0));
        assert_eq!(EigenFamily::cosine(5.0).unwrap().eigenvalue_of(c(3.0, 0.0)).unwrap(), c(9.0, 0.0));
        let e = EigenFamily::exponential(1.0).unwrap();
        assert_eq!(e.eigenvalue_of(c(0.0, 1.0)).unwrap(), c(0.0, 1.0));
        assert!(e.eigenvalue_of(c(0.0, 4.0)).is_err());
    }

    #[test]
    fn expansion_validation() {
        let fam = EigenFamily::exponential(1.0).unwrap();
        let dup = vec![
            Term { lambda: c(0.1, 0.0), coeff: c(1.0, 0.0) },
            Term { lambda: c(0.1, 0.0), coeff: c(2.0, 0.0) },
        ];
        assert!(SparseExpansion::new(fam.clone(), dup).is_err());
        let zero = vec![Term { lambda: c(0.1, 0.0), coeff: c(0.0, 0.0) }];
        assert!(SparseExpansion::new(fam, zero).is_err());
    }

    fn all_families() -> Vec<EigenFamily> {
        let mut v = vec![
            EigenFamily::exponential(1.0).unwrap(),
            EigenFamily::cosine(5.0).unwrap(),
            EigenFamily::shifted_gaussian(1.3).unwrap(),
            EigenFamily::chebyshev_like(5.0).unwrap(),
            EigenFamily::legendre(),
        ];
        for g in GPreset::catalog() {
            v.push(EigenFamily::generalized_exp(g, RealPoly::new(vec![0.1, -0.2, 0.05]), 1.0).unwrap());
        }
        v
    }

    fn interior_point<R: Rng>(dom: Interval, rng: &mut R) -> f64 {
        let lo = if dom.lo.is_finite() { dom.lo } else { -2.0 };
        let hi = if dom.hi.is_finite() { dom.hi } else { lo.max(-2.0) + 4.0 };
        let (lo, hi) = (lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo));
        rng.random_range(lo..hi)
    }

    #[test]
    fn eigen_relation_holds_for_every_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for fam in all_families() {
            for _ in 0..100 {
                let l = fam.region().sample(&mut rng);
                let x = interior_point(fam.domain(), &mut rng);
                let lhs = fam.apply_operator(l, x).unwrap();
                let v = fam.eigenfunction(l, x).unwrap();
                let rhs = fam.eigenvalue_of(l).unwrap() * v;
                assert!(
                    (lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm() + lhs.norm()),
                    "{} λ={l} x={x}: {lhs} vs {rhs}",
                    fam.name()
                );
            }
        }
    }

    #[test]
    fn injectivity_witness_on_probe_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for fam in all_families() {
            let dom = fam.domain();
            let mut probe_rng = ChaCha8Rng::seed_from_u64(3);
            let probes: Vec<f64> = (0..50).map(|_| interior_point(dom, &mut probe_rng)).collect();
            for _ in 0..20 {
                let a = fam.region().sample(&mut rng);
                let b = fam.region().sample(&mut rng);
                if (a - b).norm() < 1e-6 {
                    continue;
                }
                let sep = probes
                    .iter()
                    .map(|&x| (fam.eigenfunction(a, x).unwrap() - fam.eigenfunction(b, x).unwrap()).norm())
                    .fold(0.0, f64::max);
                assert!(sep > 1e-8, "{}: {a} and {b} indistinguishable", fam.name());
            }
        }
    }

    #[test]
    fn eval_is_linear_in_coefficients() {
        let fam = EigenFamily::exponential(1.0).unwrap();
        let make = |c1: Complex64, c2: Complex64| {
            SparseExpansion::new(
                fam.clone(),
                vec![Term { lambda: c(0.2, 1.0), coeff: c1 }, Term { lambda: c(-0.5, -2.0), coeff: c2 }],
            )
            .unwrap()
        };
        let x = 0.37;
        let a = make(c(1.0, 0.0), c(2.0, 1.0)).eval(x).unwrap();
        let b = make(c(3.0, 0.0), c(6.0, 3.0)).eval(x).unwrap();
        assert!((b - a * 3.0).norm() < 1e-13);
    }
}
