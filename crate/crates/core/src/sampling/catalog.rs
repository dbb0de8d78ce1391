//! Ready-made sampling schemes.

use num_complex::Complex64;

use super::functional::{MomentEncoding, SamplingFunctional};
use super::kernel::KernelExpr;
use super::scheme::{build_scheme, Scheme, SchemeOptions};
use crate::error::{GopError, Result};
use crate::families::{EigenFamily, FamilyKind, GPreset};
use crate::numkit::RealPoly;
use crate::operators::{DiffOperator, Iteration, IterationAction, SpectralMap};

fn family_mismatch(scheme: &str, family: &EigenFamily) -> GopError {
    GopError::InvalidInput(format!("the {scheme} scheme does not apply to the {} family", family.name()))
}

fn shift_iteration(tau: f64) -> Iteration {
    Iteration::new(IterationAction::plain_shift(tau), SpectralMap::ExpScale { tau })
}

fn derivative_iteration() -> Iteration {
    Iteration::new(IterationAction::PlainPower(DiffOperator::derivative()), SpectralMap::Identity)
}

fn powers_of(base: SamplingFunctional, action: &IterationAction, stride: usize, m: usize) -> Vec<SamplingFunctional> {
    (0..m).map(|k| base.clone().after(action.clone(), stride * k)).collect()
}

fn require_exponential(scheme: &str, family: &EigenFamily) -> Result<()> {
    match family.kind() {
        FamilyKind::Exponential => Ok(()),
        _ => Err(family_mismatch(scheme, family)),
    }
}

/// `f(x0 + (k + ℓ) τ)`: needs the `2M` samples `k = 0..2M-1`.
pub fn hankel_shift(family: &EigenFamily, x0: f64, tau: f64, m: usize) -> Result<Scheme> {
    strided_shift(family, x0, tau, 1, m)
}

/// `f(x0 + τ (s k + ℓ))`, i.e. `F_k = F ∘ S_τ^{sk}`. With `s = 2` this is the
/// `θ = 2τ` scheme on `3M - 1` samples.
pub fn strided_shift(family: &EigenFamily, x0: f64, tau: f64, stride: usize, m: usize) -> Result<Scheme> {
    require_exponential("shift", family)?;
    if stride == 0 {
        return Err(GopError::InvalidInput("stride must be positive".into()));
    }
    let it = shift_iteration(tau);
    let fs = powers_of(SamplingFunctional::point(x0), &it.action, stride, m);
    build_scheme(family, &it, fs, m, SchemeOptions::default())
}

/// `f^{(k + ℓ)}(x0)` with the operator `d/dx` itself.
pub fn derivative_hankel(family: &EigenFamily, x0: f64, m: usize) -> Result<Scheme> {
    require_exponential("derivative", family)?;
    let it = derivative_iteration();
    let fs = powers_of(SamplingFunctional::point(x0), &it.action, 1, m);
    build_scheme(family, &it, fs, m, SchemeOptions::default())
}

/// `f^{(ℓ)}(x0 + k τ)`: derivatives up to order `M` at `M` equidistant points.
pub fn mixed_derivative_shift(family: &EigenFamily, x0: f64, tau: f64, m: usize) -> Result<Scheme> {
    require_exponential("mixed derivative", family)?;
    let fs = powers_of(SamplingFunctional::point(x0), &IterationAction::plain_shift(tau), 1, m);
    build_scheme(family, &derivative_iteration(), fs, m, SchemeOptions::default())
}

fn cosine_iteration(family: &EigenFamily, tau: f64) -> Result<Iteration> {
    match family.kind() {
        FamilyKind::Cosine => Ok(Iteration::new(
            IterationAction::HalfSumShift { tau },
            SpectralMap::CosSqrt { tau },
        )),
        _ => Err(family_mismatch("cosine", family)),
    }
}

/// `F_k = F ∘ φ(A)^k` with `φ(A) = ½ (S_τ + S_{-τ})` and `F f = f(0)`.
pub fn half_sum_hankel(family: &EigenFamily, tau: f64, m: usize) -> Result<Scheme> {
    let it = cosine_iteration(family, tau)?;
    let fs = powers_of(SamplingFunctional::point(0.0), &it.action, 1, m);
    build_scheme(family, &it, fs, m, SchemeOptions::default())
}

/// `F_k f = ((S_{kτ} + S_{-kτ}) f)(0)`, the Chebyshev-basis variant.
pub fn chebyshev_identity(family: &EigenFamily, tau: f64, m: usize) -> Result<Scheme> {
    let it = cosine_iteration(family, tau)?;
    let one = Complex64::new(1.0, 0.0);
    let fs = (0..m)
        .map(|k| {
            let x = k as f64 * tau;
            SamplingFunctional::WeightedPoints {
                points: vec![(x, one), (-x, one)],
            }
        })
        .collect();
    build_scheme(family, &it, fs, m, SchemeOptions::default())
}

/// Symmetric generalized shift for `cos(λ G(x))` sampled at `x0`.
pub fn symmetric_shift_hankel(family: &EigenFamily, g: GPreset, x0: f64, tau: f64, m: usize) -> Result<Scheme> {
    if !matches!(family.kind(), FamilyKind::ChebyshevLike) && !matches!(family.kind(), FamilyKind::Cosine) {
        return Err(family_mismatch("symmetric shift", family));
    }
    let it = Iteration::new(IterationAction::SymmetricShift { g, tau }, SpectralMap::CosSqrt { tau });
    let fs = powers_of(SamplingFunctional::point(x0), &it.action, 1, m);
    build_scheme(family, &it, fs, m, SchemeOptions::default())
}

/// Chebyshev expansions from `f(cos(kτ))`, `k = 0..2M-1`.
pub fn chebyshev_hankel(family: &EigenFamily, tau: f64, m: usize) -> Result<Scheme> {
    symmetric_shift_hankel(family, GPreset::Arccos, 1.0, tau, m)
}

/// `f(G^{-1}(G(x0) + (k + ℓ) τ))` weighted by `e^{H(x0) - H(·)}`.
pub fn generalized_shift_hankel(family: &EigenFamily, x0: f64, tau: f64, m: usize) -> Result<Scheme> {
    let action = match family.kind() {
        FamilyKind::GeneralizedExp { g, h } => IterationAction::GeneralizedShift {
            g: *g,
            h: h.clone(),
            tau,
        },
        FamilyKind::Exponential => IterationAction::plain_shift(tau),
        _ => return Err(family_mismatch("generalized shift", family)),
    };
    let it = Iteration::new(action, SpectralMap::ExpScale { tau });
    let fs = powers_of(SamplingFunctional::point(x0), &it.action, 1, m);
    build_scheme(family, &it, fs, m, SchemeOptions::default())
}

/// Shifted Gaussians `e^{-α(x-λ)²}` from `f(kτ/(2α))`.
pub fn gaussian_shift(family: &EigenFamily, tau: f64, m: usize) -> Result<Scheme> {
    let FamilyKind::ShiftedGaussian { alpha } = family.kind() else {
        return Err(family_mismatch("gaussian shift", family));
    };
    let action = IterationAction::GeneralizedShift {
        g: GPreset::Linear,
        h: RealPoly::new(vec![0.0, 0.0, -alpha]),
        tau: tau / (2.0 * alpha),
    };
    let it = Iteration::new(action, SpectralMap::ExpScale { tau });
    let fs = powers_of(SamplingFunctional::point(0.0), &it.action, 1, m);
    build_scheme(family, &it, fs, m, SchemeOptions::default())
}

/// `f(a^{k+ℓ} x0)` for `x^λ`, eigenfunctions of `x d/dx`.
pub fn dilation_hankel(family: &EigenFamily, x0: f64, a: f64, m: usize) -> Result<Scheme> {
    if !(a.is_finite() && a > 0.0 && a != 1.0) {
        return Err(GopError::InvalidInput(format!("dilation factor {a}")));
    }
    match family.kind() {
        FamilyKind::GeneralizedExp { g: GPreset::Log, h } if h.is_zero() => {}
        _ => return Err(family_mismatch("dilation", family)),
    }
    let it = Iteration::new(IterationAction::Dilation { a }, SpectralMap::ExpScale { tau: a.ln() });
    let fs = powers_of(SamplingFunctional::point(x0), &it.action, 1, m);
    build_scheme(family, &it, fs, m, SchemeOptions::default())
}

/// `∫_0^1 f^{(k+ℓ)}(x) x^{2M} (1-x)^{2M} dx`, acquired as the monomial
/// moments `∫_0^1 f(x) x^s dx`, `s = 0..4M`.
pub fn moment_derivative(family: &EigenFamily, m: usize) -> Result<Scheme> {
    require_exponential("moment derivative", family)?;
    let it = derivative_iteration();
    let base = SamplingFunctional::moment(KernelExpr::beta_bump(2 * m)?);
    let fs = powers_of(base, &it.action, 1, m);
    build_scheme(family, &it, fs, m, SchemeOptions { encoding: MomentEncoding::Monomial })
}

/// `∫_0^1 f^{(ℓ)}(x + k) x^M (1-x)^M dx`, acquired as the moments
/// `∫_0^1 f(x + k) x^s dx`, `s = 0..2M`.
pub fn moment_shift(family: &EigenFamily, m: usize) -> Result<Scheme> {
    require_exponential("moment shift", family)?;
    let it = derivative_iteration();
    let base = SamplingFunctional::moment(KernelExpr::beta_bump(m)?);
    let fs = powers_of(base, &IterationAction::plain_shift(1.0), 1, m);
    build_scheme(family, &it, fs, m, SchemeOptions { encoding: MomentEncoding::Monomial })
}

/// Parameters of the Legendre moment kernel.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhiPParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta0: f64,
    pub beta1: f64,
}

impl Default for PhiPParams {
    fn default() -> Self {
        Self {
            a: -0.5,
            b: 0.75,
            alpha: 0.1,
            beta0: -2.0,
            beta1: 2.0,
        }
    }
}

/// `∫_a^b f A^{k+ℓ} φ_P` for the Legendre operator.
pub fn legendre_moments(family: &EigenFamily, params: PhiPParams, m: usize) -> Result<Scheme> {
    if !matches!(family.kind(), FamilyKind::Legendre) {
        return Err(family_mismatch("legendre moment", family));
    }
    let PhiPParams { a, b, alpha, beta0, beta1 } = params;
    if (a..=b).contains(&beta0) || (a..=b).contains(&beta1) || alpha < 0.0 {
        return Err(GopError::InvalidInput(format!(
            "need alpha >= 0 and beta0, beta1 outside [{a}, {b}]"
        )));
    }
    let kernel = KernelExpr::phi_p(a, b, m, alpha, beta0, beta1)?;
    let it = Iteration::new(IterationAction::PlainPower(DiffOperator::legendre()), SpectralMap::Identity);
    let fs = powers_of(SamplingFunctional::moment(kernel), &it.action, 1, m);
    build_scheme(family, &it, fs, m, SchemeOptions::default())
}

/// The sampling kernels `A^k φ_P`, `k = 0..count`.
pub fn legendre_kernels(params: PhiPParams, m: usize, count: usize) -> Result<Vec<KernelExpr>> {
    let PhiPParams { a, b, alpha, beta0, beta1 } = params;
    let mut k = KernelExpr::phi_p(a, b, m, alpha, beta0, beta1)?;
    let op = DiffOperator::legendre();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i > 0 {
            k = k.adjoint_apply(&op)?;
        }
        out.push(k.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{SparseExpansion, Term};
    use crate::sampling::assemble_matrix;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn raw_measurement_counts() {
        let e = EigenFamily::exponential(1.0).unwrap();
        for m in 1..=5 {
            assert_eq!(hankel_shift(&e, 0.0, 1.0, m).unwrap().raw_measurements().len(), 2 * m);
            assert_eq!(strided_shift(&e, 0.0, 1.0, 2, m).unwrap().raw_measurements().len(), 3 * m - 1);
            assert_eq!(mixed_derivative_shift(&e, 0.0, 1.0, m).unwrap().raw_measurements().len(), m * (m + 1));
            assert_eq!(derivative_hankel(&e, 0.0, m).unwrap().raw_measurements().len(), 2 * m);
            // x^0 never appears: the kernels keep a root of order >= 1 at x = 0
            assert_eq!(moment_derivative(&e, m).unwrap().raw_measurements().len(), 4 * m);
            assert_eq!(moment_shift(&e, m).unwrap().raw_measurements().len(), m * (2 * m + 1));
        }
        let cosf = EigenFamily::cosine(10.0).unwrap();
        for m in 1..=4 {
            let s = half_sum_hankel(&cosf, PI / 10.0, m).unwrap();
            assert_eq!(s.raw_measurements().len(), 2 * m);
            assert!(s.is_hankel());
        }
        let leg = legendre_moments(&EigenFamily::legendre(), PhiPParams::default(), 3).unwrap();
        assert_eq!(leg.raw_measurements().len(), 6);
        assert!(leg.is_hankel());
    }

    #[test]
    fn strided_matrix_is_not_hankel_but_admissible() {
        let e = EigenFamily::exponential(1.0).unwrap();
        let s = strided_shift(&e, 0.0, 1.0, 2, 3).unwrap();
        assert!(!s.is_hankel());
        assert_eq!(s.admissibility(), crate::sampling::Admissibility::LemmaShape);
    }

    #[test]
    fn chebyshev_identity_matrix_closed_form() {
        let (cap, tau) = (10.0, PI / 10.0);
        let fam = EigenFamily::cosine(cap).unwrap();
        let terms = [(2.0, c(1.0, 1.0)), (5.0, c(-3.0, 0.0)), (7.5, c(0.5, 0.0))];
        let f = SparseExpansion::new(
            fam.clone(),
            terms.iter().map(|&(a, k)| Term { lambda: c(a, 0.0), coeff: k }).collect(),
        )
        .unwrap();
        let s = chebyshev_identity(&fam, tau, 3).unwrap();
        assert!(matches!(s.admissibility(), crate::sampling::Admissibility::Witness { .. }));
        let mat = assemble_matrix(&s, &s.simulate(&f).unwrap()).unwrap().matrix;
        for k in 0..3 {
            for l in 0..4 {
                let expect: Complex64 = terms
                    .iter()
                    .map(|&(a, cj)| cj * 2.0 * (a * tau).cos().powi(l as i32) * (a * k as f64 * tau).cos())
                    .sum();
                assert!((mat[(k, l)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_family_is_rejected() {
        let e = EigenFamily::exponential(1.0).unwrap();
        assert!(half_sum_hankel(&e, 0.1, 2).is_err());
        assert!(legendre_moments(&e, PhiPParams::default(), 2).is_err());
    }

    #[test]
    fn shift_beyond_generator_image_escapes() {
        let fam = EigenFamily::generalized_exp(GPreset::Cos, RealPoly::zero(), 4.0).unwrap();
        // G(0) = 1 and the image of cos on [0, π] is [-1, 1]
        assert!(generalized_shift_hankel(&fam, 0.0, -0.25, 4).is_ok());
        assert!(matches!(
            generalized_shift_hankel(&fam, 0.0, -0.5, 4),
            Err(GopError::DomainEscape(_))
        ));
    }
}
