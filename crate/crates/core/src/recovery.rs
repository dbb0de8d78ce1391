//! The recovery pipeline: kernel vector, Prony roots, parameters and
//! coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GopError, Result};
use crate::families::{EigenFamily, FamilyKind};
use crate::numkit::{lstsq_with_tol, null_vector_with_tol, poly_roots, singular_values, ComplexMatrix, ComplexPoly, DEFAULT_RANK_TOL};
use crate::sampling::{assemble_matrix, Measurements, Scheme, Signal};

/// Two mapped roots closer than this are treated as one.
pub const DUPLICATE_ROOT_TOL: f64 = 1e-10;
/// Default `σ_M / σ_1` floor for the sampling matrix. Moment schemes for
/// second-order operators are graded like `λ^{2M}`, so this sits well
/// below the generic solver tolerance.
pub const RECOVERY_RANK_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    /// Relative singular-value threshold for the kernel vector.
    pub rank_tol: f64,
    /// Relative singular-value threshold for the coefficient system.
    pub lstsq_tol: f64,
    /// Snap parameters onto the family's lattice (Legendre degrees).
    pub snap: bool,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            rank_tol: RECOVERY_RANK_TOL,
            lstsq_tol: DEFAULT_RANK_TOL,
            snap: true,
        }
    }
}

/// Prony root with no admissible preimage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRoot {
    pub root: Complex64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    /// Family parameters used for the coefficient solve.
    pub eigenvalues: Vec<Complex64>,
    /// Parameters straight from the inverted map, before snapping.
    pub unrounded: Vec<Complex64>,
    /// Prony roots `φ(λ_j)` aligned with `eigenvalues`.
    pub mapped_roots: Vec<Complex64>,
    pub coefficients: Vec<Complex64>,
    /// Kernel vector with `p_M = 1`, ascending powers.
    pub prony_coeffs: Vec<Complex64>,
    /// `‖H p‖ / ‖H‖_F`
    pub prony_residual: f64,
    /// `‖model − measured‖ / ‖measured‖` over raw measurements.
    pub residual_norm: f64,
    /// Singular values of the sampling matrix, descending.
    pub singular_values: Vec<f64>,
    /// Smallest distance between two recovered parameters.
    pub min_separation: f64,
    pub rejected_roots: Vec<RejectedRoot>,
    pub warnings: Vec<String>,
}

impl RecoveryResult {
    /// `σ_M / σ_1` of the sampling matrix.
    pub fn conditioning(&self) -> f64 {
        match (self.singular_values.first(), self.singular_values.last()) {
            (Some(&s1), Some(&sm)) if s1 > 0.0 => sm / s1,
            _ => 0.0,
        }
    }
}

/// A single eigenfunction evaluated without the region check, so that
/// unrounded or noisy parameters can still be probed.
struct Probe<'a> {
    family: &'a EigenFamily,
    lambda: Complex64,
}

impl Signal for Probe<'_> {
    fn value(&self, x: f64) -> Result<Complex64> {
        self.family.eigenfunction(self.lambda, x)
    }

    fn derivative(&self, x: f64, order: usize) -> Result<Complex64> {
        if order == 0 {
            return self.value(x);
        }
        Ok(self.family.eigenfunction_jet(self.lambda, x, order)?.derivative(order))
    }
}

fn sort_key(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn min_distance(zs: &[Complex64]) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..zs.len() {
        for j in 0..i {
            d = d.min((zs[i] - zs[j]).norm());
        }
    }
    d
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Runs the full pipeline on measured data.
pub fn recover(scheme: &Scheme, measurements: &Measurements) -> Result<RecoveryResult> {
    recover_with(scheme, measurements, &RecoveryOptions::default())
}

pub fn recover_with(scheme: &Scheme, measurements: &Measurements, opts: &RecoveryOptions) -> Result<RecoveryResult> {
    let family = scheme.family();
    let iteration = scheme.iteration();
    let sm = assemble_matrix(scheme, measurements)?;
    let h = &sm.matrix;
    if h.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(GopError::NonFinite("sampling matrix"));
    }
    let sigma = singular_values(h);
    let p = null_vector_with_tol(h, opts.rank_tol)?;
    let hp = h.mul_vec(&p)?;
    let prony_residual = norm(&hp) / h.frobenius_norm();
    let roots = poly_roots(&ComplexPoly::new(p.clone()))?;

    let mut warnings = Vec::new();
    let mut rejected = Vec::new();
    let mut accepted: Vec<(Complex64, Complex64, Complex64)> = Vec::new();
    for &mu in &roots {
        match iteration.unmap(family, mu) {
            Ok(raw) => {
                let snapped = if opts.snap { family.snap_parameter(raw) } else { raw };
                if !family.region().contains(snapped) {
                    warnings.push(format!("parameter {snapped} lies outside the {} region", family.name()));
                }
                accepted.push((snapped, raw, mu));
            }
            Err(e) => rejected.push(RejectedRoot {
                root: mu,
                reason: e.to_string(),
            }),
        }
    }
    if !rejected.is_empty() {
        warnings.push(format!("{} Prony root(s) had no preimage and were dropped", rejected.len()));
    }
    if accepted.is_empty() {
        return Err(GopError::BranchViolation(rejected[0].root));
    }
    accepted.sort_by(|a, b| sort_key(&a.0, &b.0));
    let eigenvalues: Vec<Complex64> = accepted.iter().map(|a| a.0).collect();
    let min_separation = min_distance(&eigenvalues);
    if matches!(family.kind(), FamilyKind::Legendre) && opts.snap && min_separation < 0.5 {
        return Err(GopError::RankDeficient { ratio: 0.0, tol: DUPLICATE_ROOT_TOL });
    }

    let raw = scheme.lookup(measurements)?;
    let (coefficients, model) = solve_with_raw(&eigenvalues, scheme, &raw, opts.lstsq_tol)?;
    let resid: Vec<Complex64> = model.iter().zip(&raw).map(|(m, r)| m - r).collect();
    let scale = norm(&raw);
    let residual_norm = if scale > 0.0 { norm(&resid) / scale } else { norm(&resid) };
    if sigma.len() >= scheme.m() && sigma[0] > 0.0 && sigma[scheme.m() - 1] / sigma[0] < 1e-8 {
        warnings.push(format!(
            "sampling matrix is ill conditioned (sigma_M / sigma_1 = {:.3e})",
            sigma[scheme.m() - 1] / sigma[0]
        ));
    }
    Ok(RecoveryResult {
        unrounded: accepted.iter().map(|a| a.1).collect(),
        mapped_roots: accepted.iter().map(|a| a.2).collect(),
        eigenvalues,
        coefficients,
        prony_coeffs: p,
        prony_residual,
        residual_norm,
        singular_values: sigma,
        min_separation,
        rejected_roots: rejected,
        warnings,
    })
}

/// Least-squares coefficients over the distinct equations
/// `F_k(φ(A)^ℓ f) = Σ c_j φ(λ_j)^ℓ F_k(v_{λ_j})` of the scheme.
pub fn solve_coefficients(params: &[Complex64], scheme: &Scheme, measurements: &Measurements) -> Result<Vec<Complex64>> {
    let raw = scheme.lookup(measurements)?;
    Ok(solve_with_raw(params, scheme, &raw, DEFAULT_RANK_TOL)?.0)
}

fn solve_with_raw(
    params: &[Complex64],
    scheme: &Scheme,
    raw: &[Complex64],
    tol: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let family = scheme.family();
    let iteration = scheme.iteration();
    let mapped: Vec<Complex64> = params
        .iter()
        .map(|&l| iteration.mapped(family, l))
        .collect::<Result<_>>()?;
    let scale = mapped.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if min_distance(&mapped) < DUPLICATE_ROOT_TOL * scale {
        return Err(GopError::RankDeficient {
            ratio: 0.0,
            tol: DUPLICATE_ROOT_TOL,
        });
    }
    // raw measurements of each eigenfunction, column by column
    let basis: Vec<Vec<Complex64>> = params
        .iter()
        .map(|&lambda| scheme.evaluate_raw(&Probe { family, lambda }))
        .collect::<Result<_>>()?;
    let rows = scheme.distinct_entries();
    let a = ComplexMatrix::from_fn(rows.len(), params.len(), |r, j| {
        let (k, l) = rows[r];
        scheme.entry(k, l).eval(&basis[j])
    });
    let b: Vec<Complex64> = rows.iter().map(|&(k, l)| scheme.entry(k, l).eval(raw)).collect();
    let c = if rows.len() >= params.len() {
        lstsq_with_tol(&a, &b, tol)?
    } else {
        return Err(GopError::Shape(format!(
            "{} equations for {} coefficients",
            rows.len(),
            params.len()
        )));
    };
    let model = (0..raw.len())
        .map(|i| c.iter().zip(&basis).map(|(cj, col)| cj * col[i]).sum())
        .collect();
    Ok((c, model))
}

/// Number of singular values above `tol · σ_1`.
pub fn estimate_order(matrix: &ComplexMatrix, tol: f64) -> usize {
    let s = singular_values(matrix);
    match s.first() {
        Some(&s1) if s1 > 0.0 => s.iter().filter(|&&x| x / s1 > tol).count(),
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{SparseExpansion, Term};
    use crate::sampling::{build_rectangular, hankel_shift, half_sum_hankel, legendre_moments, PhiPParams, SamplingFunctional, SchemeOptions};
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn expansion(fam: &EigenFamily, terms: &[(Complex64, Complex64)]) -> SparseExpansion {
        SparseExpansion::new(
            fam.clone(),
            terms.iter().map(|&(lambda, coeff)| Term { lambda, coeff }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_exponential() {
        let fam = EigenFamily::exponential(1.0).unwrap();
        let s = hankel_shift(&fam, 0.0, 1.0, 1).unwrap();
        let mut meas = Measurements::new();
        let ids = s.measurement_ids().to_vec();
        meas.insert(ids[0].clone(), c(2.0, 0.0));
        meas.insert(ids[1].clone(), c(2.0 * E, 0.0));
        let r = recover(&s, &meas).unwrap();
        assert!((r.eigenvalues[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((r.coefficients[0] - c(2.0, 0.0)).norm() < 1e-14);
        assert!((r.prony_coeffs[0] + c(E, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn missing_measurement_is_reported() {
        let fam = EigenFamily::exponential(1.0).unwrap();
        let s = hankel_shift(&fam, 0.0, 1.0, 2).unwrap();
        assert!(matches!(recover(&s, &Measurements::new()), Err(GopError::MissingMeasurement(_))));
    }

    #[test]
    fn duplicate_roots_are_rank_deficient() {
        let fam = EigenFamily::exponential(1.0).unwrap();
        let s = hankel_shift(&fam, 0.0, 1.0, 2).unwrap();
        let f = expansion(&fam, &[(c(0.3, 0.0), c(1.0, 0.0))]);
        let meas = s.simulate(&f).unwrap();
        let same = [c(0.3, 0.0), c(0.3, 0.0)];
        assert!(matches!(solve_coefficients(&same, &s, &meas), Err(GopError::RankDeficient { .. })));
        let ok = solve_coefficients(&[c(0.3, 0.0)], &s, &meas).unwrap();
        assert!((ok[0] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cosine_two_terms() {
        let fam = EigenFamily::cosine(20.0).unwrap();
        let truth = [(c(2.0, 0.0), c(1.0, 1.0)), (c(5.0, 0.0), c(-3.0, 0.0))];
        let f = expansion(&fam, &truth);
        let s = half_sum_hankel(&fam, PI / 20.0, 2).unwrap();
        let r = recover(&s, &s.simulate(&f).unwrap()).unwrap();
        for ((l, k), (el, ek)) in r.eigenvalues.iter().zip(&r.coefficients).zip(truth) {
            assert!((l - el).norm() < 1e-8 && (k - ek).norm() < 1e-8);
        }
        assert!(r.prony_residual < 1e-12 && r.residual_norm < 1e-12);
    }

    #[test]
    fn order_estimate_from_oversized_scheme() {
        let fam = EigenFamily::exponential(1.0).unwrap();
        let f = expansion(
            &fam,
            &[(c(-0.2, 1.0), c(1.0, 0.0)), (c(0.1, -2.0), c(2.0, 1.0)), (c(0.0, 0.4), c(0.5, 0.0))],
        );
        let it = crate::operators::Iteration::new(
            crate::operators::IterationAction::plain_shift(1.0),
            crate::operators::SpectralMap::ExpScale { tau: 1.0 },
        );
        let fs = (0..6)
            .map(|k| SamplingFunctional::point(0.0).after(it.action.clone(), k))
            .collect();
        let s = build_rectangular(&fam, &it, fs, 7, SchemeOptions::default()).unwrap();
        let h = assemble_matrix(&s, &s.simulate(&f).unwrap()).unwrap().matrix;
        assert_eq!(estimate_order(&h, 1e-8), 3);
        assert_eq!(estimate_order(&ComplexMatrix::zeros(6, 7), 1e-8), 0);
        assert_eq!(estimate_order(&h.top_left(1, 2), 1e-8), 1);
    }

    #[test]
    fn legendre_degrees_and_coefficients() {
        let fam = EigenFamily::legendre();
        let truth = [(1.0, 1.703), (4.0, 3.193), (9.0, 3.710)];
        let f = expansion(&fam, &truth.map(|(n, k)| (c(n, 0.0), c(k, 0.0))));
        let s = legendre_moments(&fam, PhiPParams::default(), 3).unwrap();
        let r = recover(&s, &s.simulate(&f).unwrap()).unwrap();
        for (j, (n, k)) in truth.iter().enumerate() {
            assert!((r.unrounded[j].re - n).abs() < 1e-2);
            assert_eq!(r.eigenvalues[j], c(*n, 0.0));
            assert!((r.coefficients[j] - c(*k, 0.0)).norm() < 1e-3);
        }
    }
}
