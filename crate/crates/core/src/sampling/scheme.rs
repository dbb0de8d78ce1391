//! Sampling schemes: the table of linear forms behind `(F_k(φ(A)^ℓ f))`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::functional::{expand, LinearForm, MomentEncoding, RawMeasurement, Registry, SamplingFunctional, Signal};
use crate::error::{GopError, Result};
use crate::families::{EigenFamily, SparseExpansion};
use crate::numkit::{singular_values, ComplexMatrix};
use crate::operators::{Iteration, IterationAction};

/// Seed of the randomized admissibility witness.
const WITNESS_SEED: u64 = 0x0a0d_1e55;
const WITNESS_TRIALS: usize = 3;
/// Minimum `σ_min / σ_max` of a witness matrix.
pub const WITNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Admissibility {
    /// `F_k = F ∘ ψ^{sk}` with a common base functional.
    LemmaShape,
    /// Worst `σ_min / σ_max` over randomized parameter draws.
    Witness { ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SchemeOptions {
    pub encoding: MomentEncoding,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scheme {
    family: EigenFamily,
    iteration: Iteration,
    functionals: Vec<SamplingFunctional>,
    rows: usize,
    cols: usize,
    raw: Vec<RawMeasurement>,
    ids: Vec<String>,
    entries: Vec<LinearForm>,
    hankel: bool,
    admissibility: Admissibility,
    options: SchemeOptions,
}

/// Assembled sampling matrix together with where each entry came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingMatrix {
    pub matrix: ComplexMatrix,
    /// `"F_k(phi^l f)"` labels in row-major order.
    pub provenance: Vec<String>,
    /// The deduplicated measurements the entries are built from.
    pub raw_samples: Vec<(String, Complex64)>,
}

/// Scheme with `m` functionals and `m + 1` powers of the iteration.
pub fn build_scheme(
    family: &EigenFamily,
    iteration: &Iteration,
    functionals: Vec<SamplingFunctional>,
    m: usize,
    options: SchemeOptions,
) -> Result<Scheme> {
    if functionals.len() != m || m == 0 {
        return Err(GopError::Shape(format!(
            "expected {m} sampling functionals, got {}",
            functionals.len()
        )));
    }
    Scheme::build(family, iteration, functionals, m + 1, options)
}

/// Scheme with an arbitrary number of columns (powers `0..cols`), used
/// for over-provisioned matrices and rank studies.
pub fn build_rectangular(
    family: &EigenFamily,
    iteration: &Iteration,
    functionals: Vec<SamplingFunctional>,
    cols: usize,
    options: SchemeOptions,
) -> Result<Scheme> {
    if functionals.is_empty() || cols == 0 {
        return Err(GopError::Shape("empty sampling scheme".into()));
    }
    Scheme::build(family, iteration, functionals, cols, options)
}

fn probe_point(f: &SamplingFunctional) -> Option<f64> {
    match f.flatten().0 {
        SamplingFunctional::PointEval { x } | SamplingFunctional::DeltaDerivative { x, .. } => Some(*x),
        SamplingFunctional::WeightedPoints { points } => points.first().map(|p| p.0),
        SamplingFunctional::MomentKernel { kernel, .. } => {
            let (a, b) = kernel.support();
            Some(0.5 * (a + b))
        }
        SamplingFunctional::Composed { .. } => None,
    }
}

/// Whether `functionals[k] = F_0 ∘ ψ^{sk}` for one action `ψ` and stride `s ≥ 1`.
fn lemma_shape(functionals: &[SamplingFunctional]) -> bool {
    let base = &functionals[0];
    if matches!(base, SamplingFunctional::Composed { .. }) && functionals.len() > 1 {
        // a composed F_0 is only compared structurally through its own nesting
        return false;
    }
    let mut shared: Option<(&IterationAction, usize)> = None;
    for (k, f) in functionals.iter().enumerate().skip(1) {
        let SamplingFunctional::Composed { action, power, base: b } = f else {
            return false;
        };
        if **b != *base || *power == 0 || *power % k != 0 {
            return false;
        }
        let s = *power / k;
        match shared {
            None => shared = Some((action, s)),
            Some((a, s0)) if a != action || s0 != s => return false,
            _ => {}
        }
    }
    true
}

fn strip_power_zero(f: SamplingFunctional) -> SamplingFunctional {
    match f {
        SamplingFunctional::Composed { power: 0, base, .. } => strip_power_zero(*base),
        other => other,
    }
}

impl Scheme {
    fn build(
        family: &EigenFamily,
        iteration: &Iteration,
        functionals: Vec<SamplingFunctional>,
        cols: usize,
        options: SchemeOptions,
    ) -> Result<Self> {
        let functionals: Vec<_> = functionals.into_iter().map(strip_power_zero).collect();
        if let Some(x0) = probe_point(&functionals[0]) {
            iteration.validate_for(family, x0)?;
        } else {
            iteration.map.check_injective(&family.region())?;
        }
        let rows = functionals.len();
        let mut registry = Registry::default();
        let mut entries = Vec::with_capacity(rows * cols);
        for f in &functionals {
            for l in 0..cols {
                entries.push(expand(
                    f,
                    Some((&iteration.action, l)),
                    family,
                    options.encoding,
                    &mut registry,
                )?);
            }
        }
        let hankel = (0..rows).all(|k| {
            (0..cols).all(|l| {
                let s = k + l;
                let (k0, l0) = if s < cols { (0, s) } else { (s - cols + 1, cols - 1) };
                entries[k * cols + l].approx_eq(&entries[k0 * cols + l0])
            })
        });
        let ids = registry.raw.iter().map(RawMeasurement::id).collect();
        let mut scheme = Self {
            family: family.clone(),
            iteration: iteration.clone(),
            functionals,
            rows,
            cols,
            raw: registry.raw,
            ids,
            entries,
            hankel,
            admissibility: Admissibility::LemmaShape,
            options,
        };
        if !lemma_shape(&scheme.functionals) {
            let ratio = scheme.witness()?;
            scheme.admissibility = Admissibility::Witness { ratio };
        }
        Ok(scheme)
    }

    /// Rank of `(F_k(v_{λ_j}))` for random distinct parameters.
    fn witness(&self) -> Result<f64> {
        let m = self.rows;
        let region = self.family.region();
        let mut rng = ChaCha8Rng::seed_from_u64(WITNESS_SEED);
        let mut worst = f64::INFINITY;
        for _ in 0..WITNESS_TRIALS {
            let mut params: Vec<Complex64> = Vec::with_capacity(m);
            let mut guard = 0;
            while params.len() < m {
                guard += 1;
                if guard > 10_000 {
                    return Err(GopError::AdmissibilityFailure(0.0));
                }
                let l = region.sample(&mut rng);
                let mapped = self.iteration.mapped(&self.family, l)?;
                let distinct = params.iter().all(|&p| {
                    (p - l).norm() > 1e-3
                        && self
                            .iteration
                            .mapped(&self.family, p)
                            .map(|q| (q - mapped).norm() > 1e-3)
                            .unwrap_or(false)
                });
                if distinct {
                    params.push(l);
                }
            }
            let cols: Vec<Vec<Complex64>> = params
                .iter()
                .map(|&l| {
                    let v = SparseExpansion::eigenfunction(&self.family, l)?;
                    let raw = self.evaluate_raw(&v)?;
                    Ok((0..m).map(|k| self.entries[k * self.cols].eval(&raw)).collect())
                })
                .collect::<Result<_>>()?;
            let mat = ComplexMatrix::from_fn(m, m, |k, j| cols[j][k]);
            let s = singular_values(&mat);
            let ratio = if s[0] > 0.0 { s[m - 1] / s[0] } else { 0.0 };
            worst = worst.min(ratio);
        }
        if worst.is_nan() || worst <= WITNESS_TOL {
            return Err(GopError::AdmissibilityFailure(worst));
        }
        Ok(worst)
    }

    pub fn family(&self) -> &EigenFamily {
        &self.family
    }

    pub fn iteration(&self) -> &Iteration {
        &self.iteration
    }

    pub fn functionals(&self) -> &[SamplingFunctional] {
        &self.functionals
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of terms the scheme is sized for.
    pub fn m(&self) -> usize {
        self.rows
    }

    pub fn raw_measurements(&self) -> &[RawMeasurement] {
        &self.raw
    }

    pub fn measurement_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn entry(&self, k: usize, l: usize) -> &LinearForm {
        &self.entries[k * self.cols + l]
    }

    pub fn is_hankel(&self) -> bool {
        self.hankel
    }

    pub fn admissibility(&self) -> Admissibility {
        self.admissibility
    }

    pub fn options(&self) -> SchemeOptions {
        self.options
    }

    /// Evaluates every raw measurement on a signal.
    pub fn evaluate_raw(&self, f: &dyn Signal) -> Result<Vec<Complex64>> {
        self.raw.iter().map(|r| r.evaluate(f)).collect()
    }

    /// Forward model: all raw measurements of `f`.
    pub fn simulate(&self, f: &dyn Signal) -> Result<super::Measurements> {
        let vals = self.evaluate_raw(f)?;
        Ok(self.ids.iter().cloned().zip(vals).collect())
    }

    /// Raw values in scheme order, failing on the first missing id.
    pub fn lookup(&self, measurements: &super::Measurements) -> Result<Vec<Complex64>> {
        self.ids
            .iter()
            .map(|id| {
                measurements
                    .get(id)
                    .ok_or_else(|| GopError::MissingMeasurement(id.clone()))
            })
            .collect()
    }

    /// Matrix from values already in scheme order.
    pub fn matrix_from_raw(&self, raw: &[Complex64]) -> Result<ComplexMatrix> {
        let data = self.entries.iter().map(|e| e.eval(raw)).collect();
        ComplexMatrix::new(self.rows, self.cols, data)
    }

    /// Indices of pairwise distinct entries, in row-major order.
    pub fn distinct_entries(&self) -> Vec<(usize, usize)> {
        let mut seen: Vec<&LinearForm> = Vec::new();
        let mut out = Vec::new();
        for k in 0..self.rows {
            for l in 0..self.cols {
                let e = self.entry(k, l);
                if !seen.iter().any(|s| s.approx_eq(e)) {
                    seen.push(e);
                    out.push((k, l));
                }
            }
        }
        out
    }
}

/// `(F_k(φ(A)^ℓ f))` from measured values.
pub fn assemble_matrix(scheme: &Scheme, measurements: &super::Measurements) -> Result<SamplingMatrix> {
    let raw = scheme.lookup(measurements)?;
    let matrix = scheme.matrix_from_raw(&raw)?;
    let provenance = (0..scheme.rows)
        .flat_map(|k| (0..scheme.cols).map(move |l| format!("F_{k}(phi^{l} f)")))
        .collect();
    Ok(SamplingMatrix {
        matrix,
        provenance,
        raw_samples: scheme.ids.iter().cloned().zip(raw).collect(),
    })
}
