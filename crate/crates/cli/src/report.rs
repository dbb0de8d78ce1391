//! JSON run report.

use gop_core::families::SparseExpansion;
use gop_core::recovery::RecoveryResult;
use gop_core::sampling::{Admissibility, Scheme};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// Bumped on any incompatible change of the report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    RecoveryFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub family: String,
    pub rows: usize,
    pub cols: usize,
    pub raw_measurement_count: usize,
    pub hankel: bool,
    pub admissibility: Admissibility,
}

impl SchemeSummary {
    pub fn of(s: &Scheme) -> Self {
        Self {
            family: s.family().name().to_string(),
            rows: s.rows(),
            cols: s.cols(),
            raw_measurement_count: s.raw_measurements().len(),
            hankel: s.is_hankel(),
            admissibility: s.admissibility(),
        }
    }
}

/// One ground-truth term and its nearest recovered match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermError {
    pub lambda_true: Complex64,
    pub coeff_true: Complex64,
    pub lambda: Option<Complex64>,
    pub lambda_unrounded: Option<Complex64>,
    pub coeff: Option<Complex64>,
    pub lambda_error: Option<f64>,
    pub lambda_unrounded_error: Option<f64>,
    pub coeff_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub terms: Vec<TermError>,
    /// `None` when some term found no match.
    pub max_lambda_error: Option<f64>,
    pub max_lambda_unrounded_error: Option<f64>,
    pub max_coeff_error: Option<f64>,
}

fn max_of(v: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    v.collect::<Option<Vec<f64>>>().map(|xs| xs.into_iter().fold(0.0, f64::max))
}

impl ErrorSummary {
    /// Greedy nearest matching on the unrounded parameters.
    pub fn compare(truth: &SparseExpansion, r: &RecoveryResult) -> Self {
        let mut used = vec![false; r.eigenvalues.len()];
        let terms: Vec<TermError> = truth
            .terms()
            .iter()
            .map(|t| {
                let best = (0..r.eigenvalues.len())
                    .filter(|&j| !used[j])
                    .min_by(|&a, &b| {
                        let da = (r.unrounded[a] - t.lambda).norm();
                        let db = (r.unrounded[b] - t.lambda).norm();
                        da.total_cmp(&db)
                    });
                match best {
                    Some(j) => {
                        used[j] = true;
                        TermError {
                            lambda_true: t.lambda,
                            coeff_true: t.coeff,
                            lambda: Some(r.eigenvalues[j]),
                            lambda_unrounded: Some(r.unrounded[j]),
                            coeff: Some(r.coefficients[j]),
                            lambda_error: Some((r.eigenvalues[j] - t.lambda).norm()),
                            lambda_unrounded_error: Some((r.unrounded[j] - t.lambda).norm()),
                            coeff_error: Some((r.coefficients[j] - t.coeff).norm()),
                        }
                    }
                    None => TermError {
                        lambda_true: t.lambda,
                        coeff_true: t.coeff,
                        lambda: None,
                        lambda_unrounded: None,
                        coeff: None,
                        lambda_error: None,
                        lambda_unrounded_error: None,
                        coeff_error: None,
                    },
                }
            })
            .collect();
        Self {
            max_lambda_error: max_of(terms.iter().map(|t| t.lambda_error)),
            max_lambda_unrounded_error: max_of(terms.iter().map(|t| t.lambda_unrounded_error)),
            max_coeff_error: max_of(terms.iter().map(|t| t.coeff_error)),
            terms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    /// Seed actually used (command-line override included).
    pub seed: u64,
    pub status: Status,
    pub error: Option<String>,
    pub scheme: SchemeSummary,
    pub recovery: Option<RecoveryResult>,
    /// Present iff the config has ground truth and recovery succeeded.
    pub errors: Option<ErrorSummary>,
    pub measurements_csv: Option<String>,
    pub kernel_curves_csv: Option<String>,
    pub wall_time_s: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
