//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use gop_core::families::{EigenFamily, GPreset, SparseExpansion, Term};
use gop_core::numkit::RealPoly;
use gop_core::recovery::RecoveryOptions;
use gop_core::sampling::{self, PhiPParams, Scheme};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

/// A complex number written as `1.5`, `[re, im]` or `{ re = .., im = .. }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
    Parts { re: f64, im: f64 },
}

impl ComplexSpec {
    pub fn value(&self) -> Complex64 {
        match *self {
            ComplexSpec::Real(x) => Complex64::new(x, 0.0),
            ComplexSpec::Pair([re, im]) | ComplexSpec::Parts { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Exponential {
        #[serde(default = "one")]
        band_constant: f64,
    },
    Cosine {
        #[serde(default = "one")]
        band_constant: f64,
    },
    GeneralizedExp {
        g: String,
        /// Exponent of the `power` generator.
        #[serde(default)]
        p: Option<f64>,
        /// Coefficients of `H`, ascending.
        #[serde(default)]
        h: Vec<f64>,
        #[serde(default = "one")]
        band_constant: f64,
    },
    ShiftedGaussian {
        alpha: f64,
    },
    ChebyshevLike {
        #[serde(default = "one")]
        band_constant: f64,
    },
    Legendre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeSpec {
    HankelShift {
        #[serde(default)]
        x0: f64,
        tau: f64,
    },
    StridedShift {
        #[serde(default)]
        x0: f64,
        tau: f64,
        #[serde(default = "two")]
        stride: usize,
    },
    DerivativeHankel {
        #[serde(default)]
        x0: f64,
    },
    MixedDerivativeShift {
        #[serde(default)]
        x0: f64,
        tau: f64,
    },
    HalfSumHankel {
        tau: f64,
    },
    ChebyshevIdentity {
        tau: f64,
    },
    SymmetricShift {
        g: String,
        #[serde(default)]
        p: Option<f64>,
        x0: f64,
        tau: f64,
    },
    ChebyshevHankel {
        tau: f64,
    },
    GeneralizedShift {
        x0: f64,
        tau: f64,
    },
    GaussianShift {
        tau: f64,
    },
    Dilation {
        x0: f64,
        a: f64,
    },
    MomentDerivative,
    MomentShift,
    LegendreMoments {
        #[serde(default, flatten)]
        kernel: KernelSpec,
    },
}

/// Parameters of the Legendre moment kernel; missing fields take the
/// library defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KernelSpec {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub alpha: Option<f64>,
    pub beta0: Option<f64>,
    pub beta1: Option<f64>,
}

impl KernelSpec {
    pub fn params(&self) -> PhiPParams {
        let d = PhiPParams::default();
        PhiPParams {
            a: self.a.unwrap_or(d.a),
            b: self.b.unwrap_or(d.b),
            alpha: self.alpha.unwrap_or(d.alpha),
            beta0: self.beta0.unwrap_or(d.beta0),
            beta1: self.beta1.unwrap_or(d.beta1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// Family parameter; the degree `n` for Legendre.
    pub lambda: ComplexSpec,
    pub coeff: ComplexSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSource {
    /// CSV with columns `measurement_id,real,imag`, relative to the config.
    pub csv: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    #[default]
    None,
    /// Additive complex Gaussian with `E|n|² = sigma²`.
    Gaussian { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverySpec {
    pub rank_tol: Option<f64>,
    pub lstsq_tol: Option<f64>,
    pub snap: Option<bool>,
}

impl RecoverySpec {
    pub fn options(&self) -> RecoveryOptions {
        let d = RecoveryOptions::default();
        RecoveryOptions {
            rank_tol: self.rank_tol.unwrap_or(d.rank_tol),
            lstsq_tol: self.lstsq_tol.unwrap_or(d.lstsq_tol),
            snap: self.snap.unwrap_or(d.snap),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Report path; `--out` takes precedence.
    pub report: Option<String>,
    /// Also write the sampled kernels `A^k φ_P` (Legendre moment scheme).
    #[serde(default)]
    pub kernel_curves: bool,
    /// Grid size of the kernel curves.
    pub kernel_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Number of terms.
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    pub family: FamilySpec,
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub truth: Vec<TermSpec>,
    pub measurements: Option<MeasurementSource>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub recovery: RecoverySpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn preset(field: &str, g: &str, p: Option<f64>) -> Result<GPreset, CliError> {
    let out = match g {
        "log" => GPreset::Log,
        "arccos" => GPreset::Arccos,
        "arcsin" => GPreset::Arcsin,
        "arcosh" => GPreset::Arcosh,
        "arsinh" => GPreset::Arsinh,
        "sin" => GPreset::Sin,
        "cos" => GPreset::Cos,
        "sinh" => GPreset::Sinh,
        "cosh" => GPreset::Cosh,
        "linear" => GPreset::Linear,
        "quadratic" => GPreset::Quadratic,
        "power" => GPreset::Power {
            p: p.ok_or_else(|| bad(format!("{field}: the power generator needs `p`")))?,
        },
        other => return Err(bad(format!("{field}: unknown generator `{other}`"))),
    };
    if p.is_some() && !matches!(out, GPreset::Power { .. }) {
        return Err(bad(format!("{field}: `p` only applies to the power generator")));
    }
    out.validate().map_err(|e| bad(format!("{field}: {e}")))?;
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => bad(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Field-level checks that do not need the library.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.trim().is_empty() {
            return Err(bad("name: must not be empty"));
        }
        if self.m == 0 {
            return Err(bad("m: must be at least 1"));
        }
        if self.truth.is_empty() && self.measurements.is_none() {
            return Err(bad("truth: either ground-truth terms or [measurements] csv is required"));
        }
        if let NoiseSpec::Gaussian { sigma } = self.noise {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(bad(format!("noise.sigma: must be finite and >= 0, got {sigma}")));
            }
            if self.truth.is_empty() {
                return Err(bad("noise: only applies to simulated measurements"));
            }
        }
        if self.output.kernel_curves && !matches!(self.scheme, SchemeSpec::LegendreMoments { .. }) {
            return Err(bad("output.kernel_curves: only available for the legendre_moments scheme"));
        }
        if self.output.kernel_samples == Some(0) || self.output.kernel_samples == Some(1) {
            return Err(bad("output.kernel_samples: need at least 2 points"));
        }
        Ok(())
    }

    pub fn build_family(&self) -> Result<EigenFamily, CliError> {
        let fam = match &self.family {
            FamilySpec::Exponential { band_constant } => EigenFamily::exponential(*band_constant),
            FamilySpec::Cosine { band_constant } => EigenFamily::cosine(*band_constant),
            FamilySpec::GeneralizedExp { g, p, h, band_constant } => {
                let g = preset("family.g", g, *p)?;
                EigenFamily::generalized_exp(g, RealPoly::new(h.clone()), *band_constant)
            }
            FamilySpec::ShiftedGaussian { alpha } => EigenFamily::shifted_gaussian(*alpha),
            FamilySpec::ChebyshevLike { band_constant } => EigenFamily::chebyshev_like(*band_constant),
            FamilySpec::Legendre => Ok(EigenFamily::legendre()),
        };
        fam.map_err(|e| bad(format!("family: {e}")))
    }

    pub fn build_scheme(&self, family: &EigenFamily) -> Result<Scheme, CliError> {
        let m = self.m;
        let s = match &self.scheme {
            SchemeSpec::HankelShift { x0, tau } => sampling::hankel_shift(family, *x0, *tau, m),
            SchemeSpec::StridedShift { x0, tau, stride } => sampling::strided_shift(family, *x0, *tau, *stride, m),
            SchemeSpec::DerivativeHankel { x0 } => sampling::derivative_hankel(family, *x0, m),
            SchemeSpec::MixedDerivativeShift { x0, tau } => sampling::mixed_derivative_shift(family, *x0, *tau, m),
            SchemeSpec::HalfSumHankel { tau } => sampling::half_sum_hankel(family, *tau, m),
            SchemeSpec::ChebyshevIdentity { tau } => sampling::chebyshev_identity(family, *tau, m),
            SchemeSpec::SymmetricShift { g, p, x0, tau } => {
                sampling::symmetric_shift_hankel(family, preset("scheme.g", g, *p)?, *x0, *tau, m)
            }
            SchemeSpec::ChebyshevHankel { tau } => sampling::chebyshev_hankel(family, *tau, m),
            SchemeSpec::GeneralizedShift { x0, tau } => sampling::generalized_shift_hankel(family, *x0, *tau, m),
            SchemeSpec::GaussianShift { tau } => sampling::gaussian_shift(family, *tau, m),
            SchemeSpec::Dilation { x0, a } => sampling::dilation_hankel(family, *x0, *a, m),
            SchemeSpec::MomentDerivative => sampling::moment_derivative(family, m),
            SchemeSpec::MomentShift => sampling::moment_shift(family, m),
            SchemeSpec::LegendreMoments { kernel } => sampling::legendre_moments(family, kernel.params(), m),
        };
        s.map_err(|e| bad(format!("scheme: {e}")))
    }

    /// Ground truth, if any.
    pub fn build_truth(&self, family: &EigenFamily) -> Result<Option<SparseExpansion>, CliError> {
        if self.truth.is_empty() {
            return Ok(None);
        }
        let terms = self
            .truth
            .iter()
            .map(|t| Term {
                lambda: t.lambda.value(),
                coeff: t.coeff.value(),
            })
            .collect();
        SparseExpansion::new(family.clone(), terms)
            .map(Some)
            .map_err(|e| bad(format!("truth: {e}")))
    }

    /// Measurement CSV path, resolved against the config's directory.
    pub fn measurement_path(&self, config_dir: Option<&Path>) -> Option<PathBuf> {
        self.measurements.as_ref().map(|m| {
            let p = PathBuf::from(&m.csv);
            match config_dir {
                Some(d) if p.is_relative() => d.join(p),
                _ => p,
            }
        })
    }

    pub fn kernel_params(&self) -> Option<PhiPParams> {
        match &self.scheme {
            SchemeSpec::LegendreMoments { kernel } => Some(kernel.params()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LEGENDRE: &str = r#"
name = "legendre"
m = 3

[family]
kind = "legendre"

[scheme]
kind = "legendre_moments"
alpha = 0.1

[[truth]]
lambda = 1
coeff = 1.703

[[truth]]
lambda = 4.0
coeff = [3.193, 0.0]

[[truth]]
lambda = 9.0
coeff = { re = 3.710, im = 0.0 }
"#;

    #[test]
    fn parses_all_complex_spellings() {
        let cfg = ExperimentConfig::from_toml(LEGENDRE).unwrap();
        assert_eq!(cfg.truth.len(), 3);
        assert_eq!(cfg.truth[2].coeff.value(), Complex64::new(3.71, 0.0));
        assert_eq!(cfg.kernel_params().unwrap(), PhiPParams::default());
        let fam = cfg.build_family().unwrap();
        assert_eq!(cfg.build_scheme(&fam).unwrap().raw_measurements().len(), 6);
    }

    #[test]
    fn missing_data_source_is_a_config_error() {
        let text = LEGENDRE.split("[[truth]]").next().unwrap();
        assert!(matches!(ExperimentConfig::from_toml(text), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_generator_is_rejected() {
        let text = r#"
name = "x"
m = 1
[family]
kind = "generalized_exp"
g = "tan"
[scheme]
kind = "generalized_shift"
x0 = 0.5
tau = 0.1
[[truth]]
lambda = 1
coeff = 1
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let err = cfg.build_family().unwrap_err();
        assert!(err.to_string().contains("unknown generator"));
    }

    #[test]
    fn band_violation_surfaces_at_scheme_construction() {
        // τ = 1 with C = 4 breaks |τ| C <= π
        let text = r#"
name = "x"
m = 2
[family]
kind = "exponential"
band_constant = 4.0
[scheme]
kind = "hankel_shift"
tau = 1.0
[[truth]]
lambda = 0.1
coeff = 1
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let fam = cfg.build_family().unwrap();
        assert!(matches!(cfg.build_scheme(&fam), Err(CliError::Config(_))));
    }
}
