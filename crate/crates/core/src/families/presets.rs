//! Catalog of monotone maps `G` for eigenfunctions `exp(H + λ G)`.
//!
//! Each preset carries `G`, its inverse on the image `G(I)`, the natural
//! interval `I` on which it is strictly monotone, and a jet so that
//! derivatives of eigenfunctions are exact.

use serde::{Deserialize, Serialize};

use super::Interval;
use crate::error::{GopError, Result};
use crate::numkit::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "g")]
pub enum GPreset {
    /// `G = ln x` on `(0, ∞)`
    Log,
    /// `G = arccos x` on `[-1, 1]`
    Arccos,
    /// `G = arcsin x` on `[-1, 1]`
    Arcsin,
    /// `G = arcosh x` on `[1, ∞)`
    Arcosh,
    /// `G = arsinh x`
    Arsinh,
    /// `G = sin x` on `[-π/2, π/2]`
    Sin,
    /// `G = cos x` on `[0, π]`
    Cos,
    /// `G = sinh x`
    Sinh,
    /// `G = cosh x` on `[0, ∞)`
    Cosh,
    /// `G = x^{1-p} / (1-p)` on `(0, ∞)`, `p != 1`
    Power { p: f64 },
    /// `G = x`
    Linear,
    /// `G = -x²/2` on `(0, ∞)`
    Quadratic,
}

impl GPreset {
    /// The twelve catalog entries, with `p = 3` standing in for the power row.
    pub fn catalog() -> [GPreset; 12] {
        [
            GPreset::Log,
            GPreset::Arccos,
            GPreset::Arcsin,
            GPreset::Arcosh,
            GPreset::Arsinh,
            GPreset::Sin,
            GPreset::Cos,
            GPreset::Sinh,
            GPreset::Cosh,
            GPreset::Power { p: 3.0 },
            GPreset::Linear,
            GPreset::Quadratic,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            GPreset::Log => "log",
            GPreset::Arccos => "arccos",
            GPreset::Arcsin => "arcsin",
            GPreset::Arcosh => "arcosh",
            GPreset::Arsinh => "arsinh",
            GPreset::Sin => "sin",
            GPreset::Cos => "cos",
            GPreset::Sinh => "sinh",
            GPreset::Cosh => "cosh",
            GPreset::Power { .. } => "power",
            GPreset::Linear => "linear",
            GPreset::Quadratic => "quadratic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let GPreset::Power { p } = self {
            if !p.is_finite() || *p == 1.0 {
                return Err(GopError::InvalidInput(format!("power preset needs p != 1, got {p}")));
            }
        }
        Ok(())
    }

    /// Interval on which `G` is strictly monotone.
    pub fn domain(&self) -> Interval {
        use std::f64::consts::FRAC_PI_2;
        use std::f64::consts::PI;
        match self {
            GPreset::Log | GPreset::Power { .. } | GPreset::Quadratic => Interval::positive(),
            GPreset::Arccos | GPreset::Arcsin => Interval::closed(-1.0, 1.0),
            GPreset::Arcosh => Interval::closed(1.0, f64::INFINITY),
            GPreset::Arsinh | GPreset::Sinh | GPreset::Linear => Interval::real_line(),
            GPreset::Sin => Interval::closed(-FRAC_PI_2, FRAC_PI_2),
            GPreset::Cos => Interval::closed(0.0, PI),
            GPreset::Cosh => Interval::closed(0.0, f64::INFINITY),
        }
    }

    /// `G(I)` for the natural interval `I`.
    pub fn image(&self) -> Interval {
        use std::f64::consts::FRAC_PI_2;
        use std::f64::consts::PI;
        match self {
            GPreset::Log | GPreset::Arsinh | GPreset::Sinh | GPreset::Linear => Interval::real_line(),
            GPreset::Arccos => Interval::closed(0.0, PI),
            GPreset::Arcsin => Interval::closed(-FRAC_PI_2, FRAC_PI_2),
            GPreset::Arcosh => Interval::closed(0.0, f64::INFINITY),
            GPreset::Sin | GPreset::Cos => Interval::closed(-1.0, 1.0),
            GPreset::Cosh => Interval::closed(1.0, f64::INFINITY),
            GPreset::Power { p } => {
                if 1.0 - p > 0.0 {
                    Interval::positive()
                } else {
                    Interval::negative()
                }
            }
            GPreset::Quadratic => Interval::negative(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            GPreset::Log => x.ln(),
            GPreset::Arccos => x.acos(),
            GPreset::Arcsin => x.asin(),
            GPreset::Arcosh => x.acosh(),
            GPreset::Arsinh => x.asinh(),
            GPreset::Sin => x.sin(),
            GPreset::Cos => x.cos(),
            GPreset::Sinh => x.sinh(),
            GPreset::Cosh => x.cosh(),
            GPreset::Power { p } => x.powf(1.0 - p) / (1.0 - p),
            GPreset::Linear => x,
            GPreset::Quadratic => -0.5 * x * x,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            GPreset::Log => 1.0 / x,
            GPreset::Arccos => -1.0 / (1.0 - x * x).sqrt(),
            GPreset::Arcsin => 1.0 / (1.0 - x * x).sqrt(),
            GPreset::Arcosh => 1.0 / (x * x - 1.0).sqrt(),
            GPreset::Arsinh => 1.0 / (x * x + 1.0).sqrt(),
            GPreset::Sin => x.cos(),
            GPreset::Cos => -x.sin(),
            GPreset::Sinh => x.cosh(),
            GPreset::Cosh => x.sinh(),
            GPreset::Power { p } => x.powf(-p),
            GPreset::Linear => 1.0,
            GPreset::Quadratic => -x,
        }
    }

    /// `G^{-1}(y)`, failing when `y` is outside `G(I)`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let img = self.image();
        if !img.contains(y) {
            return Err(GopError::DomainEscape(format!(
                "{} has no preimage for {y} (image {img})",
                self.name()
            )));
        }
        let y = img.clamp(y);
        let x = match self {
            GPreset::Log => y.exp(),
            GPreset::Arccos => y.cos(),
            GPreset::Arcsin => y.sin(),
            GPreset::Arcosh => y.cosh(),
            GPreset::Arsinh => y.sinh(),
            GPreset::Sin => y.asin(),
            GPreset::Cos => y.acos(),
            GPreset::Sinh => y.asinh(),
            GPreset::Cosh => y.acosh(),
            GPreset::Power { p } => ((1.0 - p) * y).powf(1.0 / (1.0 - p)),
            GPreset::Linear => y,
            GPreset::Quadratic => (-2.0 * y).sqrt(),
        };
        Ok(x)
    }

    pub fn jet(&self, x: &Jet) -> Jet {
        match self {
            GPreset::Log => x.ln(),
            GPreset::Arccos => x.acos(),
            GPreset::Arcsin => x.asin(),
            GPreset::Arcosh => x.acosh(),
            GPreset::Arsinh => x.asinh(),
            GPreset::Sin => x.sin(),
            GPreset::Cos => x.cos(),
            GPreset::Sinh => x.sinh(),
            GPreset::Cosh => x.cosh(),
            GPreset::Power { p } => x.powf(1.0 - p).scale((1.0 / (1.0 - p)).into()),
            GPreset::Linear => x.clone(),
            GPreset::Quadratic => (x * x).scale((-0.5).into()),
        }
    }
}
