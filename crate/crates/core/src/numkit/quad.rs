//! Globally adaptive Gauss–Kronrod (7, 15) quadrature for complex integrands.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GopError, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Rounding level of a panel sum relative to `∫|f|`; tighter relative
/// tolerances are clamped to it.
const REL_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Stopping rule for [`integrate`].
///
/// Refinement stops once the summed error estimate drops below
/// `max(abs_tol, max(rel_tol, 100 eps) * ∫|f|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_panels: 1 << 14,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    mass: f64,
    error: f64,
}

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut mass = fc.norm() * WGK[7];
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron += (f1 + f2) * WGK[i];
        mass += (f1.norm() + f2.norm()) * WGK[i];
        if i % 2 == 1 {
            gauss += (f1 + f2) * WG[i / 2];
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).norm();
    Panel {
        a,
        b,
        value,
        mass: mass * h.abs(),
        error,
    }
}

/// `∫_a^b f(x) dx` by global adaptive bisection of the worst panel.
pub fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Complex64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(GopError::InvalidInput(format!("integration bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut panels = vec![gk15(&f, a, b)];
    loop {
        let value: Complex64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let mass: f64 = panels.iter().map(|p| p.mass).sum();
        if !(value.re.is_finite() && value.im.is_finite() && error.is_finite()) {
            return Err(GopError::NonFinite("quadrature integrand"));
        }
        if error <= spec.abs_tol.max(spec.rel_tol.max(REL_FLOOR) * mass) {
            return Ok(value);
        }
        if panels.len() >= spec.max_panels {
            return Err(GopError::QuadratureFailure {
                a,
                b,
                error,
                panels: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid == p.a || mid == p.b {
            return Err(GopError::QuadratureFailure {
                a,
                b,
                error,
                panels: panels.len() + 1,
            });
        }
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
    }
}
