use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ComplexPoly;
use crate::error::{GopError, Result};

const NEWTON_STEPS: usize = 4;

/// Roots of a polynomial from the eigenvalues of its balanced companion
/// matrix, each polished by a few Newton steps.
pub fn poly_roots(p: &ComplexPoly) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return Err(GopError::ZeroPolynomial);
    }
    let n = p.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p.leading();
    let a: Vec<Complex64> = p.coeffs()[..n].iter().map(|c| c / lead).collect();
    if n == 1 {
        return Ok(vec![-a[0]]);
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(GopError::NonFinite("polynomial coefficients"));
    }

    let mut comp = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        comp[(i, n - 1)] = -a[i];
    }
    balance(&mut comp);

    let schur = nalgebra::Schur::try_new(comp, f64::EPSILON, 10_000)
        .ok_or_else(|| GopError::Unsupported("companion eigenvalue iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let dp = p.derivative();
    let roots = (0..n).map(|i| polish(p, &dp, t[(i, i)])).collect();
    Ok(roots)
}

fn polish(p: &ComplexPoly, dp: &ComplexPoly, mut z: Complex64) -> Complex64 {
    let mut fz = p.eval(z).norm();
    for _ in 0..NEWTON_STEPS {
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - p.eval(z) / d;
        let fc = p.eval(cand).norm();
        // also stops on NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(fc < fz) {
            break;
        }
        z = cand;
        fz = fc;
    }
    z
}

/// Diagonal similarity scaling with powers of two (Parlett and Reinsch).
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0_f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].l1_norm();
                    r += m[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * total {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}
