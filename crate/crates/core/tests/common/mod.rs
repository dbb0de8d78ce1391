//! Shared test helpers and independent numerical oracles.
#![allow(dead_code, clippy::needless_range_loop)]

use gop_core::families::{EigenFamily, SparseExpansion, Term};
use gop_core::numkit::ComplexMatrix;
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random coefficient with modulus in `[0.1, 10]` and uniform phase.
pub fn coefficient<R: Rng>(rng: &mut R) -> Complex64 {
    let r = 10f64.powf(rng.random_range(-1.0..=1.0));
    Complex64::from_polar(r, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Draws `m` parameters with pairwise `|φ(λ_i) - φ(λ_j)| >= sep`.
pub fn separated<R: Rng>(
    rng: &mut R,
    m: usize,
    sep: f64,
    mut draw: impl FnMut(&mut R) -> Complex64,
    phi: impl Fn(Complex64) -> Complex64,
) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(m);
    while out.len() < m {
        let l = draw(rng);
        if out.iter().all(|&p| (phi(p) - phi(l)).norm() >= sep) {
            out.push(l);
        }
    }
    out
}

pub fn expansion(family: &EigenFamily, lambdas: &[Complex64], coeffs: &[Complex64]) -> SparseExpansion {
    let terms = lambdas
        .iter()
        .zip(coeffs)
        .map(|(&lambda, &coeff)| Term { lambda, coeff })
        .collect();
    SparseExpansion::new(family.clone(), terms).unwrap()
}

/// Largest error after pairing every truth value with its nearest unused
/// estimate; pairs `(λ, c)` move together.
pub fn paired_errors(truth: &[(Complex64, Complex64)], est: &[(Complex64, Complex64)]) -> (f64, f64) {
    if truth.len() != est.len() {
        return (f64::INFINITY, f64::INFINITY);
    }
    let mut used = vec![false; est.len()];
    let (mut el, mut ec) = (0.0f64, 0.0f64);
    for &(l, k) in truth {
        let (j, _) = est
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, e)| (j, (e.0 - l).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[j] = true;
        el = el.max((est[j].0 - l).norm());
        ec = ec.max((est[j].1 - k).norm());
    }
    (el, ec)
}

fn hermitian_gram(a: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    let n = a.cols();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..a.rows()).map(|r| a[(r, i)].conj() * a[(r, j)]).sum())
                .collect()
        })
        .collect()
}

/// One-sided Jacobi SVD: singular values, descending.
pub fn jacobi_singular_values(m: &ComplexMatrix) -> Vec<f64> {
    // work on the tall orientation
    let a = if m.rows() >= m.cols() { m.clone() } else { m.adjoint() };
    let (rows, cols) = a.shape();
    let mut u: Vec<Vec<Complex64>> = (0..cols).map(|j| a.column(j)).collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = u[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = u[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = (0..rows).map(|i| u[p][i].conj() * u[q][i]).sum();
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                off = off.max(gamma.norm() / (alpha * beta).sqrt());
                let phase = gamma / gamma.norm();
                let zeta = (beta - alpha) / (2.0 * gamma.norm());
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let (x, y) = (u[p][i], u[q][i]);
                    u[p][i] = x * cs - y * phase.conj() * sn;
                    u[q][i] = x * phase * sn + y * cs;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s: Vec<f64> = u.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut d = c(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm())).unwrap();
        if a[p][k].norm() == 0.0 {
            return c(0.0, 0.0);
        }
        if p != k {
            a.swap(p, k);
            d = -d;
        }
        d *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let v = a[k][j];
                a[i][j] -= f * v;
            }
        }
    }
    d
}

/// Null vector of an `M x (M+1)` matrix from signed maximal minors,
/// scaled so that the last entry is one.
pub fn bordered_null_vector(m: &ComplexMatrix) -> Vec<Complex64> {
    let (rows, cols) = m.shape();
    assert_eq!(cols, rows + 1);
    let p: Vec<Complex64> = (0..cols)
        .map(|j| {
            let minor: Vec<Vec<Complex64>> = (0..rows)
                .map(|r| (0..cols).filter(|&k| k != j).map(|k| m[(r, k)]).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            det(minor) * sign
        })
        .collect();
    let last = p[cols - 1];
    p.iter().map(|z| z / last).collect()
}

/// Gauss–Jordan inverse of a square matrix.
pub fn inverse(mut a: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let mut inv: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm())).unwrap();
        a.swap(p, k);
        inv.swap(p, k);
        let piv = a[k][k];
        for j in 0..n {
            a[k][j] /= piv;
            inv[k][j] /= piv;
        }
        for i in 0..n {
            if i != k {
                let f = a[i][k];
                for j in 0..n {
                    let (akj, ikj) = (a[k][j], inv[k][j]);
                    a[i][j] -= f * akj;
                    inv[i][j] -= f * ikj;
                }
            }
        }
    }
    inv
}

/// Least squares through the normal equations and an explicit inverse.
pub fn normal_equations_lstsq(a: &ComplexMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let g = inverse(hermitian_gram(a));
    let rhs: Vec<Complex64> = (0..a.cols())
        .map(|i| (0..a.rows()).map(|r| a[(r, i)].conj() * b[r]).sum())
        .collect();
    g.iter().map(|row| row.iter().zip(&rhs).map(|(x, y)| x * y).sum()).collect()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 0 { 1.0 } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite fixed-order Gauss–Legendre rule on `[a, b]`.
pub fn fixed_quadrature(f: impl Fn(f64) -> Complex64, a: f64, b: f64, panels: usize, order: usize) -> Complex64 {
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut sum = c(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in &rule {
            sum += f(mid + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    sum
}
