//! SVD-backed dense solvers: singular values, one-dimensional null spaces
//! and least-squares solves.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{GopError, Result};

/// Default rank tolerance relative to the largest singular value.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Threshold on `|p_M|` of the unit-norm null vector before rescaling.
pub const NORMALIZATION_FLOOR: f64 = 1e-12;

struct SortedSvd {
    sigma: Vec<f64>,
    u: DMatrix<Complex64>,
    v_t: DMatrix<Complex64>,
    order: Vec<usize>,
}

fn sorted_svd(m: &DMatrix<Complex64>) -> SortedSvd {
    let svd = m.clone().svd(true, true);
    let raw: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    SortedSvd {
        sigma: order.iter().map(|&i| raw[i]).collect(),
        u: svd.u.expect("u requested"),
        v_t: svd.v_t.expect("v_t requested"),
        order,
    }
}

/// Singular values in descending order, `min(rows, cols)` of them.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .to_nalgebra()
        .singular_values()
        .iter()
        .map(|s| s.max(0.0))
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Kernel vector of an `M x (M+1)` matrix, normalized so that `p[M] = 1`.
pub fn null_vector(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    null_vector_with_tol(m, DEFAULT_RANK_TOL)
}

pub fn null_vector_with_tol(m: &ComplexMatrix, tol: f64) -> Result<Vec<Complex64>> {
    let (rows, cols) = m.shape();
    if cols != rows + 1 {
        return Err(GopError::Shape(format!(
            "null_vector expects an M x (M+1) matrix, got {rows}x{cols}"
        )));
    }
    // Pad with zero rows so that the SVD exposes the full right basis.
    let mut square = DMatrix::<Complex64>::zeros(cols, cols);
    square
        .view_mut((0, 0), (rows, cols))
        .copy_from(&m.to_nalgebra());
    let svd = sorted_svd(&square);
    let sigma_max = svd.sigma[0];
    if rows > 0 {
        let sigma_m = svd.sigma[rows - 1];
        let ratio = if sigma_max > 0.0 { sigma_m / sigma_max } else { 0.0 };
        if ratio < tol {
            return Err(GopError::RankDeficient { ratio, tol });
        }
    }
    let idx = svd.order[cols - 1];
    let p: Vec<Complex64> = svd.v_t.row(idx).iter().map(|z| z.conj()).collect();
    let last = p[cols - 1];
    if last.norm() < NORMALIZATION_FLOOR {
        return Err(GopError::DegenerateNormalization(last.norm()));
    }
    Ok(p.iter().map(|z| z / last).collect())
}

/// Least-squares solution of `a x = b` for a tall matrix of full column rank.
///
/// Columns are equilibrated before the SVD so that the rank test does not
/// depend on the scaling of the unknowns.
pub fn lstsq(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    lstsq_with_tol(a, b, DEFAULT_RANK_TOL)
}

pub fn lstsq_with_tol(a: &ComplexMatrix, b: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let (rows, cols) = a.shape();
    if b.len() != rows {
        return Err(GopError::Shape(format!(
            "right-hand side of length {} for {rows} rows",
            b.len()
        )));
    }
    if rows < cols || cols == 0 {
        return Err(GopError::Shape(format!(
            "lstsq needs rows >= cols > 0, got {rows}x{cols}"
        )));
    }
    let scales: Vec<f64> = (0..cols)
        .map(|j| a.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    if scales.contains(&0.0) {
        return Err(GopError::RankDeficient { ratio: 0.0, tol });
    }
    let scaled = DMatrix::from_fn(rows, cols, |i, j| a[(i, j)] / scales[j]);
    let svd = sorted_svd(&scaled);
    let ratio = svd.sigma[cols - 1] / svd.sigma[0];
    if ratio < tol {
        return Err(GopError::RankDeficient { ratio, tol });
    }
    let mut x = vec![Complex64::new(0.0, 0.0); cols];
    for (rank_pos, &k) in svd.order.iter().enumerate() {
        let s = svd.sigma[rank_pos];
        // u_k^H b
        let coef: Complex64 = (0..rows).map(|i| svd.u[(i, k)].conj() * b[i]).sum::<Complex64>() / s;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += svd.v_t[(k, j)].conj() * coef;
        }
    }
    Ok(x.iter().zip(&scales).map(|(xj, s)| xj / s).collect())
}
