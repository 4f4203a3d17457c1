//! Finite `m x m` algebras spanned by the powers of
//! `A_{alpha,beta} = T_m(z + 1/z) + alpha e_1 e_1^T + beta e_m e_m^T`.
//!
//! Basis: `P_0 = I` and `P_i = T_m(z^i + z^-i) + H_i^(alpha) + J_m H_i^(beta) J_m`, where
//! `H_i^(alpha)` is the leading `m x m` block of the Hankel matrix with first column `h_i`.
//! For `i <= m - 1` the two Hankel corners occupy `r + c <= i - 1` and `r + c >= 2m - 1 - i`
//! (zero-based), so they never share an entry.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::algebra::{h_vector, power_to_basis};
use crate::error::{Error, Result};

/// `A_{alpha,beta}` as a dense matrix.
pub fn finite_generator(m: usize, alpha: f64, beta: f64) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(Error::IndexOutOfRange { index: 0, dim: 0 });
    }
    let mut a = DMatrix::from_fn(m, m, |r, c| if r.abs_diff(c) == 1 { 1.0 } else { 0.0 });
    a[(0, 0)] += alpha;
    a[(m - 1, m - 1)] += beta;
    Ok(a)
}

/// `P_i^(alpha,beta)` for `0 <= i <= m - 1`.
pub fn finite_basis(i: usize, m: usize, alpha: f64, beta: f64) -> Result<DMatrix<f64>> {
    if m == 0 || i >= m {
        return Err(Error::IndexOutOfRange { index: i, dim: m });
    }
    if i == 0 {
        return Ok(DMatrix::identity(m, m));
    }
    let ha = h_vector(i, alpha).entries;
    let hb = h_vector(i, beta).entries;
    let mut p = DMatrix::from_fn(m, m, |r, c| if r.abs_diff(c) == i { 1.0 } else { 0.0 });
    for r in 0..m {
        for c in 0..m {
            if let Some(v) = ha.get(r + c) {
                p[(r, c)] += v;
            }
            if let Some(v) = hb.get((m - 1 - r) + (m - 1 - c)) {
                p[(r, c)] += v;
            }
        }
    }
    Ok(p)
}

/// `A_{alpha,beta}^n` assembled as `sum_i binom(n, i) P_{n-2i} + phi_n I`, `1 <= n <= m - 1`.
pub fn finite_power_expand(n: usize, m: usize, alpha: f64, beta: f64) -> Result<DMatrix<f64>> {
    if n == 0 || n >= m {
        return Err(Error::IndexOutOfRange { index: n, dim: m });
    }
    let (coeffs, phi) = power_to_basis(n)?;
    let mut out = DMatrix::identity(m, m) * phi as f64;
    for (i, b) in coeffs.iter().enumerate() {
        out += finite_basis(n - 2 * i, m, alpha, beta)? * (*b as f64);
    }
    Ok(out)
}

/// Orthogonal DST-I matrix `S_jk = sqrt(2 / (m + 1)) sin(jk pi / (m + 1))`, `j, k = 1..m`.
pub fn dst1_matrix(m: usize) -> DMatrix<f64> {
    let s = (2.0 / (m as f64 + 1.0)).sqrt();
    DMatrix::from_fn(m, m, |j, k| s * (((j + 1) * (k + 1)) as f64 * PI / (m as f64 + 1.0)).sin())
}

/// `S^T P_i S` with the transform that diagonalizes the algebra for `(alpha, beta)`.
///
/// Only `(0, 0)` (DST-I) is available.
pub fn finite_transformed(i: usize, m: usize, alpha: f64, beta: f64) -> Result<DMatrix<f64>> {
    if alpha != 0.0 || beta != 0.0 {
        return Err(Error::NotImplemented(format!(
            "diagonalization for (alpha, beta) = ({alpha}, {beta}); expected family: {}",
            transform_family(alpha, beta)
        )));
    }
    let p = finite_basis(i, m, alpha, beta)?;
    let s = dst1_matrix(m);
    Ok(s.transpose() * p * &s)
}

/// Largest off-diagonal magnitude of the transformed basis matrix.
pub fn finite_diag_check(i: usize, m: usize, alpha: f64, beta: f64) -> Result<f64> {
    let d = finite_transformed(i, m, alpha, beta)?;
    let mut worst = 0.0f64;
    for r in 0..m {
        for c in 0..m {
            if r != c {
                worst = worst.max(d[(r, c)].abs());
            }
        }
    }
    Ok(worst)
}

/// Eigenvalues of `P_i^(0,0)` in DST-I order: `2 cos(i k pi / (m + 1))`, `k = 1..m`
/// (`1` for `i = 0`).
pub fn tau_eigenvalues(i: usize, m: usize) -> Vec<f64> {
    (1..=m)
        .map(|k| if i == 0 { 1.0 } else { 2.0 * ((i * k) as f64 * PI / (m as f64 + 1.0)).cos() })
        .collect()
}

fn transform_family(alpha: f64, beta: f64) -> &'static str {
    match (alpha, beta) {
        (a, b) if a == 1.0 && b == 1.0 => "DCT-II",
        (a, b) if a == -1.0 && b == -1.0 => "DST-II",
        (a, b) if a == 1.0 && b == -1.0 => "DCT-IV",
        (a, b) if a == -1.0 && b == 1.0 => "DST-IV",
        (a, b) if [-1.0, 0.0, 1.0].contains(&a) && [-1.0, 0.0, 1.0].contains(&b) => {
            "a sine or cosine transform of type V to VIII"
        }
        _ => "none known",
    }
}

/// Relative Frobenius residual of the least-squares fit of `P_i P_j` by `P_0..P_{m-1}`.
pub fn finite_closure_residual(i: usize, j: usize, m: usize, alpha: f64, beta: f64) -> Result<f64> {
    let prod = finite_basis(i, m, alpha, beta)? * finite_basis(j, m, alpha, beta)?;
    let basis = (0..m).map(|k| finite_basis(k, m, alpha, beta)).collect::<Result<Vec<_>>>()?;
    let cols = DMatrix::from_fn(m * m, m, |r, k| basis[k].as_slice()[r]);
    let rhs = DMatrix::from_column_slice(m * m, 1, prod.as_slice());
    let qr = cols.clone().qr();
    let qtb = qr.q().transpose() * &rhs;
    let coef = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::InvalidArgument("basis matrices are linearly dependent".into()))?;
    Ok((cols * coef - rhs).norm() / prod.norm().max(f64::MIN_POSITIVE))
}
