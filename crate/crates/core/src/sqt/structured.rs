//! Products of `T(a) + H` (banded Toeplitz plus anti-triangular Hankel) with tall dense factors.

use nalgebra::DMatrix;

use crate::fft::convolve_many;
use crate::symbol::SymmetricSymbol;

fn column(m: &DMatrix<f64>, j: usize) -> &[f64] {
    let r = m.nrows();
    &m.as_slice()[j * r..(j + 1) * r]
}

/// `(T(a) + H(eta)) X` where `X` has finite support in its `m` rows.
///
/// The result has `m + d` rows, the full support of the product; `eta` may be empty
/// and must have length at most `d`.
pub(crate) fn apply(a: &SymmetricSymbol, eta: &[f64], x: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, k) = x.shape();
    let d = a.degree();
    if m == 0 || k == 0 {
        return DMatrix::zeros(if k == 0 { 0 } else { m }, k);
    }
    let rows = m + d;
    let mut out = DMatrix::zeros(rows, k);
    let cols: Vec<&[f64]> = (0..k).map(|j| column(x, j)).collect();
    let stencil = a.full_laurent();
    let conv = convolve_many(&stencil, &cols);
    for (j, c) in conv.iter().enumerate() {
        for i in 0..rows {
            out[(i, j)] = c[i + d];
        }
    }
    if eta.iter().any(|&e| e != 0.0) {
        let rev: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().rev().copied().collect()).collect();
        let rev_refs: Vec<&[f64]> = rev.iter().map(|c| c.as_slice()).collect();
        let hconv = convolve_many(eta, &rev_refs);
        for (j, c) in hconv.iter().enumerate() {
            for r in 0..eta.len() {
                out[(r, j)] += c[r + m - 1];
            }
        }
    }
    out
}
