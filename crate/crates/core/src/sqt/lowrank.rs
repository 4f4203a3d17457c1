//! Finite-support low-rank corrections `K = U V^T` and their recompression.

use faer::Mat;
use nalgebra::DMatrix;
use rayon::prelude::*;

/// `K = U V^T` with `U: m x k`, `V: n x k`; support is the leading `m x n` block.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankCorrection {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl Default for LowRankCorrection {
    fn default() -> Self {
        Self::zero()
    }
}

impl LowRankCorrection {
    pub fn zero() -> Self {
        Self { u: DMatrix::zeros(0, 0), v: DMatrix::zeros(0, 0) }
    }

    pub fn new(u: DMatrix<f64>, v: DMatrix<f64>) -> Self {
        assert_eq!(u.ncols(), v.ncols(), "factor widths differ");
        if u.ncols() == 0 || u.nrows() == 0 || v.nrows() == 0 {
            return Self::zero();
        }
        Self { u, v }
    }

    /// Rank-one correction `s e_i e_j^T` (0-based indices).
    pub fn unit(i: usize, j: usize, s: f64) -> Self {
        let mut u = DMatrix::zeros(i + 1, 1);
        let mut v = DMatrix::zeros(j + 1, 1);
        u[(i, 0)] = s;
        v[(j, 0)] = 1.0;
        Self { u, v }
    }

    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn cols(&self) -> usize {
        self.v.nrows()
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(&self.u * s, self.v.clone())
    }

    pub fn transpose(&self) -> Self {
        Self { u: self.v.clone(), v: self.u.clone() }
    }

    /// Side-by-side factors `[U_1 U_2 ...]`, `[V_1 V_2 ...]`, padding rows with zeros.
    pub fn concat(parts: &[(&DMatrix<f64>, &DMatrix<f64>)]) -> Self {
        let us: Vec<&DMatrix<f64>> = parts.iter().map(|p| p.0).collect();
        let vs: Vec<&DMatrix<f64>> = parts.iter().map(|p| p.1).collect();
        Self::new(hstack(&us), hstack(&vs))
    }

    /// Leading `rows x cols` block of `U V^T`.
    pub fn to_dense(&self, rows: usize, cols: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(rows, cols);
        if self.is_zero() {
            return out;
        }
        let m = rows.min(self.rows());
        let n = cols.min(self.cols());
        if m == 0 || n == 0 {
            return out;
        }
        let block = self.u.rows(0, m) * self.v.rows(0, n).transpose();
        out.view_mut((0, 0), (m, n)).copy_from(&block);
        out
    }

    /// Row sums of `|U V^T|`, row by row.
    pub fn row_abs_sums(&self) -> Vec<f64> {
        if self.is_zero() {
            return Vec::new();
        }
        const CHUNK: usize = 64;
        let m = self.rows();
        let vt = self.v.transpose();
        let starts: Vec<usize> = (0..m).step_by(CHUNK).collect();
        let parts: Vec<Vec<f64>> = starts
            .par_iter()
            .map(|&s| {
                let len = CHUNK.min(m - s);
                let block = self.u.rows(s, len) * &vt;
                (0..len).map(|i| block.row(i).iter().map(|x| x.abs()).sum()).collect()
            })
            .collect();
        parts.concat()
    }

    /// Largest entry modulus of `U V^T`.
    pub fn max_abs_entry(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        const CHUNK: usize = 64;
        let m = self.rows();
        let vt = self.v.transpose();
        let starts: Vec<usize> = (0..m).step_by(CHUNK).collect();
        starts
            .par_iter()
            .map(|&s| (self.u.rows(s, CHUNK.min(m - s)) * &vt).abs().max())
            .reduce(|| 0.0, f64::max)
    }

    /// Exact infinity norm of `U V^T`.
    pub fn norm_inf(&self) -> f64 {
        self.row_abs_sums().into_iter().fold(0.0, f64::max)
    }

    /// Thin QR of both factors, SVD of the small core `R_U R_V^T`, truncation of
    /// singular values `<= tol * sigma_1`, and `Sigma^(1/2)` split between the factors.
    /// Singular values at the rounding level `k eps |U|_F |V|_F` are also dropped.
    /// Trailing rows whose norm is below `row_tol` times the largest are dropped.
    pub fn compressed(&self, tol: f64, row_tol: f64) -> Self {
        let u = trim_rows(&self.u, row_tol);
        let v = trim_rows(&self.v, row_tol);
        if u.ncols() == 0 || u.nrows() == 0 || v.nrows() == 0 {
            return Self::zero();
        }
        let floor = f64::EPSILON * u.ncols() as f64 * u.norm() * v.norm();
        let qu = to_faer(&u).qr();
        let qv = to_faer(&v).qr();
        let (q_u, r_u) = (qu.compute_thin_Q(), qu.thin_R().to_owned());
        let (q_v, r_v) = (qv.compute_thin_Q(), qv.thin_R().to_owned());
        let core = &r_u * r_v.transpose();
        let Ok(svd) = core.svd() else {
            return self.clone();
        };
        let sv = svd.S().column_vector();
        let mut order: Vec<usize> = (0..sv.nrows()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
        let s1 = order.first().map_or(0.0, |&i| sv[i]);
        // values below the rounding level of the core product come from exact cancellation
        let cut = (tol * s1).max(floor);
        let keep: Vec<usize> = order.into_iter().filter(|&i| sv[i] > cut).collect();
        if keep.is_empty() {
            return Self::zero();
        }
        let (w, z) = (svd.U(), svd.V());
        let wu = Mat::from_fn(w.nrows(), keep.len(), |r, c| w[(r, keep[c])] * sv[keep[c]].sqrt());
        let wv = Mat::from_fn(z.nrows(), keep.len(), |r, c| z[(r, keep[c])] * sv[keep[c]].sqrt());
        let u_full = from_faer(&(&q_u * &wu));
        let v_full = from_faer(&(&q_v * &wv));
        let u_new = trim_rows(&u_full, row_tol);
        let v_new = trim_rows(&v_full, row_tol);
        Self::new(u_new, v_new)
    }
}

pub(crate) fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub(crate) fn from_faer(m: &Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = match to_faer(m).singular_values() {
        Ok(s) => s,
        Err(_) => vec![f64::NAN],
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Horizontal concatenation with zero padding to the tallest block.
pub(crate) fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.iter().map(|b| if b.ncols() == 0 { 0 } else { b.nrows() }).max().unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        if b.ncols() == 0 {
            continue;
        }
        out.view_mut((0, c), (b.nrows(), b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// Copy of `m` padded or cut to exactly `rows` rows.
pub(crate) fn resize_rows(m: &DMatrix<f64>, rows: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows, m.ncols());
    let r = rows.min(m.nrows());
    if r > 0 && m.ncols() > 0 {
        out.view_mut((0, 0), (r, m.ncols())).copy_from(&m.rows(0, r));
    }
    out
}

/// `A^T B` over the rows both factors share (missing rows are zero).
pub(crate) fn overlap_tr_mul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let r = a.nrows().min(b.nrows());
    if r == 0 {
        return DMatrix::zeros(a.ncols(), b.ncols());
    }
    a.rows(0, r).tr_mul(&b.rows(0, r))
}

/// Drops trailing rows whose max-norm is `<= tol` times the largest row max-norm.
pub(crate) fn trim_rows(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return m.clone();
    }
    let row_norm = |i: usize| m.row(i).iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let big = (0..m.nrows()).map(row_norm).fold(0.0, f64::max);
    let thresh = tol * big;
    let mut end = m.nrows();
    while end > 0 && row_norm(end - 1) <= thresh {
        end -= 1;
    }
    if end == m.nrows() {
        m.clone()
    } else {
        m.rows(0, end).into_owned()
    }
}

/// Low-rank factors `H(v) ~ U V^T` of the `n x n` Hankel matrix with entries `v_{i+j}` (0-based),
/// by adaptive cross approximation with partial pivoting.
///
/// Stops after two consecutive probes whose largest residual entry is `<= tol * max |v|`.
pub(crate) fn aca_hankel(v: &[f64], tol: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = v.len();
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if n == 0 || vmax == 0.0 {
        return (DMatrix::zeros(n, 0), DMatrix::zeros(n, 0));
    }
    let entry = |i: usize, j: usize| if i + j < n { v[i + j] } else { 0.0 };
    let thresh = tol * vmax;
    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut ws: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];
    let mut i = 0;
    let mut small = 0;
    while us.len() < n {
        used[i] = true;
        let mut row: Vec<f64> = (0..n).map(|j| entry(i, j)).collect();
        for (u, w) in us.iter().zip(&ws) {
            let ui = u[i];
            if ui != 0.0 {
                row.iter_mut().zip(w).for_each(|(r, wj)| *r -= ui * wj);
            }
        }
        let (jp, piv) = row
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bj, bv), (j, &x)| if x.abs() > bv.abs() { (j, x) } else { (bj, bv) });
        let next_unused = |used: &[bool], col: Option<&[f64]>| -> Option<usize> {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..n {
                if used[r] {
                    continue;
                }
                let score = col.map_or(v[r].abs(), |c| c[r].abs());
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((r, score));
                }
            }
            best.map(|b| b.0)
        };
        if piv.abs() <= thresh {
            small += 1;
            if small >= 2 {
                break;
            }
            match next_unused(&used, None) {
                Some(r) => i = r,
                None => break,
            }
            continue;
        }
        small = 0;
        let w: Vec<f64> = row.iter().map(|x| x / piv).collect();
        let mut col: Vec<f64> = (0..n).map(|r| entry(r, jp)).collect();
        for (u, wk) in us.iter().zip(&ws) {
            let wj = wk[jp];
            if wj != 0.0 {
                col.iter_mut().zip(u).for_each(|(c, ur)| *c -= ur * wj);
            }
        }
        us.push(col);
        ws.push(w);
        match next_unused(&used, us.last().map(|c| c.as_slice())) {
            Some(r) => i = r,
            None => break,
        }
    }
    let k = us.len();
    let u = DMatrix::from_fn(n, k, |r, c| us[c][r]);
    let w = DMatrix::from_fn(n, k, |r, c| ws[c][r]);
    (u, w)
}
