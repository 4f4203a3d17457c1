//! Semi-infinite matrices `A = P_alpha(a) + U V^T` (algebra mode) or `A = T(a) + U V^T`
//! (Toeplitz mode), with arithmetic, recompression, inversion and a dense-truncation oracle.

pub mod io;
pub mod lowrank;
mod structured;

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::algebra::{eta_vector, AlgebraElement};
use crate::error::{Error, Result};
use crate::symbol::{SymmetricSymbol, DEFAULT_TRIM_TOL};

pub use lowrank::LowRankCorrection;
use lowrank::{aca_hankel, hstack, overlap_tr_mul, resize_rows, trim_rows};

/// Representation of the structured part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `P_alpha(a) + K`.
    Algebra,
    /// `T(a) + E`.
    Toeplitz,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Algebra => "ALG",
            Mode::Toeplitz => "TOE",
        })
    }
}

/// Numerical thresholds shared by the matrix operations.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative singular-value cutoff for recompression.
    pub compress: f64,
    /// Relative row-norm cutoff for trailing rows of tall factors.
    pub rows: f64,
    /// Relative coefficient cutoff applied to iterates by the solvers.
    pub trim: f64,
    /// Relative coefficient cutoff applied to inverted symbols.
    pub inverse_trim: f64,
    /// Relative pivot cutoff of the cross approximation of large Hankel blocks.
    pub aca: f64,
    /// Hankel blocks up to this size are factored exactly instead of approximated.
    pub hankel_exact_limit: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { compress: 1e-15, rows: 1e-15, trim: DEFAULT_TRIM_TOL, inverse_trim: 1e-18, aca: 1e-14, hankel_exact_limit: 128 }
    }
}

/// Sizes observed inside one product, before recompression.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MulStats {
    /// Total width of the correction factors before compression.
    pub factor_width: usize,
    /// Width contributed by the Hankel product (Toeplitz mode only).
    pub hankel_width: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SqtMatrix {
    mode: Mode,
    element: AlgebraElement,
    correction: LowRankCorrection,
}

impl SqtMatrix {
    pub fn new(mode: Mode, alpha: f64, symbol: SymmetricSymbol, correction: LowRankCorrection) -> Self {
        Self { mode, element: AlgebraElement::new(alpha, symbol), correction }
    }

    /// `P_alpha(a)` with zero correction.
    pub fn from_symbol(alpha: f64, a: SymmetricSymbol) -> Self {
        Self::new(Mode::Algebra, alpha, a, LowRankCorrection::zero())
    }

    /// Pure Toeplitz `T(a)`.
    pub fn toeplitz(a: SymmetricSymbol) -> Self {
        Self::new(Mode::Toeplitz, 0.0, a, LowRankCorrection::zero())
    }

    pub fn identity(mode: Mode, alpha: f64) -> Self {
        Self::new(mode, alpha, SymmetricSymbol::one(), LowRankCorrection::zero())
    }

    pub fn zero(mode: Mode, alpha: f64) -> Self {
        Self::new(mode, alpha, SymmetricSymbol::zero(), LowRankCorrection::zero())
    }

    pub fn with_correction(&self, correction: LowRankCorrection) -> Self {
        Self { correction, ..self.clone() }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn alpha(&self) -> f64 {
        self.element.alpha
    }

    pub fn element(&self) -> &AlgebraElement {
        &self.element
    }

    pub fn symbol(&self) -> &SymmetricSymbol {
        &self.element.symbol
    }

    pub fn correction(&self) -> &LowRankCorrection {
        &self.correction
    }

    /// First column of the Hankel part carried by the structured term (empty in Toeplitz mode).
    pub fn hankel_column(&self) -> Vec<f64> {
        match self.mode {
            Mode::Algebra => eta_vector(self.symbol(), self.alpha()).first_column,
            Mode::Toeplitz => Vec::new(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.mode, self.alpha(), self.symbol().scale(s), self.correction.scaled(s))
    }

    /// Symbol trimmed at `tol` relative to its largest coefficient.
    pub fn trimmed(&self, tol: f64) -> Self {
        Self::new(self.mode, self.alpha(), self.symbol().trimmed(tol), self.correction.clone())
    }

    pub fn compressed(&self, tol: &Tolerances) -> Self {
        self.with_correction(self.correction.compressed(tol.compress, tol.rows))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.mode != other.mode {
            return Err(Error::ModeMismatch);
        }
        if self.mode == Mode::Algebra && self.alpha() != other.alpha() {
            return Err(Error::AlphaMismatch(self.alpha(), other.alpha()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_with(other, &Tolerances::default())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_with(&other.scaled(-1.0), &Tolerances::default())
    }

    pub fn add_with(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        self.check_compatible(other)?;
        let symbol = self.symbol().add(other.symbol());
        let k = LowRankCorrection::concat(&[
            (&self.correction.u, &self.correction.v),
            (&other.correction.u, &other.correction.v),
        ]);
        Ok(Self::new(self.mode, self.alpha(), symbol, k.compressed(tol.compress, tol.rows)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_with(other, &Tolerances::default()).map(|(m, _)| m)
    }

    /// Product with the pre-compression factor widths.
    pub fn mul_with(&self, other: &Self, tol: &Tolerances) -> Result<(Self, MulStats)> {
        self.check_compatible(other)?;
        let (a, b) = (self.symbol(), other.symbol());
        let (eta_a, eta_b) = (self.hankel_column(), other.hankel_column());
        let (ua, va) = (&self.correction.u, &self.correction.v);
        let (ub, vb) = (&other.correction.u, &other.correction.v);
        let mut us: Vec<DMatrix<f64>> = Vec::new();
        let mut vs: Vec<DMatrix<f64>> = Vec::new();
        if !other.correction.is_zero() {
            us.push(trim_rows(&structured::apply(a, &eta_a, ub), tol.rows));
            vs.push(vb.clone());
        }
        if !self.correction.is_zero() {
            let mut right = structured::apply(b, &eta_b, va);
            if !other.correction.is_zero() {
                let extra = vb * overlap_tr_mul(ub, va);
                let rows = right.nrows().max(extra.nrows());
                right = resize_rows(&right, rows) + resize_rows(&extra, rows);
            }
            us.push(ua.clone());
            vs.push(trim_rows(&right, tol.rows));
        }
        let mut hankel_width = 0;
        if self.mode == Mode::Toeplitz {
            let (uh, vh) = hankel_product(&a.coeffs()[1..], &b.coeffs()[1..], tol);
            hankel_width = uh.ncols();
            if hankel_width > 0 {
                us.push(uh);
                vs.push(-vh);
            }
        }
        let u_refs: Vec<&DMatrix<f64>> = us.iter().collect();
        let v_refs: Vec<&DMatrix<f64>> = vs.iter().collect();
        let u = hstack(&u_refs);
        let v = hstack(&v_refs);
        let stats = MulStats { factor_width: u.ncols(), hankel_width };
        let k = LowRankCorrection::new(u, v).compressed(tol.compress, tol.rows);
        Ok((Self::new(self.mode, self.alpha(), a.mul(b), k), stats))
    }

    pub fn inverse(&self, eps: f64) -> Result<Self> {
        self.inverse_with(eps, &Tolerances::default())
    }

    /// Inverse through the symbol inverse and a Sherman-Woodbury-Morrison update.
    ///
    /// The symbol is inverted with the scale-relative stop test of
    /// [`SymmetricSymbol::inverse_scaled`].
    pub fn inverse_with(&self, eps: f64, tol: &Tolerances) -> Result<Self> {
        let (c, _) = self.symbol().inverse_scaled(eps)?;
        let c = c.trimmed(tol.inverse_trim);
        let (u, v) = (&self.correction.u, &self.correction.v);
        match self.mode {
            Mode::Algebra => {
                let eta_c = eta_vector(&c, self.alpha()).first_column;
                if self.correction.is_zero() {
                    return Ok(Self::from_symbol(self.alpha(), c));
                }
                let w = trim_rows(&structured::apply(&c, &eta_c, u), tol.rows);
                let s = DMatrix::identity(u.ncols(), u.ncols()) + overlap_tr_mul(v, &w);
                let w_new = -right_solve(&w, &s)?;
                let v_new = trim_rows(&structured::apply(&c, &eta_c, v), tol.rows);
                let k = LowRankCorrection::new(w_new, v_new).compressed(tol.compress, tol.rows);
                Ok(Self::new(Mode::Algebra, self.alpha(), c, k))
            }
            Mode::Toeplitz => {
                let a = self.symbol();
                let (uh, vh) = hankel_product(&a.coeffs()[1..], &c.coeffs()[1..], tol);
                let (fu, fv) = if uh.ncols() == 0 {
                    (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
                } else {
                    let s1 = DMatrix::identity(uh.ncols(), uh.ncols()) - overlap_tr_mul(&vh, &uh);
                    let tu = trim_rows(&structured::apply(&c, &[], &uh), tol.rows);
                    (right_solve(&tu, &s1)?, vh)
                };
                let mut parts: Vec<(DMatrix<f64>, DMatrix<f64>)> = Vec::new();
                if fu.ncols() > 0 {
                    parts.push((fu.clone(), fv.clone()));
                }
                if !self.correction.is_zero() {
                    let mut w = structured::apply(&c, &[], u);
                    let mut z = structured::apply(&c, &[], v);
                    if fu.ncols() > 0 {
                        w = add_padded(&w, &(&fu * overlap_tr_mul(&fv, u)));
                        z = add_padded(&z, &(&fv * overlap_tr_mul(&fu, v)));
                    }
                    let w = trim_rows(&w, tol.rows);
                    let s = DMatrix::identity(u.ncols(), u.ncols()) + overlap_tr_mul(v, &w);
                    parts.push((-right_solve(&w, &s)?, trim_rows(&z, tol.rows)));
                }
                let refs: Vec<(&DMatrix<f64>, &DMatrix<f64>)> = parts.iter().map(|(a, b)| (a, b)).collect();
                let k = LowRankCorrection::concat(&refs).compressed(tol.compress, tol.rows);
                Ok(Self::new(Mode::Toeplitz, self.alpha(), c, k))
            }
        }
    }

    pub fn convert(&self, target: Mode, alpha: f64) -> Self {
        self.convert_with(target, alpha, &Tolerances::default())
    }

    /// Same semi-infinite matrix in another representation (or another `alpha`).
    pub fn convert_with(&self, target: Mode, alpha: f64, tol: &Tolerances) -> Self {
        let a = self.symbol();
        let mut parts: Vec<(DMatrix<f64>, DMatrix<f64>)> = Vec::new();
        if !self.correction.is_zero() {
            parts.push((self.correction.u.clone(), self.correction.v.clone()));
        }
        // Hankel part currently carried by the structured term moves into the correction.
        if self.mode == Mode::Algebra {
            let (u, v) = hankel_factors(&eta_vector(a, self.alpha()).first_column, tol);
            if u.ncols() > 0 {
                parts.push((u, v));
            }
        }
        if target == Mode::Algebra {
            let (u, v) = hankel_factors(&eta_vector(a, alpha).first_column, tol);
            if u.ncols() > 0 {
                parts.push((-u, v));
            }
        }
        let refs: Vec<(&DMatrix<f64>, &DMatrix<f64>)> = parts.iter().map(|(a, b)| (a, b)).collect();
        let k = LowRankCorrection::concat(&refs).compressed(tol.compress, tol.rows);
        let alpha = if target == Mode::Algebra { alpha } else { self.alpha() };
        Self::new(target, alpha, a.clone(), k)
    }

    /// Exact infinity norm.
    pub fn norm_inf(&self) -> f64 {
        let a = self.symbol();
        let d = a.degree();
        let eta = self.hankel_column();
        let k = &self.correction;
        let n0 = d.max(k.rows());
        let width = (n0 + d + 1).max(k.cols());
        let vt = k.v.transpose();
        const CHUNK: usize = 64;
        let starts: Vec<usize> = (0..n0).step_by(CHUNK).collect();
        let explicit = starts
            .par_iter()
            .map(|&s| {
                let len = CHUNK.min(n0 - s);
                let kb = if k.is_zero() || s >= k.rows() {
                    None
                } else {
                    let r = len.min(k.rows() - s);
                    Some(k.u.rows(s, r) * &vt)
                };
                let mut best = 0.0f64;
                let mut row = vec![0.0; width];
                for off in 0..len {
                    let i = s + off;
                    row.iter_mut().for_each(|x| *x = 0.0);
                    let lo = i.saturating_sub(d);
                    for (j, x) in row.iter_mut().enumerate().take(i + d + 1).skip(lo) {
                        *x = a.coeff(i.abs_diff(j));
                    }
                    for (j, e) in eta.iter().enumerate().skip(i) {
                        row[j - i] += e;
                    }
                    if let Some(kb) = &kb {
                        if off < kb.nrows() {
                            for (j, x) in kb.row(off).iter().enumerate() {
                                row[j] += x;
                            }
                        }
                    }
                    best = best.max(row.iter().map(|x| x.abs()).sum());
                }
                best
            })
            .reduce(|| 0.0, f64::max);
        explicit.max(a.wiener_norm())
    }

    /// Exact infinity norm of the correction alone.
    pub fn correction_norm_inf(&self) -> f64 {
        self.correction.norm_inf()
    }

    /// Largest entry modulus of the correction.
    pub fn correction_max_entry(&self) -> f64 {
        self.correction.max_abs_entry()
    }

    /// `A x` for a finitely supported `x`; the result covers the full support of the product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let d = self.symbol().degree();
        let len = (x.len() + d).max(self.correction.rows());
        let mut y = vec![0.0; len];
        if !x.is_empty() {
            let xm = DMatrix::from_column_slice(x.len(), 1, x);
            let t = structured::apply(self.symbol(), &self.hankel_column(), &xm);
            y[..t.nrows()].copy_from_slice(t.as_slice());
        }
        let k = &self.correction;
        if !k.is_zero() {
            let r = k.cols().min(x.len());
            if r > 0 {
                let xv = nalgebra::DVector::from_column_slice(&x[..r]);
                let coef = k.v.rows(0, r).tr_mul(&xv);
                let ku = &k.u * coef;
                for (yi, v) in y.iter_mut().zip(ku.iter()) {
                    *yi += v;
                }
            }
        }
        y
    }

    /// Leading `n x n` block.
    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let a = self.symbol();
        let eta = self.hankel_column();
        let mut out = self.correction.to_dense(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += a.coeff(i.abs_diff(j)) + eta.get(i + j).copied().unwrap_or(0.0);
            }
        }
        out
    }
}

impl fmt::Display for SqtMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} alpha={} degree={} correction {}x{} rank {}",
            self.mode,
            self.alpha(),
            self.symbol().degree(),
            self.correction.rows(),
            self.correction.cols(),
            self.correction.rank()
        )
    }
}

fn add_padded(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = a.nrows().max(b.nrows());
    resize_rows(a, rows) + resize_rows(b, rows)
}

/// `W S^{-1}`, rejecting blocks that are singular to working precision.
fn right_solve(w: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sv = lowrank::singular_values(s);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if !(smax.is_finite() && smin > f64::EPSILON * s.nrows() as f64 * smax) {
        return Err(Error::SingularSmallBlock);
    }
    let lu = s.transpose().lu();
    lu.solve(&w.transpose()).map(|x| x.transpose()).ok_or(Error::SingularSmallBlock)
}

/// Factors of the `n x n` Hankel matrix with first column `v` (entries `v_{i+j}`):
/// exact `(H, I)` for small blocks, cross approximation otherwise.
fn hankel_factors(v: &[f64], tol: &Tolerances) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = v.len();
    if n == 0 || v.iter().all(|&x| x == 0.0) {
        return (DMatrix::zeros(n, 0), DMatrix::zeros(n, 0));
    }
    if n <= tol.hankel_exact_limit {
        let h = DMatrix::from_fn(n, n, |i, j| if i + j < n { v[i + j] } else { 0.0 });
        (h, DMatrix::identity(n, n))
    } else {
        aca_hankel(v, tol.aca)
    }
}

/// Factors `U V^T = H(p) H(q)` of the product of two Hankel matrices with first
/// columns `p` and `q`; exact width `min(len p, len q)` below the size limit.
fn hankel_product(p: &[f64], q: &[f64], tol: &Tolerances) -> (DMatrix<f64>, DMatrix<f64>) {
    let r = p.len().min(q.len());
    if r == 0 {
        return (DMatrix::zeros(p.len(), 0), DMatrix::zeros(q.len(), 0));
    }
    if r <= tol.hankel_exact_limit {
        let u = DMatrix::from_fn(p.len(), r, |i, l| p.get(i + l).copied().unwrap_or(0.0));
        let v = DMatrix::from_fn(q.len(), r, |j, l| q.get(j + l).copied().unwrap_or(0.0));
        (u, v)
    } else {
        let (u1, w1) = aca_hankel(p, tol.aca);
        let (u2, w2) = aca_hankel(q, tol.aca);
        (u1 * overlap_tr_mul(&w1, &u2), w2)
    }
}
