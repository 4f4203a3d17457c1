//! The basis `P_{n,alpha} = T(z^n + z^-n) + H(h_n)` of the algebra spanned by the
//! powers of `A_alpha = T(z + 1/z) + alpha e_1 e_1^T`, and the Hankel part
//! `H_alpha(a) = sum_n a_n H(h_n)` of `P_alpha(a)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::symbol::SymmetricSymbol;

/// Largest `n` for which the change-of-basis routines run; binomials stay in `u64`.
pub const MAX_BINOMIAL_N: usize = 60;

/// Coefficients of `h_n(z)` for `z^1..z^n`.
///
/// `n = 0` denotes the convention `h_0 = e_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisVector {
    pub n: usize,
    pub alpha: f64,
    pub entries: Vec<f64>,
}

/// Semi-infinite Hankel matrix with entries `eta_{i+j-1}`, zero beyond the stored column.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelBlock {
    pub first_column: Vec<f64>,
}

/// `P_alpha(a) = T(a) + H_alpha(a)`; the Hankel part is derived from `(alpha, a)` on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub alpha: f64,
    pub symbol: SymmetricSymbol,
}

pub fn theta(alpha: f64) -> f64 {
    alpha * alpha - 1.0
}

/// `h_n(z) = theta sum_{i=1}^{n-1} alpha^{n-i-1} z^i + alpha z^n`, `h_1(z) = alpha z`.
pub fn h_vector(n: usize, alpha: f64) -> BasisVector {
    if n == 0 {
        return BasisVector { n, alpha, entries: vec![1.0] };
    }
    let th = theta(alpha);
    let mut entries = vec![0.0; n];
    entries[n - 1] = alpha;
    // entries[i-1] = theta alpha^{n-i-1}, filled from i = n-1 downwards
    let mut p = 1.0;
    for i in (1..n).rev() {
        entries[i - 1] = th * p;
        p *= alpha;
    }
    BasisVector { n, alpha, entries }
}

/// First column of `H_alpha(a)`, through the backward recurrence
/// `t_d = 0`, `t_i = a_{i+1} + alpha t_{i+1}`, `eta_i = alpha a_i + theta t_i`.
pub fn eta_vector(a: &SymmetricSymbol, alpha: f64) -> HankelBlock {
    let d = a.degree();
    let th = theta(alpha);
    let mut eta = vec![0.0; d];
    let mut t = 0.0;
    for i in (1..=d).rev() {
        if i < d {
            t = a.coeff(i + 1) + alpha * t;
        }
        eta[i - 1] = alpha * a.coeff(i) + th * t;
    }
    HankelBlock { first_column: eta }
}

/// `|alpha| + (1 + |alpha|) |1 - |alpha|^{n-1}|`, the infinity norm of `H_{n,alpha}`.
pub fn hankel_norm_bound(n: usize, alpha: f64) -> f64 {
    assert!(n >= 1, "hankel_norm_bound needs n >= 1");
    let a = alpha.abs();
    a + (1.0 + a) * (1.0 - a.powi(n as i32 - 1)).abs()
}

/// Upper bound on the 2-norm of `H_{n,alpha}`; it coincides with the infinity-norm formula.
pub fn hankel_two_norm_bound(n: usize, alpha: f64) -> f64 {
    hankel_norm_bound(n, alpha)
}

/// Binomial coefficient with overflow detection.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::BinomialOverflow(n));
        }
    }
    Ok(acc as u64)
}

fn phi(n: usize) -> Result<u64> {
    if n % 2 == 1 {
        Ok(0)
    } else {
        binomial(n, n / 2)
    }
}

/// Expansion `A^n = sum_i binom(n, i) P_{n-2i} + phi_n I`.
///
/// `coeffs[i]` multiplies `P_{n-2i}` for `i = 0..=(n-1)/2`; the second value is `phi_n`.
pub fn power_to_basis(n: usize) -> Result<(Vec<u64>, u64)> {
    if n == 0 || n > MAX_BINOMIAL_N {
        return Err(Error::InvalidArgument(format!("power_to_basis needs 1 <= n <= {MAX_BINOMIAL_N}, got {n}")));
    }
    let coeffs = (0..=(n - 1) / 2).map(|i| binomial(n, i)).collect::<Result<Vec<_>>>()?;
    Ok((coeffs, phi(n)?))
}

/// Coefficients `c_0..c_n` with `P_n = sum_j c_j A^j`; integers independent of alpha.
///
/// Obtained by inverting the expansion recursively:
/// `P_n = A^n - sum_{i>=1} binom(n, i) P_{n-2i} - phi_n I`.
pub fn basis_to_power(n: usize) -> Result<Vec<i64>> {
    if n > MAX_BINOMIAL_N {
        return Err(Error::BinomialOverflow(n));
    }
    let mut table: Vec<Vec<i64>> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut c = vec![0i64; m + 1];
        c[m] = 1;
        if m >= 1 {
            for i in 1..=(m - 1) / 2 {
                let b = binomial(m, i)? as i64;
                for (j, &p) in table[m - 2 * i].iter().enumerate() {
                    c[j] = b
                        .checked_mul(p)
                        .and_then(|x| c[j].checked_sub(x))
                        .ok_or(Error::BinomialOverflow(m))?;
                }
            }
            c[0] -= phi(m)? as i64;
        }
        table.push(c);
    }
    Ok(table.pop().unwrap())
}

/// First column of the compact part `K_n` of `A_alpha^n`, by
/// `k_1 = alpha e_1`, `k_{m+1} = A_alpha k_m + sigma_m e_1`.
pub fn k_vector(n: usize, alpha: f64) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_BINOMIAL_N {
        return Err(Error::InvalidArgument(format!("k_vector needs 1 <= n <= {MAX_BINOMIAL_N}, got {n}")));
    }
    let mut k = vec![alpha];
    for m in 1..n {
        let sigma = if m % 2 == 0 {
            alpha * binomial(m, m / 2)? as f64
        } else {
            -(binomial(m, m / 2)? as f64)
        };
        k = apply_a_alpha(&k, alpha);
        k[0] += sigma;
        k.truncate(m + 1);
    }
    Ok(k)
}

/// `A_alpha x` for a finitely supported `x`; the result has one more entry.
pub fn apply_a_alpha(x: &[f64], alpha: f64) -> Vec<f64> {
    let n = x.len();
    let at = |i: isize| if i >= 0 && (i as usize) < n { x[i as usize] } else { 0.0 };
    let mut y: Vec<f64> = (0..=n as isize).map(|i| at(i - 1) + at(i + 1)).collect();
    if n > 0 {
        y[0] += alpha * x[0];
    }
    y
}

/// Closed-form Hankel parts for `alpha` in `{-1, 0, 1}`:
/// `-H((a/z)_+)` for 0 and `+-H(a_+)` for `+-1`.
pub fn special_case_form(alpha: f64, a: &SymmetricSymbol) -> Result<HankelBlock> {
    let d = a.degree();
    let first_column = if alpha == 0.0 {
        (1..=d).map(|i| -a.coeff(i + 1)).collect()
    } else if alpha == 1.0 {
        (1..=d).map(|i| a.coeff(i)).collect()
    } else if alpha == -1.0 {
        (1..=d).map(|i| -a.coeff(i)).collect()
    } else {
        return Err(Error::BadAlpha(alpha));
    };
    Ok(HankelBlock { first_column })
}

impl HankelBlock {
    pub fn len(&self) -> usize {
        self.first_column.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_column.is_empty()
    }

    /// Entry `(i, j)` with 0-based indices.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.first_column.get(i + j).copied().unwrap_or(0.0)
    }

    /// Sum of absolute values of the column, equal to the infinity norm of the matrix.
    pub fn norm_inf(&self) -> f64 {
        self.first_column.iter().map(|x| x.abs()).sum()
    }
}

impl AlgebraElement {
    pub fn new(alpha: f64, symbol: SymmetricSymbol) -> Self {
        Self { alpha, symbol }
    }

    pub fn hankel(&self) -> HankelBlock {
        eta_vector(&self.symbol, self.alpha)
    }

    /// Set when `|alpha| > 1`: boundedness for general (infinite) symbols needs
    /// analyticity in an annulus wider than `|alpha|`, which is not checked.
    pub fn unbounded_warning(&self) -> bool {
        self.alpha.abs() > 1.0
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, xs: &[f64]) -> fmt::Result {
    f.write_str("[")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str("]")
}

impl fmt::Display for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h_{} = ", self.n)?;
        write_seq(f, &self.entries)
    }
}

impl fmt::Display for HankelBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_seq(f, &self.first_column)
    }
}
