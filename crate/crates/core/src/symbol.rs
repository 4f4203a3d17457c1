//! Arithmetic on symmetric Laurent polynomials.
//!
//! A symbol `a(z) = a_0 + sum_{i=1..d} a_i (z^i + z^-i)` is stored by its
//! one-sided coefficients `a_0..a_d`. The full Laurent vector only exists inside
//! transform scratch buffers. Products, reciprocals and general functions are
//! computed by evaluation on a root-of-unity grid followed by interpolation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// Relative tolerance used when trimming the tail of a symbol.
pub const DEFAULT_TRIM_TOL: f64 = 1e-15;

/// Finite symmetric Laurent polynomial, stored as `a_0..a_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricSymbol {
    coeffs: Vec<f64>,
}

/// Values of a symmetric symbol on the grid `omega_N^1, ..., omega_N^N`.
///
/// `values[j]` holds the value at `omega_N^(j+1)`, so the last entry is the value at `z = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridValues {
    values: Vec<f64>,
}

impl SymmetricSymbol {
    /// Builds a symbol from `a_0..a_d`. An empty vector denotes the zero symbol.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Number of stored coefficients, `d + 1`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coefficient of `z^i` (equal to that of `z^-i`); zero outside the support.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// `|a_0| + 2 sum_{i>=1} |a_i|`, which is also the infinity norm of `T(a)`.
    pub fn wiener_norm(&self) -> f64 {
        self.coeffs[0].abs() + 2.0 * self.coeffs[1..].iter().map(|c| c.abs()).sum::<f64>()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Value on the unit circle at `z = exp(i theta)`.
    pub fn eval_angle(&self, theta: f64) -> f64 {
        self.coeffs[0]
            + 2.0
                * self.coeffs[1..]
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * ((i + 1) as f64 * theta).cos())
                    .sum::<f64>()
    }

    /// Two-sided coefficient vector `a_-d, ..., a_0, ..., a_d`.
    pub fn full_laurent(&self) -> Vec<f64> {
        let d = self.degree();
        (0..=2 * d).map(|k| self.coeffs[k.abs_diff(d)]).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Componentwise sum, with exact trailing zeros removed.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Self::new(coeffs).trimmed(0.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect();
        Self::new(coeffs).trimmed(0.0)
    }

    /// Product of symbols.
    ///
    /// Moderate sizes use direct convolution, whose rounding error scales with each
    /// output coefficient's own magnitude; larger ones go through [`Self::mul_fft`].
    pub fn mul(&self, other: &Self) -> Self {
        if self.degree() == 0 || other.degree() == 0 {
            let (c, s) = if self.degree() == 0 { (self.coeffs[0], other) } else { (other.coeffs[0], self) };
            return s.scale(c);
        }
        if (self.len() as u64) * (other.len() as u64) <= DIRECT_MUL_LIMIT {
            self.mul_direct(other)
        } else {
            self.mul_fft(other)
        }
    }

    fn mul_direct(&self, other: &Self) -> Self {
        let (da, db) = (self.degree() as isize, other.degree() as isize);
        let fb = other.full_laurent();
        let mut out = vec![0.0; (da + db + 1) as usize];
        for i in -da..=da {
            let x = self.coeffs[i.unsigned_abs()];
            let j_lo = (-db).max(-i);
            if j_lo > db {
                continue;
            }
            let k_lo = (i + j_lo) as usize;
            let k_hi = (i + db) as usize;
            for (o, y) in out[k_lo..=k_hi].iter_mut().zip(&fb[(j_lo + db) as usize..]) {
                *o += x * y;
            }
        }
        Self::new(out)
    }

    /// Product through evaluation on a power-of-two grid with `N > 2 (d_a + d_b)`.
    ///
    /// Both operands are packed into one complex transform: the grid values of a
    /// real symmetric symbol are real, so they separate into real and imaginary parts.
    pub fn mul_fft(&self, other: &Self) -> Self {
        let dc = self.degree() + other.degree();
        let (sa, sb) = (pow2_scale(self.max_abs()), pow2_scale(other.max_abs()));
        let n = fft::pow2_at_least(2 * dc + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            buf[k].re += c * sa;
            if k > 0 {
                buf[n - k].re += c * sa;
            }
        }
        for (k, &c) in other.coeffs.iter().enumerate() {
            buf[k].im += c * sb;
            if k > 0 {
                buf[n - k].im += c * sb;
            }
        }
        fft::forward(&mut buf);
        for z in buf.iter_mut() {
            *z = Complex64::new(z.re * z.im, 0.0);
        }
        fft::inverse(&mut buf);
        let scale = 1.0 / (n as f64 * sa * sb);
        let mut coeffs = Vec::with_capacity(dc + 1);
        coeffs.push(buf[0].re * scale);
        for k in 1..=dc {
            coeffs.push(0.5 * (buf[k].re + buf[n - k].re) * scale);
        }
        Self::new(coeffs)
    }

    /// Values `a(omega_N^i)` for `i = 1..N`.
    pub fn eval_grid(&self, n: usize) -> Result<GridValues> {
        if !n.is_power_of_two() || n <= self.degree() {
            return Err(Error::BadGridSize { n, degree: self.degree() });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            buf[k % n].re += c;
            if k > 0 {
                buf[(n - k % n) % n].re += c;
            }
        }
        fft::forward(&mut buf);
        debug_assert!(
            buf.iter().all(|z| z.im.abs() <= 1e-13 * self.wiener_norm().max(f64::MIN_POSITIVE) + 1e-300),
            "grid values of a symmetric real symbol must be real"
        );
        let values = (1..=n).map(|j| buf[j % n].re).collect();
        Ok(GridValues { values })
    }

    /// Drops trailing coefficients with `|a_i| <= tol * max_j |a_j|`; `a_0` is always kept.
    pub fn trimmed(&self, tol: f64) -> Self {
        let thresh = tol * self.max_abs();
        let mut end = self.coeffs.len();
        while end > 1 && self.coeffs[end - 1].abs() <= thresh {
            end -= 1;
        }
        Self { coeffs: self.coeffs[..end].to_vec() }
    }

    /// Reciprocal `1/a(z)` by adaptive grid doubling, with the condition estimate
    /// `max |a| / min |a|` over the final grid.
    ///
    /// Stops when every coefficient of `a c - 1` is at most `eps`; fails with
    /// [`Error::IllConditioned`] once the estimate exceeds `1/eps`.
    pub fn inverse(&self, eps: f64) -> Result<(Self, f64)> {
        self.inverse_impl(eps, false)
    }

    /// Same as [`SymmetricSymbol::inverse`], but the stop test is relative to the rounding
    /// scale of the check product: `max |coeff(a c - 1)| <= eps |a|_W |c|_W`.
    pub fn inverse_scaled(&self, eps: f64) -> Result<(Self, f64)> {
        self.inverse_impl(eps, true)
    }

    fn inverse_impl(&self, eps: f64, scaled: bool) -> Result<(Self, f64)> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::InvalidArgument(format!("inversion tolerance must be positive, got {eps}")));
        }
        let d = self.degree();
        let cap = fft::max_grid();
        let mut n = 1usize;
        while n <= d {
            n *= 2;
        }
        loop {
            n *= 2;
            if n > cap {
                return Err(Error::NoConvergence(format!("symbol inversion exceeded grid cap {cap}")));
            }
            let y = self.eval_grid(n)?;
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &v in &y.values {
                lo = lo.min(v.abs());
                hi = hi.max(v.abs());
            }
            if lo == 0.0 {
                return Err(Error::ZeroOnCircle);
            }
            let cond = hi / lo;
            if cond > 1.0 / eps {
                return Err(Error::IllConditioned { cond });
            }
            let recip = GridValues { values: y.values.iter().map(|v| 1.0 / v).collect() };
            let t = recip.interpolate()?;
            let r = self.mul(&t);
            let delta = r
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| if i == 0 { (c - 1.0).abs() } else { c.abs() })
                .fold(0.0, f64::max);
            let bound = if scaled { eps * self.wiener_norm() * t.wiener_norm() } else { eps };
            if delta <= bound {
                return Ok((t, cond));
            }
        }
    }

    /// Approximates `f(a(z))` by interpolation on grids of doubling size.
    ///
    /// Accepts the grid once the top quarter of the interpolated coefficients is
    /// below `tol` relative to the largest one, then trims at `tol`.
    pub fn map_grid<F: Fn(f64) -> f64>(&self, f: F, tol: f64) -> Result<Self> {
        let cap = fft::max_grid();
        let mut n = fft::pow2_at_least(2 * self.degree() + 1).max(4);
        loop {
            if n > cap {
                return Err(Error::NoConvergence(format!("grid map exceeded grid cap {cap}")));
            }
            let mut y = self.eval_grid(n)?;
            for v in y.values.iter_mut() {
                *v = f(*v);
                if !v.is_finite() {
                    return Err(Error::DomainFault("grid map".into()));
                }
            }
            let t = y.interpolate()?;
            if tail_decayed(&t, tol) {
                return Ok(t.trimmed(tol));
            }
            n *= 2;
        }
    }

    /// One-line text record `S a_0 ... a_d` with 17 significant digits.
    pub fn to_record(&self) -> String {
        let mut s = String::from("S");
        for c in &self.coeffs {
            s.push(' ');
            s.push_str(&format_f17(*c));
        }
        s
    }

    /// Parses a record produced by [`SymmetricSymbol::to_record`].
    pub fn parse_record(line: &str) -> Result<Self> {
        let mut toks = line.split_whitespace();
        if toks.next() != Some("S") {
            return Err(Error::Parse { line: 1, msg: "symbol record must start with 'S'".into() });
        }
        let coeffs = parse_floats(toks, 1)?;
        if coeffs.is_empty() {
            return Err(Error::Parse { line: 1, msg: "symbol record has no coefficients".into() });
        }
        Ok(Self::new(coeffs))
    }
}

/// True when the top quarter of the coefficients is negligible relative to `tol`.
pub(crate) fn tail_decayed(t: &SymmetricSymbol, tol: f64) -> bool {
    let h = t.degree();
    let start = (3 * h).div_ceil(4).max(1);
    let top = t.coeffs.get(start..).map_or(0.0, |s| s.iter().fold(0.0f64, |m, c| m.max(c.abs())));
    top <= tol * t.max_abs()
}

pub(crate) fn format_f17(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_floats<'a>(toks: impl Iterator<Item = &'a str>, line: usize) -> Result<Vec<f64>> {
    toks.map(|t| {
        t.parse::<f64>()
            .map_err(|e| Error::Parse { line, msg: format!("bad number '{t}': {e}") })
    })
    .collect()
}

impl GridValues {
    /// Wraps grid values; the length must be a power of two.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(Error::BadGridSize { n: values.len(), degree: 0 });
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Symmetric interpolant of degree `N/2`.
    ///
    /// The two-sided interpolant `t_{-N/2+1..N/2}` is folded by averaging `t_i` and
    /// `t_-i`; the Nyquist term is halved so that the symmetric symbol still
    /// reproduces the grid values.
    pub fn interpolate(&self) -> Result<SymmetricSymbol> {
        let n = self.values.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (j, &v) in self.values.iter().enumerate() {
            buf[(j + 1) % n].re = v;
        }
        fft::forward(&mut buf);
        let scale = 1.0 / n as f64;
        let vmax = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut asym = 0.0f64;
        for k in 1..n / 2 {
            asym = asym.max((buf[k] - buf[n - k]).norm() * scale);
        }
        if asym > 1e-13 * vmax {
            return Err(Error::AsymmetryDetected { residual: asym });
        }
        let h = n / 2;
        let mut coeffs = Vec::with_capacity(h + 1);
        coeffs.push(buf[0].re * scale);
        for k in 1..h {
            coeffs.push(0.5 * (buf[k].re + buf[n - k].re) * scale);
        }
        if h >= 1 {
            coeffs.push(0.5 * buf[h].re * scale);
        }
        Ok(SymmetricSymbol::new(coeffs))
    }
}

/// Largest `len_a * len_b` multiplied by direct convolution.
const DIRECT_MUL_LIMIT: u64 = 1 << 24;

/// Power of two bringing `m` near one; packing two operands into one transform
/// needs them on the same scale.
fn pow2_scale(m: f64) -> f64 {
    if m > 0.0 && m.is_finite() {
        2f64.powi(-m.log2().round() as i32)
    } else {
        1.0
    }
}

impl fmt::Display for SymmetricSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_record())
    }
}

impl Add for &SymmetricSymbol {
    type Output = SymmetricSymbol;
    fn add(self, rhs: Self) -> SymmetricSymbol {
        SymmetricSymbol::add(self, rhs)
    }
}

impl Sub for &SymmetricSymbol {
    type Output = SymmetricSymbol;
    fn sub(self, rhs: Self) -> SymmetricSymbol {
        SymmetricSymbol::sub(self, rhs)
    }
}

impl Mul for &SymmetricSymbol {
    type Output = SymmetricSymbol;
    fn mul(self, rhs: Self) -> SymmetricSymbol {
        SymmetricSymbol::mul(self, rhs)
    }
}

impl Neg for &SymmetricSymbol {
    type Output = SymmetricSymbol;
    fn neg(self) -> SymmetricSymbol {
        self.scale(-1.0)
    }
}
