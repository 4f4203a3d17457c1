//! Fixed-point solvers for `A X^2 + B X + C = X` and the Newton square-root iteration,
//! in matrix form (any representation) and in symbol-only form.

use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::sqt::{LowRankCorrection, Mode, SqtMatrix, Tolerances};
use crate::symbol::{tail_decayed, GridValues, SymmetricSymbol, DEFAULT_TRIM_TOL};

/// Default stop tolerance of both solvers.
pub const DEFAULT_TOL: f64 = 5e-15;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Conditioning threshold handed to symbol inversion inside the solvers.
pub const INVERSE_EPS: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QmeVariant {
    /// `X <- A X^2 + B X + C`.
    Natural,
    /// `X <- (I - B)^{-1} (A X^2 + C)`.
    Traditional,
    /// `X <- (I - A X - B)^{-1} C`.
    UBased,
}

impl QmeVariant {
    pub const ALL: [QmeVariant; 3] = [QmeVariant::Natural, QmeVariant::Traditional, QmeVariant::UBased];

    pub fn name(&self) -> &'static str {
        match self {
            QmeVariant::Natural => "natural",
            QmeVariant::Traditional => "traditional",
            QmeVariant::UBased => "u-based",
        }
    }
}

impl fmt::Display for QmeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for QmeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "natural" => Ok(QmeVariant::Natural),
            "traditional" => Ok(QmeVariant::Traditional),
            "u-based" | "ubased" | "u" => Ok(QmeVariant::UBased),
            _ => Err(Error::InvalidArgument(format!("unknown variant '{s}'"))),
        }
    }
}

/// Quadratic matrix equation `A X^2 + B X + C = X`.
#[derive(Clone, Debug)]
pub struct QmeProblem {
    pub a: SqtMatrix,
    pub b: SqtMatrix,
    pub c: SqtMatrix,
    pub variant: QmeVariant,
    pub tol: f64,
    pub max_iter: usize,
    pub tolerances: Tolerances,
    /// Record `|X_{k+1} - X_k|_inf` at every step.
    pub record_trace: bool,
}

impl QmeProblem {
    pub fn new(a: SqtMatrix, b: SqtMatrix, c: SqtMatrix, variant: QmeVariant) -> Self {
        Self {
            a,
            b,
            c,
            variant,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            tolerances: Tolerances::default(),
            record_trace: false,
        }
    }

    /// Deviation of `A + B + C` from a stochastic matrix: `|(A + B + C) 1 - 1|` over the
    /// rows touched by the corrections and the symbol. Advisory only.
    pub fn stochasticity_defect(&self) -> f64 {
        let s = self.a.symbol().add(self.b.symbol()).add(self.c.symbol());
        let at_one = s.coeff(0) + 2.0 * s.coeffs()[1..].iter().sum::<f64>();
        let mut defect = (at_one - 1.0).abs();
        let rows = [&self.a, &self.b, &self.c]
            .iter()
            .map(|m| m.symbol().degree() + m.correction().rows().max(m.correction().cols()))
            .max()
            .unwrap_or(0)
            + 1;
        let n = 3 * rows + s.degree() + 1;
        let ones = vec![1.0; n];
        let mut total = vec![0.0; rows];
        for m in [&self.a, &self.b, &self.c] {
            for (t, y) in total.iter_mut().zip(m.matvec(&ones)) {
                *t += y;
            }
        }
        for t in total {
            defect = defect.max((t - 1.0).abs());
        }
        defect
    }
}

/// Outcome of a solver run; fields mirror the columns of the experiment tables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Infinity norm of the defining residual.
    pub residual: f64,
    /// Number of stored symbol coefficients `d + 1`.
    pub symbol_size: usize,
    /// Support `(m, n)` of the correction.
    pub correction_support: (usize, usize),
    pub correction_rank: usize,
    pub elapsed: Duration,
    /// Per-iteration step norms, when requested.
    pub trace: Vec<f64>,
}

impl SolveReport {
    fn describe(x: &SqtMatrix, iterations: usize, residual: f64, elapsed: Duration, trace: Vec<f64>) -> Self {
        let k = x.correction();
        Self {
            iterations,
            residual,
            symbol_size: x.symbol().len(),
            correction_support: (k.rows(), k.cols()),
            correction_rank: k.rank(),
            elapsed,
            trace,
        }
    }
}

fn max_coeff(s: &SymmetricSymbol) -> f64 {
    s.max_abs()
}

/// Residual `|A G^2 + B G + C - G|_inf`.
pub fn qme_residual(a: &SqtMatrix, b: &SqtMatrix, c: &SqtMatrix, g: &SqtMatrix) -> Result<f64> {
    let t = Tolerances::default();
    let r = a.mul_with(g, &t)?.0.add_with(b, &t)?.mul_with(g, &t)?.0.add_with(c, &t)?.add_with(&g.scaled(-1.0), &t)?;
    Ok(r.norm_inf())
}

/// Fixed-point iteration from `X_0 = 0`, trimming and recompressing after every step.
///
/// Halts once both the largest coefficient of the step symbol and the largest entry
/// of the step correction fall below `tol`.
pub fn qme_solve(p: &QmeProblem) -> Result<(SqtMatrix, SolveReport)> {
    let start = Instant::now();
    let (a, b, c) = (&p.a, &p.b, &p.c);
    let t = &p.tolerances;
    for m in [b, c] {
        if m.mode() != a.mode() {
            return Err(Error::ModeMismatch);
        }
        if a.mode() == Mode::Algebra && m.alpha() != a.alpha() {
            return Err(Error::AlphaMismatch(a.alpha(), m.alpha()));
        }
    }
    let (mode, alpha) = (a.mode(), a.alpha());
    let ident = SqtMatrix::identity(mode, alpha);
    let fixed_inverse = match p.variant {
        QmeVariant::Traditional => Some(ident.add_with(&b.scaled(-1.0), t)?.inverse_with(INVERSE_EPS, t)?),
        _ => None,
    };
    let mut x = SqtMatrix::zero(mode, alpha);
    let mut trace = Vec::new();
    for k in 1..=p.max_iter {
        let next = match p.variant {
            QmeVariant::Natural => a.mul_with(&x, t)?.0.add_with(b, t)?.mul_with(&x, t)?.0.add_with(c, t)?,
            QmeVariant::Traditional => {
                let inner = a.mul_with(&x, t)?.0.mul_with(&x, t)?.0.add_with(c, t)?;
                fixed_inverse.as_ref().expect("set for this variant").mul_with(&inner, t)?.0
            }
            QmeVariant::UBased => {
                let m = ident.add_with(&a.mul_with(&x, t)?.0.add_with(b, t)?.scaled(-1.0), t)?;
                m.inverse_with(INVERSE_EPS, t)?.mul_with(c, t)?.0
            }
        };
        let next = next.trimmed(t.trim);
        let step = next.add_with(&x.scaled(-1.0), t)?;
        if p.record_trace {
            trace.push(step.norm_inf());
        }
        x = next;
        let eps_k = max_coeff(step.symbol());
        if eps_k < p.tol && step.correction_max_entry() < p.tol {
            let residual = qme_residual(a, b, c, &x)?;
            return Ok((x.clone(), SolveReport::describe(&x, k, residual, start.elapsed(), trace)));
        }
        if !eps_k.is_finite() {
            return Err(Error::DomainFault(format!("iteration {k}")));
        }
    }
    Err(Error::NoConvergence(format!("{} iterations of the {} iteration", p.max_iter, p.variant)))
}

/// Scalar recurrence run pointwise on a root-of-unity grid, doubled until the
/// interpolated solution has a negligible top quarter; returns the trimmed symbol.
///
/// The reported iteration count is the number of sweeps on the accepted grid.
pub fn qme_symbol_solve(
    a: &SymmetricSymbol,
    b: &SymmetricSymbol,
    c: &SymmetricSymbol,
    variant: QmeVariant,
    tol: f64,
) -> Result<(SymmetricSymbol, SolveReport)> {
    let start = Instant::now();
    let d = a.degree().max(b.degree()).max(c.degree());
    let mut n = crate::fft::pow2_at_least(2 * d + 1).max(4);
    while n <= crate::max_grid() {
        let (av, bv, cv) = (a.eval_grid(n)?, b.eval_grid(n)?, c.eval_grid(n)?);
        let (av, bv, cv) = (av.values(), bv.values(), cv.values());
        let mut x = vec![0.0; n];
        let mut iterations = 0;
        loop {
            iterations += 1;
            if iterations > DEFAULT_MAX_ITER {
                return Err(Error::NoConvergence(format!("pointwise {variant} iteration")));
            }
            let mut change = 0.0f64;
            for j in 0..n {
                let xj = x[j];
                let new = match variant {
                    QmeVariant::Natural => av[j] * xj * xj + bv[j] * xj + cv[j],
                    QmeVariant::Traditional => (av[j] * xj * xj + cv[j]) / (1.0 - bv[j]),
                    QmeVariant::UBased => cv[j] / (1.0 - av[j] * xj - bv[j]),
                };
                if !new.is_finite() {
                    return Err(Error::DomainFault(format!("pointwise {variant} iteration")));
                }
                change = change.max((new - xj).abs());
                x[j] = new;
            }
            if change < tol {
                break;
            }
        }
        let g = GridValues::from_values(x)?.interpolate()?;
        if tail_decayed(&g, DEFAULT_TRIM_TOL) {
            let g = g.trimmed(DEFAULT_TRIM_TOL);
            let report = SolveReport {
                iterations,
                residual: symbol_qme_residual(a, b, c, &g),
                symbol_size: g.len(),
                elapsed: start.elapsed(),
                ..SolveReport::default()
            };
            return Ok((g, report));
        }
        n *= 2;
    }
    Err(Error::NoConvergence(format!("grid cap {} reached", crate::max_grid())))
}

/// `|a g^2 + b g + c - g|_W`, the matrix residual for `G = P_alpha(g)` in the algebra.
pub fn symbol_qme_residual(a: &SymmetricSymbol, b: &SymmetricSymbol, c: &SymmetricSymbol, g: &SymmetricSymbol) -> f64 {
    a.mul(g).add(b).mul(g).add(c).sub(g).wiener_norm()
}

/// Newton iteration in incremental form: `X_0 = A`, `E_0 = (I - A) / 2`,
/// `X_{k+1} = X_k + E_k`, `E_{k+1} = -E_k X_{k+1}^{-1} E_k / 2`.
///
/// Halts when the largest coefficient of the increment symbol and the norm of its
/// correction are both at most `tol |X|_inf`; the final increment is added to `X`.
pub fn sqrt_solve(a: &SqtMatrix, tol: f64) -> Result<(SqtMatrix, SolveReport)> {
    sqrt_solve_with(a, tol, DEFAULT_MAX_ITER, &Tolerances::default())
}

pub fn sqrt_solve_with(a: &SqtMatrix, tol: f64, max_iter: usize, t: &Tolerances) -> Result<(SqtMatrix, SolveReport)> {
    let start = Instant::now();
    let ident = SqtMatrix::identity(a.mode(), a.alpha());
    let mut x = a.clone();
    let mut e = ident.add_with(&a.scaled(-1.0), t)?.scaled(0.5);
    let mut iterations = 0;
    loop {
        if iterations >= max_iter {
            return Err(Error::NoConvergence(format!("{max_iter} square-root steps")));
        }
        x = x.add_with(&e, t)?.trimmed(t.trim);
        iterations += 1;
        let xinv = x.inverse_with(INVERSE_EPS, t)?;
        e = e.mul_with(&xinv, t)?.0.mul_with(&e, t)?.0.scaled(-0.5).trimmed(t.trim);
        let size = max_coeff(e.symbol()).max(e.correction_norm_inf());
        if !size.is_finite() {
            return Err(Error::DomainFault(format!("square-root step {iterations}")));
        }
        if size <= tol * x.norm_inf() {
            x = x.add_with(&e, t)?.trimmed(t.trim);
            break;
        }
    }
    let sq = x.mul_with(&x, t)?.0;
    let residual = sq.add_with(&a.scaled(-1.0), t)?.norm_inf();
    let report = SolveReport::describe(&x, iterations, residual, start.elapsed(), Vec::new());
    Ok((x, report))
}

/// Square root of the symbol, valid for `A = P_alpha(a)` in the algebra.
pub fn sqrt_symbol_solve(a: &SymmetricSymbol) -> Result<(SymmetricSymbol, SolveReport)> {
    let start = Instant::now();
    let g = a.map_grid(|v| if v >= 0.0 { v.sqrt() } else { f64::NAN }, DEFAULT_TRIM_TOL)?;
    let residual = g.mul(&g).sub(a).wiener_norm();
    let report = SolveReport { residual, symbol_size: g.len(), elapsed: start.elapsed(), ..SolveReport::default() };
    Ok((g, report))
}

/// Coefficients `(a, b, c)` of the quasi-birth-death example.
pub fn example_qme_symbols() -> (SymmetricSymbol, SymmetricSymbol, SymmetricSymbol) {
    (
        SymmetricSymbol::new(vec![0.10, 0.10]),
        SymmetricSymbol::new(vec![0.23, 0.08]),
        SymmetricSymbol::new(vec![0.11, 0.10]),
    )
}

/// The example's `A, B, C` as `T(s) + s_1 e_1 e_1^T`, expressed in the requested form:
/// algebra mode at the given `alpha` or Toeplitz mode.
pub fn example_qme_matrices(mode: Mode, alpha: f64) -> (SqtMatrix, SqtMatrix, SqtMatrix) {
    let (a, b, c) = example_qme_symbols();
    let build = |s: SymmetricSymbol| {
        let corner = LowRankCorrection::unit(0, 0, s.coeff(1));
        SqtMatrix::new(Mode::Toeplitz, 0.0, s, corner).convert(mode, alpha)
    };
    (build(a), build(b), build(c))
}

/// `T(a)` with `a = (5 + delta, 4, 3, 2, 1)`.
pub fn example_sqrt_symbol(delta: f64) -> SymmetricSymbol {
    SymmetricSymbol::new(vec![5.0 + delta, 4.0, 3.0, 2.0, 1.0])
}

pub fn example_sqrt_matrix(delta: f64, mode: Mode, alpha: f64) -> SqtMatrix {
    SqtMatrix::toeplitz(example_sqrt_symbol(delta)).convert(mode, alpha)
}
