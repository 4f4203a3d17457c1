//! Self-checks of the library against dense and direct oracles.
//!
//! Every suite is deterministic for a given seed.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    apply_a_alpha, basis_to_power, binomial, eta_vector, h_vector, hankel_norm_bound, k_vector, power_to_basis,
};
use crate::error::{Error, Result};
use crate::finite::{
    finite_basis, finite_closure_residual, finite_diag_check, finite_generator, finite_power_expand,
    finite_transformed, tau_eigenvalues,
};
use crate::sqt::{LowRankCorrection, Mode, SqtMatrix, Tolerances};
use crate::symbol::{GridValues, SymmetricSymbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Basis,
    Algebra,
    Sqt,
    Finite,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Basis => "basis",
            Suite::Algebra => "algebra",
            Suite::Sqt => "sqt",
            Suite::Finite => "finite",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "basis" => Ok(Suite::Basis),
            "algebra" => Ok(Suite::Algebra),
            "sqt" => Ok(Suite::Sqt),
            "finite" => Ok(Suite::Finite),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidArgument(format!("unknown suite '{s}'"))),
        }
    }
}

/// Outcome of one property: the worst observed error against its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: &'static str,
    pub worst: f64,
    pub tol: f64,
    pub passed: bool,
    pub note: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: worst {:.3e} (tol {:.1e}){}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.worst,
            self.tol,
            if self.note.is_empty() { String::new() } else { format!(" {}", self.note) }
        )
    }
}

/// Runs a suite; `All` runs the four suites in order.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<Check> {
    match suite {
        Suite::Basis => basis_suite(),
        Suite::Algebra => algebra_suite(seed),
        Suite::Sqt => sqt_suite(seed),
        Suite::Finite => finite_suite(),
        Suite::All => [Suite::Basis, Suite::Algebra, Suite::Sqt, Suite::Finite]
            .iter()
            .flat_map(|s| run_suite(*s, seed))
            .collect(),
    }
}

/// Tracks the worst error of one property; an `Err` from the library fails the check.
struct Probe {
    suite: Suite,
    name: &'static str,
    tol: f64,
    worst: f64,
    failure: Option<String>,
}

impl Probe {
    fn new(suite: Suite, name: &'static str, tol: f64) -> Self {
        Self { suite, name, tol, worst: 0.0, failure: None }
    }

    fn observe(&mut self, err: f64) {
        if err.is_nan() {
            self.failure.get_or_insert_with(|| "NaN error".into());
        }
        self.worst = self.worst.max(err);
    }

    fn require<T>(&mut self, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.failure.get_or_insert_with(|| e.to_string());
                None
            }
        }
    }

    fn fail(&mut self, msg: String) {
        self.failure.get_or_insert(msg);
    }

    fn finish(self) -> Check {
        let passed = self.failure.is_none() && self.worst <= self.tol;
        Check {
            suite: self.suite,
            name: self.name,
            worst: self.worst,
            tol: self.tol,
            passed,
            note: self.failure.unwrap_or_default(),
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn dense_norm_inf(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn window(m: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    m.view((0, 0), (n, n)).into_owned()
}

/// Two-sided convolution of symmetric symbols, summed term by term.
pub fn convolution_oracle(a: &SymmetricSymbol, b: &SymmetricSymbol) -> SymmetricSymbol {
    let (fa, fb) = (a.full_laurent(), b.full_laurent());
    let mut out = vec![0.0; fa.len() + fb.len() - 1];
    for (i, x) in fa.iter().enumerate() {
        for (j, y) in fb.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    let d = a.degree() + b.degree();
    SymmetricSymbol::new(out[d..].to_vec())
}

fn random_symbol(rng: &mut ChaCha8Rng, degree: usize) -> SymmetricSymbol {
    SymmetricSymbol::new((0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn random_matrix(rng: &mut ChaCha8Rng, mode: Mode, alpha: f64, degree: usize, rank: usize, support: usize) -> SqtMatrix {
    let a: Vec<f64> = (0..=degree).map(|i| rng.gen_range(-1.0..1.0) / (1.0 + i as f64)).collect();
    let k = if rank == 0 {
        LowRankCorrection::zero()
    } else {
        let u = DMatrix::from_fn(support, rank, |_, _| rng.gen_range(-1.0..1.0));
        let v = DMatrix::from_fn(support, rank, |_, _| rng.gen_range(-1.0..1.0));
        LowRankCorrection::new(u, v)
    };
    SqtMatrix::new(mode, alpha, SymmetricSymbol::new(a), k)
}

/// Diagonally dominant symbol and a small correction: well conditioned.
fn random_invertible(rng: &mut ChaCha8Rng, mode: Mode, alpha: f64, degree: usize, rank: usize) -> SqtMatrix {
    let mut a: Vec<f64> = (0..=degree).map(|i| rng.gen_range(-0.5..0.5) / (1.0 + i as f64)).collect();
    let w: f64 = a[1..].iter().map(|x| 2.0 * x.abs()).sum();
    a[0] = w + 1.0 + rng.gen_range(0.0..1.0) + alpha.abs() * a.get(1).map_or(0.0, |x| x.abs());
    let k = if rank == 0 {
        LowRankCorrection::zero()
    } else {
        let u = DMatrix::from_fn(6, rank, |_, _| rng.gen_range(-0.2..0.2));
        let v = DMatrix::from_fn(6, rank, |_, _| rng.gen_range(-0.2..0.2));
        LowRankCorrection::new(u, v)
    };
    SqtMatrix::new(mode, alpha, SymmetricSymbol::new(a), k)
}

/// Dense truncation of `P_{n,alpha}`, with `P_0 = I`.
fn dense_basis(n: usize, alpha: f64, size: usize) -> DMatrix<f64> {
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    SqtMatrix::from_symbol(alpha, SymmetricSymbol::new(c)).to_dense(size)
}

/// Grid of `alpha` values for the basis identities on dense truncations.
pub const DENSE_ALPHAS: [f64; 6] = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.3];
/// Grid of `alpha` values for the vector identities.
pub const VECTOR_ALPHAS: [f64; 8] = [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -1.3, 1.3];

/// `A_alpha^n` against `sum_i binom(n, i) P_{n-2i} + phi_n I` on `96 x 96` truncations,
/// compared on the leading `64 x 64` block, for `n <= 12`.
pub fn check_power_expansion() -> Check {
    let mut p = Probe::new(Suite::Basis, "power-expansion-dense", 1e-9);
    let (big, small) = (96, 64);
    for &alpha in &DENSE_ALPHAS {
        let a = dense_basis(1, alpha, big);
        let mut power = DMatrix::identity(big, big);
        for n in 1..=12 {
            power = &power * &a;
            let Some((coeffs, phi)) = p.require(power_to_basis(n)) else { continue };
            let mut sum = DMatrix::identity(big, big) * phi as f64;
            for (i, b) in coeffs.iter().enumerate() {
                sum += dense_basis(n - 2 * i, alpha, big) * (*b as f64);
            }
            let want = window(&power, small);
            p.observe(dense_norm_inf(&(window(&sum, small) - &want)) / dense_norm_inf(&want));
        }
    }
    p.finish()
}

fn padded(v: &[f64], len: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(len, 0.0);
    out
}

/// `A_alpha h_n = h_{n-1} + h_{n+1}` with `h_0 = e_1`, `n <= 30`; errors are taken
/// relative to the largest entry once entries exceed one.
pub fn check_shift_identity() -> Check {
    let mut p = Probe::new(Suite::Basis, "shift-identity", 1e-13);
    for &alpha in &VECTOR_ALPHAS {
        for n in 1..=30 {
            let lhs = padded(&apply_a_alpha(&h_vector(n, alpha).entries, alpha), n + 2);
            let (lo, hi) = (padded(&h_vector(n - 1, alpha).entries, n + 2), padded(&h_vector(n + 1, alpha).entries, n + 2));
            let err = lhs.iter().zip(lo.iter().zip(&hi)).map(|(l, (a, b))| (l - a - b).abs()).fold(0.0, f64::max);
            let scale = lo.iter().chain(&hi).map(|x| x.abs()).fold(1.0, f64::max);
            p.observe(err / scale);
        }
    }
    p.finish()
}

/// First column of the compact part of `A_alpha^n` against `sum_i binom(n, i) h_{n-2i}`.
pub fn check_compact_expansion() -> Check {
    let mut p = Probe::new(Suite::Basis, "compact-part-expansion", 1e-10);
    for &alpha in &VECTOR_ALPHAS {
        for n in 1..=30 {
            let Some(k) = p.require(k_vector(n, alpha)) else { continue };
            let mut want = vec![0.0; n];
            for i in 0..=(n - 1) / 2 {
                let Some(b) = p.require(binomial(n, i)) else { continue };
                for (w, h) in want.iter_mut().zip(&h_vector(n - 2 * i, alpha).entries) {
                    *w += b as f64 * h;
                }
            }
            let scale = want.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
            let k = padded(&k, n);
            let err = k.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            p.observe(err / scale);
        }
    }
    p.finish()
}

fn basis_suite() -> Vec<Check> {
    let mut out = vec![check_shift_identity(), check_compact_expansion(), check_power_expansion()];

    let mut p = Probe::new(Suite::Basis, "eta-explicit-sum", 1e-13);
    let mut rng = rng_for(0, 1);
    for &alpha in &VECTOR_ALPHAS {
        for _ in 0..10 {
            let d = rng.gen_range(1..=20);
            let a = random_symbol(&mut rng, d);
            let eta = eta_vector(&a, alpha).first_column;
            let mut want = vec![0.0; d];
            for n in 1..=d {
                for (w, h) in want.iter_mut().zip(&h_vector(n, alpha).entries) {
                    *w += a.coeff(n) * h;
                }
            }
            let scale = want.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let err = eta.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            p.observe(err / scale);
        }
    }
    out.push(p.finish());

    let mut p = Probe::new(Suite::Basis, "hankel-norm-formula", 1e-13);
    for i in 0..=30 {
        let alpha = -1.5 + 0.1 * i as f64;
        for n in 1..=40 {
            let direct: f64 = h_vector(n, alpha).entries.iter().map(|x| x.abs()).sum();
            let formula = hankel_norm_bound(n, alpha);
            p.observe((direct - formula).abs() / direct.max(f64::MIN_POSITIVE));
        }
    }
    out.push(p.finish());

    let mut p = Probe::new(Suite::Basis, "change-of-basis-round-trip", 0.0);
    for n in 1..=20 {
        let Some((coeffs, phi)) = p.require(power_to_basis(n)) else { continue };
        let mut total = vec![0i64; n + 1];
        total[0] += phi as i64;
        for (i, b) in coeffs.iter().enumerate() {
            let Some(c) = p.require(basis_to_power(n - 2 * i)) else { continue };
            for (j, x) in c.iter().enumerate() {
                total[j] += *b as i64 * x;
            }
        }
        let mut want = vec![0i64; n + 1];
        want[n] = 1;
        if total != want {
            p.fail(format!("n = {n}: {total:?}"));
        }
    }
    out.push(p.finish());
    out
}

/// Symbol inversion on `(3, 1)` and `(0, 1)`: condition `5`, `c_0 = 5^{-1/2}`, and the
/// ill-conditioned branch for a symbol vanishing on the circle.
pub fn check_symbol_inverse_examples() -> Check {
    let mut p = Probe::new(Suite::Algebra, "inverse-examples", 1e-10);
    let a = SymmetricSymbol::new(vec![3.0, 1.0]);
    if let Some((c, cond)) = p.require(a.inverse(1e-14)) {
        p.observe((cond - 5.0).abs());
        p.observe((c.coeff(0) - 1.0 / 5f64.sqrt()).abs() * 1e2);
        let r = a.mul(&c).sub(&SymmetricSymbol::one()).max_abs();
        if r > 1e-14 {
            p.fail(format!("residual {r:e} above 1e-14"));
        }
    }
    match SymmetricSymbol::new(vec![0.0, 1.0]).inverse(1e-14) {
        Err(e) if e.is_ill_conditioned() => {}
        other => p.fail(format!("(0, 1) gave {other:?}")),
    }
    p.finish()
}

/// Zero-correction products in algebra mode stay in the algebra, and their symbols
/// match the convolution oracle: 100 random pairs of degree at most 16.
pub fn check_algebra_closure(seed: u64) -> Check {
    let mut p = Probe::new(Suite::Algebra, "closure", 1e-12);
    let mut rng = rng_for(seed, 2);
    let tol = Tolerances { compress: 1e-13, ..Tolerances::default() };
    for _ in 0..100 {
        let alpha = DENSE_ALPHAS[rng.gen_range(0..DENSE_ALPHAS.len())];
        let (da, db) = (rng.gen_range(0..=16), rng.gen_range(0..=16));
        let (a, b) = (random_symbol(&mut rng, da), random_symbol(&mut rng, db));
        let (x, y) = (SqtMatrix::from_symbol(alpha, a.clone()), SqtMatrix::from_symbol(alpha, b.clone()));
        let Some((prod, _)) = p.require(x.mul_with(&y, &tol)) else { continue };
        if !prod.correction().is_zero() {
            p.fail(format!("rank {} correction for alpha = {alpha}", prod.correction().rank()));
        }
        let want = convolution_oracle(&a, &b);
        p.observe(prod.symbol().sub(&want).wiener_norm() / want.wiener_norm().max(f64::MIN_POSITIVE));
    }
    p.finish()
}

fn algebra_suite(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = rng_for(seed, 3);
    let rel = |x: &SymmetricSymbol, y: &SymmetricSymbol| x.sub(y).wiener_norm() / y.wiener_norm().max(f64::MIN_POSITIVE);

    let mut add = Probe::new(Suite::Algebra, "sum-laws", 0.0);
    let mut mul = Probe::new(Suite::Algebra, "product-laws", 1e-12);
    for _ in 0..50 {
        let [a, b, c] = [0, 1, 2].map(|_| {
            let d = rng.gen_range(0..=32);
            random_symbol(&mut rng, d).trimmed(1e-15)
        });
        add.observe(a.add(&b).sub(&b.add(&a)).max_abs());
        add.observe(a.add(&b).add(&c).sub(&a.add(&b.add(&c))).max_abs());
        mul.observe(rel(&a.mul(&b), &b.mul(&a)));
        mul.observe(rel(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c))));
        mul.observe(rel(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c))));
    }
    out.push(add.finish());
    out.push(mul.finish());

    let mut p = Probe::new(Suite::Algebra, "product-vs-convolution", 1e-13);
    for _ in 0..40 {
        let (da, db) = (rng.gen_range(0..=64), rng.gen_range(0..=64));
        let (a, b) = (random_symbol(&mut rng, da), random_symbol(&mut rng, db));
        let want = convolution_oracle(&a, &b);
        p.observe(rel(&a.mul(&b), &want));
        if da > 0 && db > 0 {
            p.observe(rel(&a.mul_fft(&b), &want));
        }
    }
    out.push(p.finish());

    let mut p = Probe::new(Suite::Algebra, "inverse-stop-test", 1e-14);
    for _ in 0..30 {
        let d = rng.gen_range(0..=12);
        let mut a = random_symbol(&mut rng, d);
        let w = a.wiener_norm() - a.coeff(0).abs();
        let mut c = a.coeffs().to_vec();
        c[0] = w + 0.5 + rng.gen_range(0.0..2.0);
        a = SymmetricSymbol::new(c);
        if let Some((inv, _)) = p.require(a.inverse(1e-14)) {
            p.observe(a.mul(&inv).sub(&SymmetricSymbol::one()).max_abs());
        }
    }
    out.push(p.finish());

    let mut p = Probe::new(Suite::Algebra, "grid-round-trip", 1e-13);
    for _ in 0..30 {
        let d = rng.gen_range(0..=40);
        let a = random_symbol(&mut rng, d);
        let n = (2 * d + 1).next_power_of_two().max(2) * if rng.gen_bool(0.5) { 1 } else { 2 };
        let values = p.require(a.eval_grid(n)).map(|g| g.values().to_vec());
        let back = values.and_then(|v| p.require(GridValues::from_values(v))).and_then(|g| p.require(g.interpolate()));
        if let Some(back) = back {
            p.observe(rel(&back, &a));
        }
    }
    out.push(p.finish());

    out.push(check_symbol_inverse_examples());
    out.push(check_algebra_closure(seed));
    out
}

/// Products and sums against dense products of truncations, on the window unaffected
/// by truncation; `N = 96`, window `N - (d_a + d_b)`.
pub fn check_oracle_coherence(seed: u64) -> Check {
    let mut p = Probe::new(Suite::Sqt, "oracle-coherence", 1e-10);
    let mut rng = rng_for(seed, 4);
    let n = 96;
    for &(mode, alpha) in &[(Mode::Algebra, 0.0), (Mode::Algebra, 0.6), (Mode::Algebra, -1.0), (Mode::Algebra, 1.3), (Mode::Toeplitz, 0.0)] {
        for _ in 0..6 {
            let (da, db) = (rng.gen_range(0..12), rng.gen_range(0..12));
            let (ka, kb) = (rng.gen_range(0..4), rng.gen_range(0..4));
            let a = random_matrix(&mut rng, mode, alpha, da, ka, 8);
            let b = random_matrix(&mut rng, mode, alpha, db, kb, 8);
            let pad = da + db;
            let (xa, xb) = (a.to_dense(n), b.to_dense(n));
            let scale = dense_norm_inf(&xa).max(dense_norm_inf(&xb)).max(1.0);
            if let Some(prod) = p.require(a.mul(&b)) {
                let want = window(&(&xa * &xb), n - pad);
                p.observe(dense_norm_inf(&(prod.to_dense(n - pad) - &want)) / dense_norm_inf(&want).max(scale));
            }
            if let Some(sum) = p.require(a.add(&b)) {
                p.observe(dense_norm_inf(&(sum.to_dense(n) - (&xa + &xb))) / scale);
            }
            if let Some(diff) = p.require(a.sub(&b)) {
                p.observe(dense_norm_inf(&(diff.to_dense(n) - (&xa - &xb))) / scale);
            }
            let s = rng.gen_range(-2.0..2.0);
            p.observe(dense_norm_inf(&(a.scaled(s).to_dense(n) - &xa * s)) / scale);
        }
    }
    p.finish()
}

/// Pre-compression factor widths: `k_A + k_B` in algebra mode and
/// `k_A + k_B + min(d_a, d_b)` in Toeplitz mode.
pub fn check_rank_bounds(seed: u64) -> Check {
    let mut p = Probe::new(Suite::Sqt, "rank-bounds", 0.0);
    let mut rng = rng_for(seed, 5);
    let t = Tolerances::default();
    for _ in 0..40 {
        let (ka, kb) = (rng.gen_range(0..5), rng.gen_range(0..5));
        let (da, db) = (rng.gen_range(0..20), rng.gen_range(0..20));
        let alpha = rng.gen_range(-1.5..1.5);
        let a = random_matrix(&mut rng, Mode::Algebra, alpha, da, ka, 7);
        let b = random_matrix(&mut rng, Mode::Algebra, alpha, db, kb, 7);
        if let Some((_, s)) = p.require(a.mul_with(&b, &t)) {
            if s.factor_width != ka + kb || s.hankel_width != 0 {
                p.fail(format!("algebra width {} for k = {ka} + {kb}", s.factor_width));
            }
        }
        let a = random_matrix(&mut rng, Mode::Toeplitz, 0.0, da, ka, 7);
        let b = random_matrix(&mut rng, Mode::Toeplitz, 0.0, db, kb, 7);
        if let Some((_, s)) = p.require(a.mul_with(&b, &t)) {
            if s.factor_width != ka + kb + da.min(db) {
                p.fail(format!("toeplitz width {} for k = {ka} + {kb}, d = {da}, {db}", s.factor_width));
            }
        }
    }
    p.finish()
}

/// Exact infinity norm against row sums of a dense truncation long enough to contain
/// every row that differs from the Toeplitz tail.
pub fn check_norm_formula(seed: u64) -> Check {
    let mut p = Probe::new(Suite::Sqt, "norm-formula", 1e-12);
    let mut rng = rng_for(seed, 6);
    for _ in 0..30 {
        let mode = if rng.gen_bool(0.5) { Mode::Algebra } else { Mode::Toeplitz };
        let alpha = if mode == Mode::Algebra { rng.gen_range(-1.5..1.5) } else { 0.0 };
        let (d, k, m) = (rng.gen_range(0..10), rng.gen_range(0..4), rng.gen_range(1..14));
        let a = random_matrix(&mut rng, mode, alpha, d, k, m);
        let n = 4 * (d + m) + 8;
        let dense = a.to_dense(n);
        let rows = n - d;
        let want = (0..rows).map(|i| dense.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
        p.observe((a.norm_inf() - want).abs() / want.max(1.0));
    }
    p.finish()
}

fn sqt_suite(seed: u64) -> Vec<Check> {
    let mut out = vec![check_oracle_coherence(seed), check_rank_bounds(seed), check_norm_formula(seed)];
    let mut rng = rng_for(seed, 7);

    let mut p = Probe::new(Suite::Sqt, "mode-equivalence", 1e-10);
    for _ in 0..8 {
        let (da, db) = (rng.gen_range(1..9), rng.gen_range(1..9));
        let alpha = rng.gen_range(-1.2..1.2);
        let a = random_matrix(&mut rng, Mode::Algebra, alpha, da, 2, 6);
        let b = random_matrix(&mut rng, Mode::Algebra, alpha, db, 1, 6);
        let via = p.require(a.convert(Mode::Toeplitz, 0.0).mul(&b.convert(Mode::Toeplitz, 0.0)));
        if let (Some(direct), Some(via)) = (p.require(a.mul(&b)), via) {
            let d = direct.to_dense(64);
            let back = via.convert(Mode::Algebra, alpha).to_dense(64);
            p.observe(dense_norm_inf(&(back - &d)) / dense_norm_inf(&d));
        }
    }
    out.push(p.finish());

    let mut p = Probe::new(Suite::Sqt, "inverse-residual", 1e-10);
    for &(mode, alpha) in &[(Mode::Algebra, 0.0), (Mode::Algebra, 1.0), (Mode::Algebra, -0.5), (Mode::Toeplitz, 0.0)] {
        for _ in 0..5 {
            let (d, k) = (rng.gen_range(0..8), rng.gen_range(0..4));
            let a = random_invertible(&mut rng, mode, alpha, d, k);
            if let Some(prod) = p.require(a.inverse(1e-15)).and_then(|inv| p.require(a.mul(&inv))) {
                p.observe(dense_norm_inf(&(prod.to_dense(48) - DMatrix::identity(48, 48))));
            }
        }
    }
    out.push(p.finish());

    let mut p = Probe::new(Suite::Sqt, "sqt1-round-trip", 0.0);
    for _ in 0..20 {
        let mode = if rng.gen_bool(0.5) { Mode::Algebra } else { Mode::Toeplitz };
        let (d, k, m) = (rng.gen_range(0..10), rng.gen_range(0..4), rng.gen_range(1..9));
        let alpha = rng.gen_range(-2.0..2.0);
        let a = random_matrix(&mut rng, mode, alpha, d, k, m);
        match SqtMatrix::from_sqt1(&a.to_sqt1()) {
            Ok(b) if b == a => {}
            Ok(_) => p.fail("record did not reproduce the matrix".into()),
            Err(e) => p.fail(e.to_string()),
        }
    }
    out.push(p.finish());
    out
}

/// DST-I diagonalizes `P_i^(0,0)` for `i <= 5`, `m = 64`, with eigenvalues `2 cos(i k pi / 65)`.
pub fn check_tau_diagonalization() -> Check {
    let mut p = Probe::new(Suite::Finite, "dst1-diagonalization", 1e-10);
    let m = 64;
    for i in 0..=5 {
        if let Some(off) = p.require(finite_diag_check(i, m, 0.0, 0.0)) {
            p.observe(off);
        }
        if let Some(d) = p.require(finite_transformed(i, m, 0.0, 0.0)) {
            for (k, ev) in tau_eigenvalues(i, m).iter().enumerate() {
                p.observe((d[(k, k)] - ev).abs());
            }
        }
    }
    p.finish()
}

/// Binomial assembly against dense powers of `A_{alpha,beta}`: `n <= 8`, `m <= 32`.
pub fn check_finite_powers() -> Check {
    let mut p = Probe::new(Suite::Finite, "power-expansion", 1e-11);
    let grid = [-1.0, 0.0, 1.0, 0.5];
    for m in [2usize, 3, 4, 7, 9, 16, 32] {
        for &alpha in &grid {
            for &beta in &grid {
                let Some(a) = p.require(finite_generator(m, alpha, beta)) else { continue };
                let mut power = DMatrix::identity(m, m);
                for n in 1..m.min(9) {
                    power = &power * &a;
                    if let Some(got) = p.require(finite_power_expand(n, m, alpha, beta)) {
                        p.observe(dense_norm_inf(&(got - &power)) / dense_norm_inf(&power).max(1.0));
                    }
                }
            }
        }
    }
    p.finish()
}

fn finite_suite() -> Vec<Check> {
    let mut out = vec![check_tau_diagonalization(), check_finite_powers()];

    let mut p = Probe::new(Suite::Finite, "persymmetry", 0.0);
    for m in [3usize, 8, 13] {
        let j = DMatrix::from_fn(m, m, |r, c| if r + c == m - 1 { 1.0 } else { 0.0 });
        for &(alpha, beta) in &[(0.4, -1.2), (1.0, 0.0), (-0.5, 2.0)] {
            for i in 0..m {
                let lhs = p.require(finite_basis(i, m, alpha, beta)).map(|b| &j * b * &j);
                if let (Some(lhs), Some(rhs)) = (lhs, p.require(finite_basis(i, m, beta, alpha))) {
                    p.observe((lhs - rhs).abs().max());
                }
            }
        }
    }
    out.push(p.finish());

    let mut p = Probe::new(Suite::Finite, "closure", 1e-10);
    let m = 12;
    for &(alpha, beta) in &[(0.0, 0.0), (0.5, -1.0), (1.3, 0.2), (-1.0, 1.0)] {
        for i in 0..m {
            for j in 0..(m - i) {
                if let Some(r) = p.require(finite_closure_residual(i, j, m, alpha, beta)) {
                    p.observe(r);
                }
            }
        }
    }
    out.push(p.finish());
    out
}
