//! Thin wrappers over `rustfft` with a per-thread planner cache.

use std::cell::RefCell;
use std::sync::OnceLock;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Default cap on root-of-unity grid sizes used by the adaptive routines.
pub const DEFAULT_MAX_GRID: usize = 1 << 22;

/// Largest grid size allowed for adaptive doubling; `SQT_MAX_GRID` overrides the default.
pub fn max_grid() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("SQT_MAX_GRID")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n >= 2)
            .unwrap_or(DEFAULT_MAX_GRID)
    })
}

/// In-place unnormalized forward transform, `X_j = sum_k x_k exp(-2 pi i jk / n)`.
pub(crate) fn forward(buf: &mut [Complex64]) {
    if buf.len() <= 1 {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// In-place unnormalized inverse transform.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    if buf.len() <= 1 {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
}

/// Smallest power of two that is `>= n` (and at least 1).
pub(crate) fn pow2_at_least(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

const DIRECT_LIMIT: usize = 32;

/// Full linear convolutions of one real kernel with several real columns.
///
/// Each output has length `kernel.len() + col.len() - 1`. Columns are packed two
/// per complex transform.
pub(crate) fn convolve_many(kernel: &[f64], cols: &[&[f64]]) -> Vec<Vec<f64>> {
    if kernel.is_empty() {
        return cols.iter().map(|_| Vec::new()).collect();
    }
    let max_len = cols.iter().map(|c| c.len()).max().unwrap_or(0);
    if max_len == 0 {
        return cols.iter().map(|_| Vec::new()).collect();
    }
    if kernel.len().min(max_len) <= DIRECT_LIMIT {
        return cols.iter().map(|c| convolve_direct(kernel, c)).collect();
    }
    let n = pow2_at_least(kernel.len() + max_len - 1);
    let mut kf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    for (dst, &k) in kf.iter_mut().zip(kernel) {
        dst.re = k;
    }
    forward(&mut kf);
    let scale = 1.0 / n as f64;
    let mut out = Vec::with_capacity(cols.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for pair in cols.chunks(2) {
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (dst, &x) in buf.iter_mut().zip(pair[0]) {
            dst.re = x;
        }
        if let Some(second) = pair.get(1) {
            for (dst, &y) in buf.iter_mut().zip(*second) {
                dst.im = y;
            }
        }
        forward(&mut buf);
        for (z, k) in buf.iter_mut().zip(&kf) {
            *z *= k;
        }
        inverse(&mut buf);
        let len0 = if pair[0].is_empty() { 0 } else { kernel.len() + pair[0].len() - 1 };
        out.push(buf[..len0].iter().map(|z| z.re * scale).collect());
        if let Some(second) = pair.get(1) {
            let len1 = if second.is_empty() { 0 } else { kernel.len() + second.len() - 1 };
            out.push(buf[..len1].iter().map(|z| z.im * scale).collect());
        }
    }
    out
}

fn convolve_direct(kernel: &[f64], col: &[f64]) -> Vec<f64> {
    if col.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; kernel.len() + col.len() - 1];
    for (i, &k) in kernel.iter().enumerate() {
        if k == 0.0 {
            continue;
        }
        for (j, &x) in col.iter().enumerate() {
            out[i + j] += k * x;
        }
    }
    out
}
