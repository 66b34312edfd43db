//! Small numerical kernels shared by the modules: Gauss–Legendre rules,
//! adaptive quadrature, tridiagonal solves, compensated arithmetic, and a few
//! statistics helpers.

use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, fabs, log, log1p, pow, sqrt};

use crate::{Error, Result};

/// Three-point Gauss–Legendre nodes on `[0, 1]`.
pub const GL3_NODES: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
/// Matching weights (sum 1).
pub const GL3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Five-point Gauss–Legendre nodes on `[0, 1]`.
pub const GL5_NODES: [f64; 5] = [
    0.046_910_077_030_668_0,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_6,
    0.953_089_922_969_332,
];
pub const GL5_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_54,
    0.239_314_335_249_683_23,
    0.284_444_444_444_444_44,
    0.239_314_335_249_683_23,
    0.118_463_442_528_094_54,
];

/// Five-point Gauss–Legendre on `[a, b]`.
pub fn gl5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let h = b - a;
    let mut s = 0.0;
    for k in 0..5 {
        s += GL5_WEIGHTS[k] * f(a + GL5_NODES[k] * h);
    }
    s * h
}

/// Composite five-point Gauss–Legendre over `cells` equal cells.
pub fn composite_gl5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let mut acc = NeumaierSum::default();
    for i in 0..cells {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == cells { b } else { lo + h };
        acc.add(gl5(f, lo, hi));
    }
    acc.value()
}

/// Composite Gauss–Legendre with cell doubling until two successive
/// estimates differ by less than `rel_tol` relative (absolute when the
/// integral is tiny).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let mut cells = 8usize;
    let mut prev = composite_gl5(f, a, b, cells);
    for _ in 0..16 {
        cells *= 2;
        let cur = composite_gl5(f, a, b, cells);
        if fabs(cur - prev) <= rel_tol * fabs(cur).max(1e-300) || fabs(cur - prev) < 1e-300 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNonConvergence)
}

/// Error-free sum: returns `(s, e)` with `s + e == a + b` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fabs(self.sum) >= fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// LDLᵀ solve of a symmetric tridiagonal system with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples `i` and `i+1`). Returns `None` if a
/// pivot is not strictly positive.
pub fn solve_spd_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    debug_assert!(n == 0 || off.len() + 1 >= n);
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n];
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut di = diag[i];
        let mut yi = rhs[i];
        if i > 0 {
            l[i] = off[i - 1] / d[i - 1];
            di -= l[i] * off[i - 1];
            yi -= l[i] * y[i - 1];
        }
        if !(di > 0.0) || !di.is_finite() {
            return None;
        }
        d[i] = di;
        y[i] = yi;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut xi = y[i] / d[i];
        if i + 1 < n {
            xi -= l[i + 1] * x[i + 1];
        }
        x[i] = xi;
    }
    Some(x)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * sqrt(p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)) / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit { slope, intercept: my - slope * mx, r_squared })
}

/// Linear-interpolation quantile (type 7) of unsorted data.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = data.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    quantile_sorted(&v, q)
}

pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(v.len() - 1);
    let t = pos - lo as f64;
    v[lo] + t * (v[hi] - v[lo])
}

pub fn median(data: &[f64]) -> f64 {
    quantile(data, 0.5)
}

/// `log cosh x` without overflow.
pub fn log_cosh(x: f64) -> f64 {
    let a = fabs(x);
    a + log1p(exp(-2.0 * a)) - core::f64::consts::LN_2
}

/// Hurwitz zeta `Σ_{j ≥ n} j^{-s}` for `s > 1`, `n ≥ 1`, by Euler–Maclaurin
/// after sixteen explicit terms.
pub fn hurwitz_zeta(s: f64, n: u64) -> f64 {
    debug_assert!(s > 1.0 && n >= 1);
    const DIRECT: u64 = 16;
    let mut head = NeumaierSum::default();
    for j in 0..DIRECT {
        head.add(pow((n + j) as f64, -s));
    }
    let big_n = (n + DIRECT) as f64;
    let p = pow(big_n, -s);
    let mut tail = big_n * p / (s - 1.0) + 0.5 * p;
    // Bernoulli corrections B2..B8.
    let coef = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1_209_600.0];
    let mut rising = s;
    let mut power = p / big_n;
    for (k, c) in coef.iter().enumerate() {
        tail += c * rising * power;
        let m = (2 * k + 1) as f64;
        rising *= (s + m) * (s + m + 1.0);
        power /= big_n * big_n;
    }
    head.add(tail);
    head.value()
}

/// Riemann zeta for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1)
}

/// Natural log, re-exported for callers that avoid `std`.
#[inline]
pub fn ln(x: f64) -> f64 {
    log(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_rules_exact_on_polynomials() {
        let f = |x: f64| x * x * x * x * x;
        let v: f64 = (0..3).map(|k| GL3_WEIGHTS[k] * f(GL3_NODES[k])).sum();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        let g = |x: f64| x.powi(9);
        assert!((gl5(&g, 0.0, 1.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn adaptive_quadrature_gaussian() {
        let v = integrate_adaptive(&|x: f64| libm::exp(-x * x), -8.0, 8.0, 1e-12).unwrap();
        assert!((v - libm::sqrt(core::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let diag = [4.0, 5.0, 6.0, 7.0];
        let off = [1.0, -2.0, 0.5];
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = solve_spd_tridiagonal(&diag, &off, &rhs).unwrap();
        for i in 0..4 {
            let mut r = diag[i] * x[i];
            if i > 0 {
                r += off[i - 1] * x[i - 1];
            }
            if i < 3 {
                r += off[i] * x[i + 1];
            }
            assert!((r - rhs[i]).abs() < 1e-13);
        }
        assert!(solve_spd_tridiagonal(&[1.0, 1.0], &[2.0], &[0.0, 0.0]).is_none());
    }

    #[test]
    fn zeta_values() {
        // ζ(2) = π²/6, ζ(3) = Apéry's constant, ζ(4) = π⁴/90.
        let pi = core::f64::consts::PI;
        assert!((zeta(2.0) - pi * pi / 6.0).abs() < 1e-14);
        assert!((zeta(3.0) - 1.202_056_903_159_594_2).abs() < 1e-14);
        assert!((zeta(4.0) - pi.powi(4) / 90.0).abs() < 1e-14);
        let direct: f64 = (1..=5u64).map(|j| (j as f64).powf(-3.0)).sum();
        assert!((hurwitz_zeta(3.0, 6) - (zeta(3.0) - direct)).abs() < 1e-15);
    }

    #[test]
    fn wilson_contains_point_estimate() {
        let (lo, hi) = wilson_interval(30, 100, 1.96);
        assert!(lo < 0.3 && 0.3 < hi);
        assert_eq!(wilson_interval(0, 50, 1.96).0, 0.0);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_cosh_large_arguments() {
        assert!((log_cosh(0.5) - libm::log(libm::cosh(0.5))).abs() < 1e-15);
        assert!((log_cosh(1000.0) - (1000.0 - core::f64::consts::LN_2)).abs() < 1e-9);
    }
}
