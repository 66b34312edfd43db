//! Negative Sobolev norms with the volume-normalized convention
//! `‖f‖ = sup{⨍_U f v : v ∈ H¹₀(U), ⨍_U |∇v|² ≤ 1} = (⨍_U |∇w|²)^{1/2}`
//! where `−Δw = f` in `U` and `w = 0` on `∂U`.

use alloc::vec;
use alloc::vec::Vec;
use libm::sqrt;
use serde::{Deserialize, Serialize};

use crate::numeric::solve_spd_tridiagonal;
use crate::{Error, Result};

/// Domain of a uniform nodal grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    /// `n` nodes on `[a, b]`, endpoints included.
    Interval { a: f64, b: f64 },
    /// `n × n` row-major nodes on `corner + [0, side]²`, boundary included.
    Square { corner: [f64; 2], side: f64 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Square { .. } => 2,
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Square { side, .. } => side * side,
        }
    }

    /// Nodes per side for a nodal vector of length `len`.
    fn side_nodes(&self, len: usize) -> Result<usize> {
        let n = match self {
            Domain::Interval { .. } => len,
            Domain::Square { .. } => {
                let n = sqrt(len as f64) as usize;
                if n * n == len {
                    n
                } else if (n + 1) * (n + 1) == len {
                    n + 1
                } else {
                    return Err(Error::InvalidParameter("square grid needs n² values".into()));
                }
            }
        };
        if n < 3 {
            return Err(Error::InvalidParameter("grid needs at least 3 nodes per side".into()));
        }
        if !(self.volume() > 0.0) {
            return Err(Error::InvalidParameter("domain must have positive size".into()));
        }
        Ok(n)
    }

    fn spacing(&self, n: usize) -> f64 {
        match *self {
            Domain::Interval { a, b } => (b - a) / (n - 1) as f64,
            Domain::Square { side, .. } => side / (n - 1) as f64,
        }
    }
}

/// `‖f‖_{H⁻¹(U)}` for nodal values `f` on a uniform grid: three-point
/// (`d = 1`, tridiagonal solve) or five-point (`d = 2`, conjugate gradients)
/// finite differences.
pub fn h_minus_one_norm(f: &[f64], domain: Domain) -> Result<f64> {
    let w = poisson_dirichlet(f, domain)?;
    dirichlet_mean(&w, domain).map(sqrt)
}

/// Nodal solution of `−Δ_h w = f` with `w = 0` on boundary nodes.
pub fn poisson_dirichlet(f: &[f64], domain: Domain) -> Result<Vec<f64>> {
    let n = domain.side_nodes(f.len())?;
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("grid function must be finite".into()));
    }
    let h = domain.spacing(n);
    match domain {
        Domain::Interval { .. } => {
            let m = n - 2;
            let rhs: Vec<f64> = f[1..n - 1].iter().map(|v| h * h * v).collect();
            let inner = solve_spd_tridiagonal(&vec![2.0; m], &vec![-1.0; m.saturating_sub(1)], &rhs)
                .ok_or(Error::LinearSolveNonConvergence(0))?;
            let mut w = vec![0.0; n];
            w[1..n - 1].copy_from_slice(&inner);
            Ok(w)
        }
        Domain::Square { .. } => {
            let mut b = vec![0.0; n * n];
            for i in 1..n - 1 {
                for j in 1..n - 1 {
                    b[i * n + j] = h * h * f[i * n + j];
                }
            }
            laplace_cg(n, &b)
        }
    }
}

/// `⨍_U |∇_h v|²` over grid edges.
pub fn dirichlet_mean(v: &[f64], domain: Domain) -> Result<f64> {
    let n = domain.side_nodes(v.len())?;
    let h = domain.spacing(n);
    let mut acc = 0.0;
    match domain {
        Domain::Interval { .. } => {
            for e in v.windows(2) {
                acc += (e[1] - e[0]) * (e[1] - e[0]);
            }
            acc /= h;
        }
        Domain::Square { .. } => {
            for i in 0..n {
                for j in 0..n {
                    let c = v[i * n + j];
                    if j + 1 < n {
                        let d = v[i * n + j + 1] - c;
                        acc += d * d;
                    }
                    if i + 1 < n {
                        let d = v[(i + 1) * n + j] - c;
                        acc += d * d;
                    }
                }
            }
        }
    }
    Ok(acc / domain.volume())
}

/// `⨍_U f v` by the nodal rule over interior nodes (`v ∈ H¹₀`).
pub fn pairing_mean(f: &[f64], v: &[f64], domain: Domain) -> Result<f64> {
    let n = domain.side_nodes(f.len())?;
    if v.len() != f.len() {
        return Err(Error::GridMismatch);
    }
    let h = domain.spacing(n);
    let mut acc = 0.0;
    match domain {
        Domain::Interval { .. } => {
            for i in 1..n - 1 {
                acc += f[i] * v[i];
            }
            acc *= h;
        }
        Domain::Square { .. } => {
            for i in 1..n - 1 {
                for j in 1..n - 1 {
                    acc += f[i * n + j] * v[i * n + j];
                }
            }
            acc *= h * h;
        }
    }
    Ok(acc / domain.volume())
}

/// Conjugate gradients for `(4I − neighbours) w = b` on the interior of an
/// `n × n` grid; `b` and the result are full nodal arrays.
fn laplace_cg(n: usize, b: &[f64]) -> Result<Vec<f64>> {
    let apply = |x: &[f64], out: &mut [f64]| {
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let k = i * n + j;
                out[k] = 4.0 * x[k] - x[k - 1] - x[k + 1] - x[k - n] - x[k + n];
            }
        }
    };
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut x = vec![0.0; n * n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n * n];
    let b_norm = dot(b, b);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let tol = 1e-26 * b_norm;
    let mut rr = b_norm;
    let max_iter = 20 * n + 200;
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for k in 0..n * n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        if rr_new <= tol {
            return Ok(x);
        }
        let beta = rr_new / rr;
        for k in 0..n * n {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
    }
    Err(Error::LinearSolveNonConvergence(max_iter))
}

/// `‖f‖_{H⁻¹(lo, hi)}` for a piecewise-constant `f` with value `values[k]`
/// between `breaks[k − 1]` and `breaks[k]`, discretized by `elements` linear
/// elements with exactly integrated load.
pub fn h_minus_one_norm_piecewise(lo: f64, hi: f64, breaks: &[f64], values: &[f64], elements: usize) -> Result<f64> {
    if values.len() != breaks.len() + 1 || !(hi > lo) || elements < 2 {
        return Err(Error::InvalidParameter("piecewise data does not match the interval".into()));
    }
    let h = (hi - lo) / elements as f64;
    let mut load = vec![0.0; elements + 1];
    let mut piece = 0usize;
    for e in 0..elements {
        let x0 = lo + e as f64 * h;
        let x1 = if e + 1 == elements { hi } else { x0 + h };
        let mut s0 = x0;
        loop {
            while piece < breaks.len() && breaks[piece] <= s0 {
                piece += 1;
            }
            let s1 = if piece < breaks.len() { breaks[piece].min(x1) } else { x1 };
            let v = values[piece];
            // ∫ (x − x0)/h and ∫ (x1 − x)/h over [s0, s1]
            let right = ((s1 - x0) * (s1 - x0) - (s0 - x0) * (s0 - x0)) / (2.0 * h);
            let left = (s1 - s0) - right;
            load[e] += v * left;
            load[e + 1] += v * right;
            if s1 >= x1 {
                break;
            }
            s0 = s1;
        }
    }
    let m = elements - 1;
    let rhs: Vec<f64> = load[1..elements].iter().map(|b| b * h).collect();
    let w = solve_spd_tridiagonal(&vec![2.0; m], &vec![-1.0; m.saturating_sub(1)], &rhs)
        .ok_or(Error::LinearSolveNonConvergence(0))?;
    let energy: f64 = w.iter().zip(&load[1..elements]).map(|(a, b)| a * b).sum();
    Ok(sqrt(energy.max(0.0) / (hi - lo)))
}

/// `‖f‖_{H⁻¹}` on `corner + [0, side]²` for `f` constant on each of the
/// `elements²` squares (value `f(i₁, i₂)` on square `(i₁, i₂)`), with the
/// five-point operator and lumped bilinear load.
pub fn h_minus_one_norm_square<F: Fn(usize, usize) -> f64>(side: f64, elements: usize, f: F) -> Result<f64> {
    if elements < 2 || !(side > 0.0) {
        return Err(Error::InvalidParameter("square needs side > 0 and ≥ 2 elements".into()));
    }
    let n = elements + 1;
    let h = side / elements as f64;
    let mut vals = vec![0.0; elements * elements];
    for i in 0..elements {
        for j in 0..elements {
            vals[i * elements + j] = f(i, j);
        }
    }
    let mut b = vec![0.0; n * n];
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let s = vals[(i - 1) * elements + j - 1]
                + vals[(i - 1) * elements + j]
                + vals[i * elements + j - 1]
                + vals[i * elements + j];
            b[i * n + j] = 0.25 * h * h * s;
        }
    }
    let w = laplace_cg(n, &b)?;
    let energy: f64 = w.iter().zip(&b).map(|(a, c)| a * c).sum();
    Ok(sqrt(energy.max(0.0) / (side * side)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn sin_grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| libm::sin(PI * i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn sine_eigenfunction() {
        let v = h_minus_one_norm(&sin_grid(4096), Domain::Interval { a: 0.0, b: 1.0 }).unwrap();
        assert!((v - 1.0 / (PI * core::f64::consts::SQRT_2)).abs() < 1e-6);
    }

    #[test]
    fn duality_saturates() {
        let dom = Domain::Interval { a: 0.0, b: 1.0 };
        let f = sin_grid(257);
        let w = poisson_dirichlet(&f, dom).unwrap();
        let norm = h_minus_one_norm(&f, dom).unwrap();
        let g = sqrt(dirichlet_mean(&w, dom).unwrap());
        let v: Vec<f64> = w.iter().map(|x| x / g).collect();
        assert!((pairing_mean(&f, &v, dom).unwrap() - norm).abs() < 1e-12);
    }

    #[test]
    fn square_product_mode() {
        // f = sin(πx)sin(πy) on the unit square: w = f/(2π²), ⨍|∇w|² = 1/(8π²).
        let n = 129;
        let mut f = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 / 128.0, j as f64 / 128.0);
                f[i * n + j] = libm::sin(PI * x) * libm::sin(PI * y);
            }
        }
        let v = h_minus_one_norm(&f, Domain::Square { corner: [0.0, 0.0], side: 1.0 }).unwrap();
        assert!((v - 1.0 / (PI * sqrt(8.0))).abs() < 1e-4);
    }

    #[test]
    fn piecewise_matches_primitive_variance() {
        // For piecewise-constant f, ‖f‖² = ⨍ (F − ⨍F)² with F' = f.
        let breaks = [0.3, 0.55, 0.8];
        let values = [1.0, -2.0, 0.5, -0.25];
        let fem = h_minus_one_norm_piecewise(0.0, 1.0, &breaks, &values, 4000).unwrap();
        let n = 400_000;
        let h = 1.0 / n as f64;
        let mut big_f = Vec::with_capacity(n);
        let mut acc = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            let k = breaks.iter().filter(|b| **b <= x).count();
            acc += values[k] * h;
            big_f.push(acc - 0.5 * values[k] * h);
        }
        let mean = big_f.iter().sum::<f64>() / n as f64;
        let var = big_f.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!((fem - sqrt(var)).abs() < 1e-6 * sqrt(var));
    }
}
