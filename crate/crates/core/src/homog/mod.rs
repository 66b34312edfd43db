//! Homogenized coefficients, one-dimensional correctors, and the `Sub` and
//! `Osc` diagnostics with their tail probabilities.
//!
//! Cubes are `Q_R(x) = x + (−R/2, R/2)^d`. Both diagnostics take a supremum
//! over `R ≥ r`, truncated at `R_max` and evaluated on [`radius_grid`].

mod hminus;
mod tails;

pub use hminus::{
    dirichlet_mean, h_minus_one_norm, h_minus_one_norm_piecewise, h_minus_one_norm_square, pairing_mean,
    poisson_dirichlet, Domain,
};
pub use tails::{
    calibrate_nu, check_scale_condition, construct_admissible_scale, quantity_samples, tail_probability, BandScale,
    NuCalibration, ScaleCheck, ScaleRow, ScaleVerdict, Scaling, TailEstimate, TailModel, TailQuantity,
};

use alloc::vec::Vec;
use libm::{ceil, sqrt};
use serde::{Deserialize, Serialize};

use crate::media::{Bounds, CellLaw, Checkerboard2D, Medium1D};
use crate::{Error, Result};

/// Smallest sample accepted for empirical constants.
pub const MIN_EMPIRICAL_CELLS: usize = 10_000;

/// Linear elements per unit microcell in the `H⁻¹` solves.
pub const NODES_PER_CELL: f64 = 8.0;

/// Effective coefficients `(ā, θ̄)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogenizedConstants {
    pub a_bar: f64,
    pub theta_bar: f64,
}

/// Where the constants come from.
#[derive(Clone, Copy, Debug)]
pub enum ConstantsSource<'a> {
    Law(&'a CellLaw),
    Sample(&'a Medium1D),
}

impl HomogenizedConstants {
    /// `ā = E[1/a]⁻¹`, `θ̄ = E[θ]`.
    pub fn from_law(law: &CellLaw) -> Self {
        let (mut inv, mut th) = (0.0, 0.0);
        for at in law.atoms() {
            inv += at.weight / at.a;
            th += at.weight * at.theta;
        }
        HomogenizedConstants { a_bar: 1.0 / inv, theta_bar: th }
    }

    /// Harmonic and arithmetic cell averages of a sample window.
    pub fn from_medium(medium: &Medium1D) -> Result<Self> {
        let n = medium.cells.len();
        if n < MIN_EMPIRICAL_CELLS {
            return Err(Error::WindowTooSmall(alloc::format!("{n} cells, need {MIN_EMPIRICAL_CELLS}")));
        }
        let (mut inv, mut th) = (0.0, 0.0);
        for c in &medium.cells {
            inv += 1.0 / c.a;
            th += c.theta;
        }
        Ok(HomogenizedConstants { a_bar: n as f64 / inv, theta_bar: th / n as f64 })
    }

    pub fn within(&self, b: &Bounds) -> bool {
        let tol = 1e-12;
        b.a_min * (1.0 - tol) <= self.a_bar
            && self.a_bar <= b.a_max * (1.0 + tol)
            && b.theta_min * (1.0 - tol) <= self.theta_bar
            && self.theta_bar <= b.theta_max * (1.0 + tol)
    }
}

pub fn homogenized_constants_1d(source: ConstantsSource<'_>) -> Result<HomogenizedConstants> {
    match source {
        ConstantsSource::Law(l) => Ok(HomogenizedConstants::from_law(l)),
        ConstantsSource::Sample(m) => HomogenizedConstants::from_medium(m),
    }
}

/// Piecewise-linear corrector with `φ′ = ā/a − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corrector1D {
    pub a_bar: f64,
    /// Breakpoints: the interval ends and the cell boundaries between them.
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    /// `a` on each segment.
    pub coefficients: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl Corrector1D {
    fn segment(&self, y: f64) -> usize {
        self.knots.partition_point(|&k| k <= y).clamp(1, self.slopes.len()) - 1
    }

    pub fn eval(&self, y: f64) -> f64 {
        let k = self.segment(y);
        self.values[k] + self.slopes[k] * (y - self.knots[k])
    }

    pub fn slope(&self, y: f64) -> f64 {
        self.slopes[self.segment(y)]
    }

    /// `a(1 + φ′)`, equal to `ā` on every segment.
    pub fn flux(&self, y: f64) -> f64 {
        let k = self.segment(y);
        self.coefficients[k] * (1.0 + self.slopes[k])
    }

    /// The flux corrector vanishes in one dimension.
    pub fn sigma(&self, _y: f64) -> f64 {
        0.0
    }

    /// Mean and variance of `φ` over `[lo, hi]`, exact for piecewise-linear
    /// `φ`; values are shifted by `φ(lo)` before squaring.
    pub fn moments(&self, lo: f64, hi: f64) -> (f64, f64) {
        let shift = self.eval(lo);
        let (mut s1, mut s2) = (0.0, 0.0);
        let mut a = lo;
        let mut k = self.segment(lo);
        while a < hi {
            let b = if k + 1 < self.knots.len() - 1 { self.knots[k + 1].min(hi) } else { hi };
            let fa = self.values[k] + self.slopes[k] * (a - self.knots[k]) - shift;
            let fb = self.values[k] + self.slopes[k] * (b - self.knots[k]) - shift;
            let h = b - a;
            s1 += 0.5 * h * (fa + fb);
            s2 += h * (fa * fa + fa * fb + fb * fb) / 3.0;
            a = b;
            k += 1;
        }
        let len = hi - lo;
        let mean = s1 / len;
        (mean + shift, (s2 / len - mean * mean).max(0.0))
    }
}

/// Corrector on `[lo, hi]` with `φ(0) = 0` when `0 ∈ [lo, hi]`, else
/// `φ(lo) = 0` (the diagnostics only see `φ` up to constants).
pub fn corrector_phi_1d(medium: &Medium1D, lo: f64, hi: f64, a_bar: f64) -> Result<Corrector1D> {
    if !(hi > lo) {
        return Err(Error::InvalidParameter("empty corrector interval".into()));
    }
    if !medium.covers(lo, hi) {
        return Err(Error::WindowCoverage { lo, hi });
    }
    let lat = medium.lattice;
    let mut knots = Vec::new();
    knots.push(lo);
    let mut z = lat.index(lo) + 1;
    while lat.left(z) < hi {
        if lat.left(z) > lo {
            knots.push(lat.left(z));
        }
        z += 1;
    }
    knots.push(hi);
    let mut values = Vec::with_capacity(knots.len());
    let mut coefficients = Vec::with_capacity(knots.len() - 1);
    let mut slopes = Vec::with_capacity(knots.len() - 1);
    values.push(0.0);
    for w in knots.windows(2) {
        let a = medium.at(0.5 * (w[0] + w[1])).ok_or(Error::WindowCoverage { lo, hi })?.a;
        let s = a_bar / a - 1.0;
        coefficients.push(a);
        slopes.push(s);
        values.push(values.last().unwrap() + s * (w[1] - w[0]));
    }
    let mut phi = Corrector1D { a_bar, knots, values, coefficients, slopes };
    if lo <= 0.0 && 0.0 <= hi {
        let c = phi.eval(0.0);
        for v in phi.values.iter_mut() {
            *v -= c;
        }
    }
    Ok(phi)
}

/// Radii of the truncated supremum for `Sub_x(r)`, `Osc_x(r)`: `r` together
/// with the points of `G` in `(r, R_max]`, where `G` holds the integers up to
/// 64 and `k·2^j` for `32 ≤ k < 64`, `j ≥ 1`, plus `R_max`. `G` is closed
/// under doubling, so the truncated quantities are nonincreasing along
/// `r, 2r, 4r, …` for `r ∈ G`.
pub fn radius_grid(r: f64, r_max: f64) -> Vec<f64> {
    let mut out = alloc::vec![r];
    let mut push = |g: f64| {
        if g > r && g <= r_max {
            out.push(g);
        }
    };
    for k in 1..=64 {
        push(k as f64);
    }
    let mut scale = 2.0;
    while 32.0 * scale <= r_max {
        for k in 32..64 {
            push(k as f64 * scale);
        }
        scale *= 2.0;
    }
    push(r_max);
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup();
    out
}

/// Per-radius values of the two diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubOscReport {
    pub center: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub radii: Vec<f64>,
    /// `R⁻¹(⨍_{Q_R}|φ − ⨍φ|²)^{1/2}` per radius.
    pub sub_values: Vec<f64>,
    /// `R⁻¹‖θ − θ̄‖_{H⁻¹(Q_R)}` per radius.
    pub osc_values: Vec<f64>,
}

impl SubOscReport {
    pub fn sub(&self) -> f64 {
        self.sub_values.iter().fold(0.0, |m, v| m.max(*v))
    }

    pub fn osc(&self) -> f64 {
        self.osc_values.iter().fold(0.0, |m, v| m.max(*v))
    }
}

fn check_radii(r: f64, r_max: f64) -> Result<()> {
    if !(r > 0.0 && r_max >= r && r_max.is_finite()) {
        return Err(Error::InvalidParameter("need 0 < r ≤ R_max < ∞".into()));
    }
    Ok(())
}

fn sub_values(medium: &Medium1D, x: f64, radii: &[f64], a_bar: f64) -> Result<Vec<f64>> {
    let big = *radii.last().unwrap();
    let phi = corrector_phi_1d(medium, x - 0.5 * big, x + 0.5 * big, a_bar)?;
    Ok(radii
        .iter()
        .map(|&rr| {
            let (_, var) = phi.moments(x - 0.5 * rr, x + 0.5 * rr);
            sqrt(var) / rr
        })
        .collect())
}

fn osc_values(medium: &Medium1D, x: f64, radii: &[f64], theta_bar: f64) -> Result<Vec<f64>> {
    let big = *radii.last().unwrap();
    if !medium.covers(x - 0.5 * big, x + 0.5 * big) {
        return Err(Error::WindowCoverage { lo: x - 0.5 * big, hi: x + 0.5 * big });
    }
    let lat = medium.lattice;
    let mut out = Vec::with_capacity(radii.len());
    let mut breaks = Vec::new();
    let mut values = Vec::new();
    for &rr in radii {
        let (lo, hi) = (x - 0.5 * rr, x + 0.5 * rr);
        breaks.clear();
        values.clear();
        let mut z = lat.index(lo);
        loop {
            let c = medium.cell(z).ok_or(Error::WindowCoverage { lo, hi })?;
            values.push(c.theta - theta_bar);
            let right = lat.left(z + 1);
            if right >= hi {
                break;
            }
            breaks.push(right);
            z += 1;
        }
        let elements = ceil(NODES_PER_CELL * rr / lat.width).max(8.0) as usize;
        out.push(h_minus_one_norm_piecewise(lo, hi, &breaks, &values, elements)? / rr);
    }
    Ok(out)
}

/// Both diagnostics at `x` on [`radius_grid`]`(r, R_max)`.
pub fn sub_osc_report(medium: &Medium1D, x: f64, r: f64, r_max: f64, c: &HomogenizedConstants) -> Result<SubOscReport> {
    check_radii(r, r_max)?;
    let radii = radius_grid(r, r_max);
    Ok(SubOscReport {
        center: x,
        r_min: r,
        r_max,
        sub_values: sub_values(medium, x, &radii, c.a_bar)?,
        osc_values: osc_values(medium, x, &radii, c.theta_bar)?,
        radii,
    })
}

/// Truncated `Sub_x(r)` in one dimension, where `σ ≡ 0`.
pub fn sub_quantity(medium: &Medium1D, x: f64, r: f64, r_max: f64, a_bar: f64) -> Result<f64> {
    check_radii(r, r_max)?;
    let v = sub_values(medium, x, &radius_grid(r, r_max), a_bar)?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

/// Truncated `Osc_x(r)` in one dimension.
pub fn osc_quantity(medium: &Medium1D, x: f64, r: f64, r_max: f64, theta_bar: f64) -> Result<f64> {
    check_radii(r, r_max)?;
    let v = osc_values(medium, x, &radius_grid(r, r_max), theta_bar)?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

/// Truncated `Osc_x(r)` for a planar checkerboard on unit squares
/// `[z − ½, z + ½)²`.
pub fn osc_quantity_2d(field: &Checkerboard2D, x: [f64; 2], r: f64, r_max: f64, theta_bar: f64) -> Result<f64> {
    check_radii(r, r_max)?;
    let mut best = 0.0f64;
    for rr in radius_grid(r, r_max) {
        let elements = ceil(NODES_PER_CELL * rr).max(8.0) as usize;
        let h = rr / elements as f64;
        let (x0, y0) = (x[0] - 0.5 * rr, x[1] - 0.5 * rr);
        let lat = crate::media::Lattice::CENTERED;
        let norm = h_minus_one_norm_square(rr, elements, |i, j| {
            let z1 = lat.index(x0 + (i as f64 + 0.5) * h);
            let z2 = lat.index(y0 + (j as f64 + 0.5) * h);
            field.theta(z1, z2) - theta_bar
        })?;
        best = best.max(norm / rr);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{Cell, Lattice, MediumSpec};

    fn periodic(a: [f64; 2], theta: [f64; 2], window: [i64; 2]) -> Medium1D {
        MediumSpec::Periodic {
            pattern: alloc::vec![Cell { a: a[0], theta: theta[0] }, Cell { a: a[1], theta: theta[1] }],
            lattice: Lattice { origin: 0.0, width: 0.5 },
            window,
            bounds: None,
        }
        .realize()
        .unwrap()
    }

    #[test]
    fn triangle_wave_corrector() {
        let m = periodic([1.0, 4.0], [1.0, 1.0], [-20, 20]);
        let phi = corrector_phi_1d(&m, -4.0, 4.0, 1.6).unwrap();
        assert_eq!(phi.eval(0.0), 0.0);
        assert!((phi.slope(0.25) - 0.6).abs() < 1e-15);
        assert!((phi.slope(0.75) + 0.6).abs() < 1e-15);
        assert!((phi.eval(0.5) - 0.3).abs() < 1e-15);
        assert!((phi.eval(1.0)).abs() < 1e-15);
        let (_, var) = phi.moments(-4.0, 4.0);
        assert!((sqrt(var) - 0.3 / sqrt(12.0)).abs() < 1e-12);
    }

    #[test]
    fn radius_grid_closed_under_doubling() {
        let g = radius_grid(1.0, 10_000.0);
        for &r in &g {
            if 2.0 * r <= 10_000.0 && r != 10_000.0 {
                assert!(g.iter().any(|&s| s == 2.0 * r), "{r}");
            }
        }
        assert_eq!(radius_grid(2.5, 4.0), alloc::vec![2.5, 3.0, 4.0]);
    }
}
