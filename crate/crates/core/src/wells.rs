//! Double-well potentials, the surface tension `σ_W` and optimal transition
//! profiles.

use alloc::vec::Vec;
use libm::{fabs, pow, sqrt};
use serde::{Deserialize, Serialize};

use crate::numeric::{integrate_adaptive, NeumaierSum};
use crate::profile::Profile;
use crate::solver::discrete::{GridProblem, Iterate, NewtonOptions};
use crate::{Error, Result};

/// Double-well potential with zeros exactly at `±1`.
///
/// `Quartic` is `(1 − u²)²`. `Tilted { b, c }` multiplies it by
/// `1 + b·u² + c·u`, which must stay positive (`b > 0`, `c² < 4b`); it is a
/// C² perturbation with the same zeros and serves as a second, asymmetric
/// instance of the generic code path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DoubleWell {
    Quartic,
    Tilted { b: f64, c: f64 },
}

/// The prototypical quartic well.
pub fn quartic_well() -> DoubleWell {
    DoubleWell::Quartic
}

impl Default for DoubleWell {
    fn default() -> Self {
        DoubleWell::Quartic
    }
}

impl DoubleWell {
    /// Built-in perturbed well used alongside the quartic.
    pub const TILTED_DEFAULT: DoubleWell = DoubleWell::Tilted { b: 0.5, c: 0.5 };

    pub fn tilted(b: f64, c: f64) -> Result<Self> {
        let w = DoubleWell::Tilted { b, c };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DoubleWell::Quartic => Ok(()),
            DoubleWell::Tilted { b, c } => {
                if b.is_finite() && c.is_finite() && b > 0.0 && c * c < 4.0 * b {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("tilted well needs b > 0 and c² < 4b".into()))
                }
            }
        }
    }

    #[inline]
    pub fn evaluate(&self, u: f64) -> f64 {
        let p = 1.0 - u * u;
        match *self {
            DoubleWell::Quartic => p * p,
            DoubleWell::Tilted { b, c } => p * p * (1.0 + b * u * u + c * u),
        }
    }

    #[inline]
    pub fn d1(&self, u: f64) -> f64 {
        let p = 1.0 - u * u;
        let dp2 = -4.0 * u * p;
        match *self {
            DoubleWell::Quartic => dp2,
            DoubleWell::Tilted { b, c } => {
                let g = 1.0 + b * u * u + c * u;
                dp2 * g + p * p * (2.0 * b * u + c)
            }
        }
    }

    #[inline]
    pub fn d2(&self, u: f64) -> f64 {
        let p = 1.0 - u * u;
        let dp2 = -4.0 * u * p;
        let ddp2 = 12.0 * u * u - 4.0;
        match *self {
            DoubleWell::Quartic => ddp2,
            DoubleWell::Tilted { b, c } => {
                let g = 1.0 + b * u * u + c * u;
                ddp2 * g + 2.0 * dp2 * (2.0 * b * u + c) + p * p * 2.0 * b
            }
        }
    }

    /// Nondegeneracy order at the wells.
    pub fn kappa(&self) -> u32 {
        1
    }

    /// Growth exponent `p` in `|u|^p − 1 ≲ W(u)`.
    pub fn growth_p(&self) -> f64 {
        match self {
            DoubleWell::Quartic => 4.0,
            DoubleWell::Tilted { .. } => 6.0,
        }
    }

    /// A constant `C` with `|u|^p − 1 ≤ C·W(u)` for all `|u| ≥ 2`.
    /// Quartic: `(u⁴−1)/(u²−1)² = (u²+1)/(u²−1) ≤ 5/3`. Tilted: the ratio
    /// tends to `1/b` at infinity; the sup over `2 ≤ |u| ≤ 10³` is taken
    /// together with that limit.
    pub fn growth_constant(&self) -> f64 {
        match *self {
            DoubleWell::Quartic => 5.0 / 3.0,
            DoubleWell::Tilted { b, .. } => {
                let ratio = |u: f64| (pow(fabs(u), 6.0) - 1.0) / self.evaluate(u);
                let sup = sample_sup(ratio, 2.0, 1e3).max(sample_sup(ratio, -1e3, -2.0));
                sup.max(1.0 / b) * (1.0 + 1e-9)
            }
        }
    }

    /// Reflected well `u ↦ W(−u)`.
    pub fn reflected(&self) -> DoubleWell {
        match *self {
            DoubleWell::Quartic => DoubleWell::Quartic,
            DoubleWell::Tilted { b, c } => DoubleWell::Tilted { b, c: -c },
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match *self {
            DoubleWell::Quartic => true,
            DoubleWell::Tilted { c, .. } => c == 0.0,
        }
    }

    /// `sup |W′|` on `[−1, 1]`; closed form for the quartic (`8/(3√3)`),
    /// dense sampling otherwise.
    pub fn sup_abs_d1(&self) -> f64 {
        match self {
            DoubleWell::Quartic => 8.0 / (3.0 * sqrt(3.0)),
            _ => sample_sup(|u| fabs(self.d1(u)), -1.0, 1.0),
        }
    }

    /// `sup |W″|` on `[−1, 1]`.
    pub fn sup_abs_d2(&self) -> f64 {
        match self {
            DoubleWell::Quartic => 8.0,
            _ => sample_sup(|u| fabs(self.d2(u)), -1.0, 1.0),
        }
    }

    /// `∫_{lo}^{hi} √(2W(u)) du`, the equipartition transition cost between
    /// two values.
    pub fn transition_cost(&self, lo: f64, hi: f64) -> Result<f64> {
        integrate_adaptive(&|u| sqrt(2.0 * self.evaluate(u)), lo, hi, 1e-12)
    }
}

fn sample_sup<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const N: usize = 20_000;
    let mut best = 0.0f64;
    for i in 0..=N {
        best = best.max(f(a + (b - a) * i as f64 / N as f64));
    }
    best
}

/// How `σ_W` is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMethod {
    /// `∫_{−1}^{1} √(2W)` by adaptive Gauss–Legendre.
    Equipartition,
    /// Minimize the truncated transition energy on `[−20, 20]` with
    /// `4·10⁴` elements.
    Variational,
}

/// Surface tension `σ_W = min ∫ ½u′² + W(u)` over transitions from −1 to 1.
pub fn sigma_w(well: &DoubleWell, method: SigmaMethod) -> Result<f64> {
    well.validate()?;
    match method {
        SigmaMethod::Equipartition => well.transition_cost(-1.0, 1.0),
        SigmaMethod::Variational => Ok(homogeneous_kink(well, 20.0, 40_000)?.energy),
    }
}

/// `σ(λ, θ) = min ∫ ½λu′² + θW(u)`, by quadrature of `√(2λθW)`.
pub fn surface_tension(well: &DoubleWell, grad_coeff: f64, well_coeff: f64) -> Result<f64> {
    if !(grad_coeff > 0.0 && well_coeff > 0.0) {
        return Err(Error::InvalidParameter("coefficients must be positive".into()));
    }
    integrate_adaptive(&|u| sqrt(2.0 * grad_coeff * well_coeff * well.evaluate(u)), -1.0, 1.0, 1e-12)
}

/// Discrete minimizer of `∫ ½u′² + W(u)` on `[−L, L]` with `u(±L) = ±1`.
#[derive(Clone, Debug)]
pub struct KinkSolution {
    pub profile: Profile,
    pub energy: f64,
    pub residual: f64,
}

/// Solves the truncated transition problem as two half-line problems pinned
/// at `u(0) = 0`. The full problem has an (exponentially) flat translation
/// mode; pinning removes it without changing the minimum beyond `e^{-cL}`.
pub fn homogeneous_kink(well: &DoubleWell, half_length: f64, elements: usize) -> Result<KinkSolution> {
    if !(half_length > 0.0) || elements < 4 || elements % 2 != 0 {
        return Err(Error::InvalidParameter("need L > 0 and an even element count ≥ 4".into()));
    }
    let half = elements / 2;
    let h = half_length / half as f64;
    let opts = NewtonOptions::default();
    let mut grid = Vec::with_capacity(elements + 1);
    let mut values = Vec::with_capacity(elements + 1);
    let mut energy = NeumaierSum::default();
    let mut residual = 0.0f64;
    for side in [-1.0f64, 1.0] {
        let nodes: Vec<f64> = (0..=half)
            .map(|i| if side < 0.0 { -half_length + i as f64 * h } else { i as f64 * h })
            .collect();
        let (left, right) = if side < 0.0 { (-1.0, 0.0) } else { (0.0, 1.0) };
        let problem = GridProblem::homogeneous(nodes, 1.0, 1.0, 1.0, *well, left, right)?;
        let init: Vec<f64> = problem.nodes.iter().map(|&s| libm::tanh(core::f64::consts::SQRT_2 * s)).collect();
        let out = problem.newton(Iterate::from_values(&init), &opts)?;
        energy.add(out.energy);
        residual = residual.max(out.residual);
        let vals = out.iterate.to_values();
        let skip = if side < 0.0 { 0 } else { 1 };
        grid.extend_from_slice(&problem.nodes[skip..]);
        values.extend_from_slice(&vals[skip..]);
    }
    Ok(KinkSolution { profile: Profile::new(grid, values)?, energy: energy.value(), residual })
}

/// Optimal profile `q*` of `∫ ½λu′² + θW(u)` with `q*(0) = 0`, sampled on
/// a symmetric uniform grid, together with its exact slopes.
#[derive(Clone, Debug)]
pub struct TransitionProfile {
    pub profile: Profile,
    pub slopes: Vec<f64>,
    pub grad_coeff: f64,
    pub well_coeff: f64,
    /// `∫ ½λq′² + θW(q)` over the sampled range.
    pub energy: f64,
    step: f64,
}

impl TransitionProfile {
    pub fn half_length(&self) -> f64 {
        *self.profile.grid.last().unwrap()
    }

    /// Cubic Hermite interpolation; saturates at the end values.
    pub fn eval(&self, s: f64) -> f64 {
        let g = &self.profile.grid;
        let n = g.len();
        if s <= g[0] {
            return self.profile.values[0];
        }
        if s >= g[n - 1] {
            return self.profile.values[n - 1];
        }
        let pos = (s - g[0]) / self.step;
        let i = (libm::floor(pos) as usize).min(n - 2);
        let t = (s - g[i]) / self.step;
        let (y0, y1) = (self.profile.values[i], self.profile.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }

    /// `q*′(s) = √(2θW(q*)/λ)`.
    pub fn slope(&self, s: f64, well: &DoubleWell) -> f64 {
        if fabs(s) >= self.half_length() {
            return 0.0;
        }
        sqrt((2.0 * self.well_coeff * well.evaluate(self.eval(s)) / self.grad_coeff).max(0.0))
    }
}

/// Integrates the equipartition ODE `q′ = √(2θW(q)/λ)` from `q(0) = 0` with
/// RK4 in both directions. The half-length starts at 20 natural units
/// `√(λ/θ)` and doubles until `1 − |q*(±L)| < 1e-8`.
pub fn optimal_profile(well: &DoubleWell, grad_coeff: f64, well_coeff: f64) -> Result<TransitionProfile> {
    well.validate()?;
    if !(grad_coeff > 0.0 && well_coeff > 0.0) {
        return Err(Error::InvalidParameter("coefficients must be positive".into()));
    }
    let unit = sqrt(grad_coeff / well_coeff);
    let rhs = |q: f64| sqrt((2.0 * well_coeff * well.evaluate(q.clamp(-1.0, 1.0)) / grad_coeff).max(0.0));
    let mut half_length = 20.0 * unit;
    for _ in 0..4 {
        const STEPS: usize = 20_000;
        let ds = half_length / STEPS as f64;
        let mut forward = Vec::with_capacity(STEPS + 1);
        let mut backward = Vec::with_capacity(STEPS + 1);
        for (dir, out) in [(1.0f64, &mut forward), (-1.0, &mut backward)] {
            let mut q = 0.0f64;
            out.push(q);
            for _ in 0..STEPS {
                let h = dir * ds;
                let k1 = rhs(q);
                let k2 = rhs(q + 0.5 * h * k1);
                let k3 = rhs(q + 0.5 * h * k2);
                let k4 = rhs(q + h * k3);
                q = (q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).clamp(-1.0, 1.0);
                out.push(q);
            }
        }
        let tail = (1.0 - forward[STEPS]).max(1.0 + backward[STEPS]);
        if tail >= 1e-8 {
            half_length *= 2.0;
            continue;
        }
        let mut grid = Vec::with_capacity(2 * STEPS + 1);
        let mut values = Vec::with_capacity(2 * STEPS + 1);
        for i in (1..=STEPS).rev() {
            grid.push(-(i as f64) * ds);
            values.push(backward[i]);
        }
        for (i, &q) in forward.iter().enumerate() {
            grid.push(i as f64 * ds);
            values.push(q);
        }
        let slopes: Vec<f64> = values.iter().map(|&q| rhs(q)).collect();
        // Composite Simpson for ½λq′² + θW(q).
        let dens: Vec<f64> = values
            .iter()
            .zip(&slopes)
            .map(|(&q, &dq)| 0.5 * grad_coeff * dq * dq + well_coeff * well.evaluate(q))
            .collect();
        let mut acc = NeumaierSum::default();
        for (i, d) in dens.iter().enumerate() {
            let w = if i == 0 || i + 1 == dens.len() {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc.add(w * d);
        }
        let energy = acc.value() * ds / 3.0;
        return Ok(TransitionProfile {
            profile: Profile::new(grid, values)?,
            slopes,
            grad_coeff,
            well_coeff,
            energy,
            step: ds,
        });
    }
    Err(Error::SolverFailure("profile tail did not reach 1e-8".into()))
}

/// Largest `(|u|^p − 1)/W(u)` over the sample points with `|u| ≥ 2`; the
/// growth condition holds on the samples iff this is at most
/// [`DoubleWell::growth_constant`].
pub fn growth_ratio(well: &DoubleWell, samples: &[f64]) -> f64 {
    samples
        .iter()
        .filter(|u| fabs(**u) >= 2.0)
        .map(|&u| (pow(fabs(u), well.growth_p()) - 1.0) / well.evaluate(u))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_values() {
        let w = quartic_well();
        assert_eq!(w.evaluate(1.0), 0.0);
        assert_eq!(w.evaluate(-1.0), 0.0);
        assert_eq!(w.evaluate(0.0), 1.0);
        assert!((w.d1(0.5) + 1.5).abs() < 1e-15);
        assert_eq!(w.kappa(), 1);
        assert_eq!(w.growth_p(), 4.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for w in [DoubleWell::Quartic, DoubleWell::TILTED_DEFAULT] {
            for i in 0..=40 {
                let u = -2.0 + 0.1 * i as f64;
                let h = 1e-5;
                let fd1 = (w.evaluate(u + h) - w.evaluate(u - h)) / (2.0 * h);
                let fd2 = (w.d1(u + h) - w.d1(u - h)) / (2.0 * h);
                assert!((fd1 - w.d1(u)).abs() <= 1e-6 * w.d1(u).abs().max(1.0), "d1 at {u}");
                assert!((fd2 - w.d2(u)).abs() <= 1e-6 * w.d2(u).abs().max(1.0), "d2 at {u}");
            }
        }
    }

    #[test]
    fn equipartition_sigma_closed_form() {
        let s = sigma_w(&quartic_well(), SigmaMethod::Equipartition).unwrap();
        assert!((s - 4.0 * core::f64::consts::SQRT_2 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tilted_validation() {
        assert!(DoubleWell::tilted(0.5, 2.0).is_err());
        assert!(DoubleWell::tilted(0.5, 0.5).is_ok());
        assert_eq!(DoubleWell::TILTED_DEFAULT.reflected(), DoubleWell::Tilted { b: 0.5, c: -0.5 });
    }

    #[test]
    fn quartic_profile_is_tanh() {
        let p = optimal_profile(&quartic_well(), 1.0, 1.0).unwrap();
        let mut err = 0.0f64;
        for i in 0..=2000 {
            let s = -10.0 + 0.01 * i as f64;
            err = err.max((p.eval(s) - libm::tanh(core::f64::consts::SQRT_2 * s)).abs());
        }
        assert!(err < 1e-9, "{err}");
        assert_eq!(p.eval(0.0), 0.0);
    }
}
