//! P1 finite elements for `∫ ε/2·a·u′² + ε⁻¹·θ·W(u)` on a 1D grid with
//! piecewise-constant coefficients, and a damped Newton minimizer.
//!
//! Nodal values are stored as unevaluated sums `hi + lo`. Near convergence
//! the stiffness term amplifies rounding in `u_{i+1} − u_i` by `(ε/h)²`,
//! which for `δ = ε³` exceeds the residual tolerance; the compensated
//! representation keeps those differences exact to working precision.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::fabs;

use crate::numeric::{solve_spd_tridiagonal, two_sum, NeumaierSum, GL3_NODES, GL3_WEIGHTS};
use crate::wells::DoubleWell;
use crate::{Error, Result};

/// Box constraint applied to iterates.
pub const PROJECTION_BOUND: f64 = 2.0;

/// Discretized energy on a fixed grid with Dirichlet end values.
#[derive(Clone, Debug)]
pub struct GridProblem {
    pub nodes: Vec<f64>,
    pub elem_a: Vec<f64>,
    pub elem_theta: Vec<f64>,
    pub eps: f64,
    pub well: DoubleWell,
    pub left: f64,
    pub right: f64,
}

/// Nodal values as compensated pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Iterate {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl Iterate {
    pub fn from_values(values: &[f64]) -> Self {
        Iterate { hi: values.to_vec(), lo: vec![0.0; values.len()] }
    }

    pub fn len(&self) -> usize {
        self.hi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hi.is_empty()
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.hi[i] + self.lo[i]
    }

    /// `u_{i+1} − u_i` evaluated from the compensated pairs.
    #[inline]
    fn diff(&self, i: usize) -> f64 {
        (self.hi[i + 1] - self.hi[i]) + (self.lo[i + 1] - self.lo[i])
    }

    pub fn to_values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    fn set(&mut self, i: usize, v: f64) {
        self.hi[i] = v;
        self.lo[i] = 0.0;
    }

    /// `u_i += t·step_i` with error-free accumulation, then clamp to the box.
    fn add_scaled(&mut self, step: &[f64], t: f64, first: usize) {
        for (k, s) in step.iter().enumerate() {
            let i = first + k;
            let (h1, e1) = two_sum(self.hi[i], t * s);
            let (h2, e2) = two_sum(h1, self.lo[i] + e1);
            self.hi[i] = h2;
            self.lo[i] = e2;
            if fabs(self.hi[i]) > PROJECTION_BOUND {
                self.set(i, self.hi[i].clamp(-PROJECTION_BOUND, PROJECTION_BOUND));
            }
        }
    }
}

/// Settings for [`GridProblem::newton`].
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Residual tolerance relative to `θ^*·sup|W′|` on `[−1, 1]`.
    pub relative_tolerance: f64,
    /// Semi-implicit gradient-flow steps used when Newton stalls.
    pub flow_steps: usize,
    /// Number of flow-then-Newton restarts before giving up.
    pub max_restarts: usize,
    /// Newton steps are rescaled so that `max |Δu_i|` does not exceed this.
    pub max_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iterations: 2000, relative_tolerance: 1e-8, flow_steps: 200, max_restarts: 3, max_step: 0.5 }
    }
}

/// Result of a Newton solve.
#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub iterate: Iterate,
    pub energy: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub flow_restarts: usize,
}

struct System {
    grad: Vec<f64>,
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl GridProblem {
    /// Constant coefficients on the given nodes.
    pub fn homogeneous(nodes: Vec<f64>, a: f64, theta: f64, eps: f64, well: DoubleWell, left: f64, right: f64) -> Result<Self> {
        let ne = nodes.len().saturating_sub(1);
        let p = GridProblem { nodes, elem_a: vec![a; ne], elem_theta: vec![theta; ne], eps, well, left, right };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n < 3 {
            return Err(Error::InvalidParameter("grid needs at least 3 nodes".into()));
        }
        if self.elem_a.len() != n - 1 || self.elem_theta.len() != n - 1 {
            return Err(Error::InvalidParameter("one coefficient pair per element required".into()));
        }
        if self.nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("nodes must be strictly increasing".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn theta_max(&self) -> f64 {
        self.elem_theta.iter().copied().fold(0.0, f64::max)
    }

    /// Sup-norm tolerance on the scaled residual `ε·g_i/m_i`.
    pub fn residual_tolerance(&self, relative: f64) -> f64 {
        relative * self.theta_max() * self.well.sup_abs_d1()
    }

    /// Nodal values with the Dirichlet data written into the end nodes.
    pub fn with_boundary(&self, values: &[f64]) -> Result<Iterate> {
        if values.len() != self.nodes.len() {
            return Err(Error::GridMismatch);
        }
        let mut it = Iterate::from_values(values);
        let n = it.len();
        it.set(0, self.left);
        it.set(n - 1, self.right);
        Ok(it)
    }

    /// Energy of the P1 function with the given nodal values. The gradient
    /// term is exact; the potential uses three-point Gauss–Legendre per
    /// element (exact for polynomial wells of degree ≤ 5).
    pub fn energy(&self, u: &Iterate) -> f64 {
        let mut acc = NeumaierSum::default();
        for e in 0..self.nodes.len() - 1 {
            let h = self.nodes[e + 1] - self.nodes[e];
            let d = u.diff(e);
            let ui = u.value(e);
            let mut pot = 0.0;
            for q in 0..3 {
                pot += GL3_WEIGHTS[q] * self.well.evaluate(ui + GL3_NODES[q] * d);
            }
            acc.add(0.5 * self.eps * self.elem_a[e] * d * d / h + self.elem_theta[e] * h / self.eps * pot);
        }
        acc.value()
    }

    pub fn energy_of_values(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::GridMismatch);
        }
        Ok(self.energy(&Iterate::from_values(values)))
    }

    fn assemble(&self, u: &Iterate, sys: &mut System) {
        let n = self.nodes.len();
        sys.grad.iter_mut().for_each(|x| *x = 0.0);
        sys.diag.iter_mut().for_each(|x| *x = 0.0);
        sys.off.iter_mut().for_each(|x| *x = 0.0);
        for e in 0..n - 1 {
            let h = self.nodes[e + 1] - self.nodes[e];
            let d = u.diff(e);
            let ui = u.value(e);
            let k = self.eps * self.elem_a[e] / h;
            let c = self.elem_theta[e] * h / self.eps;
            let (mut g0, mut g1, mut h00, mut h11, mut h01) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for q in 0..3 {
                let xi = GL3_NODES[q];
                let uq = ui + xi * d;
                let w1 = GL3_WEIGHTS[q] * self.well.d1(uq);
                let w2 = GL3_WEIGHTS[q] * self.well.d2(uq);
                g0 += w1 * (1.0 - xi);
                g1 += w1 * xi;
                h00 += w2 * (1.0 - xi) * (1.0 - xi);
                h11 += w2 * xi * xi;
                h01 += w2 * xi * (1.0 - xi);
            }
            sys.grad[e] += -k * d + c * g0;
            sys.grad[e + 1] += k * d + c * g1;
            sys.diag[e] += k + c * h00;
            sys.diag[e + 1] += k + c * h11;
            sys.off[e] += -k + c * h01;
        }
    }

    /// `max_i ε·|g_i|/m_i` over interior nodes, `m_i` the nodal mass.
    fn scaled_residual(&self, grad: &[f64]) -> f64 {
        let n = self.nodes.len();
        let mut r = 0.0f64;
        for i in 1..n - 1 {
            let m = 0.5 * (self.nodes[i + 1] - self.nodes[i - 1]);
            r = r.max(fabs(grad[i]) * self.eps / m);
        }
        r
    }

    /// Residual of the Euler–Lagrange system at `u`.
    pub fn residual(&self, u: &Iterate) -> f64 {
        let n = self.nodes.len();
        let mut sys = System { grad: vec![0.0; n], diag: vec![0.0; n], off: vec![0.0; n] };
        self.assemble(u, &mut sys);
        self.scaled_residual(&sys.grad)
    }

    /// Damped Newton with Armijo backtracking on the energy. Indefinite
    /// Jacobians are shifted until the LDLᵀ factorization succeeds. If the
    /// line search stalls, a semi-implicit gradient flow (implicit stiffness,
    /// explicit `W′`) runs for `flow_steps` steps and Newton restarts.
    pub fn newton(&self, init: Iterate, opts: &NewtonOptions) -> Result<NewtonOutcome> {
        self.validate()?;
        let n = self.nodes.len();
        if init.len() != n {
            return Err(Error::GridMismatch);
        }
        let mut u = init;
        u.set(0, self.left);
        u.set(n - 1, self.right);
        for i in 1..n - 1 {
            let v = u.value(i);
            if !v.is_finite() {
                return Err(Error::InvalidParameter("non-finite initial value".into()));
            }
            if fabs(v) > PROJECTION_BOUND {
                u.set(i, v.clamp(-PROJECTION_BOUND, PROJECTION_BOUND));
            }
        }
        let tol = self.residual_tolerance(opts.relative_tolerance);
        let mut sys = System { grad: vec![0.0; n], diag: vec![0.0; n], off: vec![0.0; n] };
        let mut trial_sys = System { grad: vec![0.0; n], diag: vec![0.0; n], off: vec![0.0; n] };
        let mut energy = self.energy(&u);
        let mut iterations = 0usize;
        let mut restarts = 0usize;
        loop {
            self.assemble(&u, &mut sys);
            let res = self.scaled_residual(&sys.grad);
            if res <= tol {
                return Ok(NewtonOutcome { iterate: u, energy, residual: res, tolerance: tol, iterations, flow_restarts: restarts });
            }
            if iterations >= opts.max_iterations {
                return Err(Error::SolverFailure(alloc::format!(
                    "Newton reached {iterations} iterations with residual {res:.3e} (tolerance {tol:.3e})"
                )));
            }
            iterations += 1;
            let rhs: Vec<f64> = sys.grad[1..n - 1].iter().map(|g| -g).collect();
            let step = self.shifted_solve(&sys.diag[1..n - 1], &sys.off[1..n - 2], &rhs)?;
            let mut step = step;
            let big = step.iter().fold(0.0f64, |m, s| m.max(fabs(*s)));
            if big > opts.max_step {
                let f = opts.max_step / big;
                step.iter_mut().for_each(|s| *s *= f);
            }
            let slope: f64 = step.iter().zip(&sys.grad[1..n - 1]).map(|(s, g)| s * g).sum();
            let mut t = 1.0;
            let mut accepted = None;
            while t >= 1e-10 {
                let mut trial = u.clone();
                trial.add_scaled(&step, t, 1);
                let e1 = self.energy(&trial);
                if e1 <= energy + 1e-4 * t * slope {
                    accepted = Some((trial, e1));
                    break;
                }
                // Near convergence the energy decrease drowns in rounding;
                // accept the full step if it does not raise the energy beyond
                // that level and halves the residual.
                if t == 1.0 && e1 <= energy + 1e-13 * fabs(energy).max(1.0) {
                    self.assemble(&trial, &mut trial_sys);
                    if self.scaled_residual(&trial_sys.grad) < 0.5 * res {
                        accepted = Some((trial, e1));
                        break;
                    }
                }
                t *= 0.5;
            }
            match accepted {
                Some((trial, e1)) => {
                    u = trial;
                    energy = e1;
                }
                None => {
                    if restarts >= opts.max_restarts {
                        return Err(Error::SolverFailure(alloc::format!(
                            "line search stalled at residual {res:.3e} after {restarts} flow restarts"
                        )));
                    }
                    restarts += 1;
                    self.gradient_flow(&mut u, opts.flow_steps)?;
                    energy = self.energy(&u);
                }
            }
        }
    }

    fn shifted_solve(&self, diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        if let Some(x) = solve_spd_tridiagonal(diag, off, rhs) {
            return Ok(x);
        }
        let scale = diag.iter().fold(0.0f64, |m, d| m.max(fabs(*d))).max(1e-300);
        let mut mu = 1e-8 * scale;
        for _ in 0..24 {
            let shifted: Vec<f64> = diag.iter().map(|d| d + mu).collect();
            if let Some(x) = solve_spd_tridiagonal(&shifted, off, rhs) {
                return Ok(x);
            }
            mu *= 10.0;
        }
        Err(Error::SolverFailure(String::from("could not regularize the Newton system")))
    }

    /// Semi-implicit gradient flow `M(u⁺ − u)/τ = −K u⁺ − f_W(u)` with
    /// lumped mass `M`, stiffness `K` and explicit potential force `f_W`.
    fn gradient_flow(&self, u: &mut Iterate, steps: usize) -> Result<()> {
        let n = self.nodes.len();
        let tau = 0.1 * self.eps / (self.theta_max() * self.well.sup_abs_d2()).max(1e-300);
        let mut vals = u.to_values();
        let mut diag = vec![0.0; n - 2];
        let mut off = vec![0.0; n.saturating_sub(3)];
        let mut mass = vec![0.0; n - 2];
        for i in 1..n - 1 {
            mass[i - 1] = 0.5 * (self.nodes[i + 1] - self.nodes[i - 1]);
        }
        for e in 0..n - 1 {
            let k = self.eps * self.elem_a[e] / (self.nodes[e + 1] - self.nodes[e]);
            if e >= 1 {
                diag[e - 1] += k;
            }
            if e + 1 <= n - 2 {
                diag[e] += k;
            }
            if e >= 1 && e + 1 <= n - 2 {
                off[e - 1] -= k;
            }
        }
        for i in 0..n - 2 {
            diag[i] += mass[i] / tau;
        }
        for _ in 0..steps {
            let mut force = vec![0.0; n];
            for e in 0..n - 1 {
                let h = self.nodes[e + 1] - self.nodes[e];
                let c = self.elem_theta[e] * h / self.eps;
                let d = vals[e + 1] - vals[e];
                for q in 0..3 {
                    let xi = GL3_NODES[q];
                    let w1 = GL3_WEIGHTS[q] * self.well.d1(vals[e] + xi * d);
                    force[e] += c * w1 * (1.0 - xi);
                    force[e + 1] += c * w1 * xi;
                }
            }
            let mut rhs = vec![0.0; n - 2];
            for i in 1..n - 1 {
                rhs[i - 1] = mass[i - 1] / tau * vals[i] - force[i];
            }
            let k0 = self.eps * self.elem_a[0] / (self.nodes[1] - self.nodes[0]);
            let kl = self.eps * self.elem_a[n - 2] / (self.nodes[n - 1] - self.nodes[n - 2]);
            rhs[0] += k0 * self.left;
            rhs[n - 3] += kl * self.right;
            let next = solve_spd_tridiagonal(&diag, &off, &rhs)
                .ok_or_else(|| Error::SolverFailure(String::from("gradient-flow system not positive definite")))?;
            for i in 1..n - 1 {
                vals[i] = next[i - 1].clamp(-PROJECTION_BOUND, PROJECTION_BOUND);
            }
        }
        *u = Iterate::from_values(&vals);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    #[test]
    fn constant_state_has_zero_energy() {
        let p = GridProblem::homogeneous(uniform(50, 0.0, 1.0), 2.0, 3.0, 0.1, DoubleWell::Quartic, 1.0, 1.0).unwrap();
        assert_eq!(p.energy(&Iterate::from_values(&[1.0; 51])), 0.0);
    }

    #[test]
    fn gradient_matches_energy_differences() {
        let nodes = uniform(20, -1.0, 1.0);
        let mut p = GridProblem::homogeneous(nodes.clone(), 1.0, 1.0, 0.3, DoubleWell::TILTED_DEFAULT, -0.9, 0.8).unwrap();
        for e in 0..20 {
            p.elem_a[e] = 1.0 + (e % 3) as f64;
            p.elem_theta[e] = 1.0 + (e % 2) as f64;
        }
        let vals: Vec<f64> = nodes.iter().map(|x| libm::sin(1.3 * x)).collect();
        let u = p.with_boundary(&vals).unwrap();
        let n = nodes.len();
        let mut sys = System { grad: vec![0.0; n], diag: vec![0.0; n], off: vec![0.0; n] };
        p.assemble(&u, &mut sys);
        for i in 1..n - 1 {
            let h = 1e-6;
            let mut up = u.to_values();
            up[i] += h;
            let mut dn = u.to_values();
            dn[i] -= h;
            let fd = (p.energy_of_values(&up).unwrap() - p.energy_of_values(&dn).unwrap()) / (2.0 * h);
            assert!((fd - sys.grad[i]).abs() < 1e-6 * sys.grad[i].abs().max(1.0));
        }
        let i = 7;
        let mut up = u.to_values();
        up[i + 1] += 1e-6;
        let mut sys2 = System { grad: vec![0.0; n], diag: vec![0.0; n], off: vec![0.0; n] };
        p.assemble(&Iterate::from_values(&up), &mut sys2);
        let fd_off = (sys2.grad[i] - sys.grad[i]) / 1e-6;
        assert!((fd_off - sys.off[i]).abs() < 1e-4 * sys.off[i].abs().max(1.0));
    }
}
