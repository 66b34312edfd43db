//! Planar cell problems `m(F_{ε,δ}, (x₀ − ρ, x₀ + ρ), q)` in one dimension:
//! discretization, multi-start minimization, glued competitors and the two
//! reference surface tensions.

pub mod discrete;
mod planar;

pub use planar::{planar_competitor_energy_dd, PlanarEnergy, PlanarOptions};

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;
use libm::{ceil, fabs, tanh};
use serde::{Deserialize, Serialize};

use crate::homog::HomogenizedConstants;
use crate::media::{Bounds, Cell, Medium1D};
use crate::profile::Profile;
use crate::wells::{optimal_profile, sigma_w, DoubleWell, SigmaMethod, TransitionProfile};
use crate::{Error, Result};
use discrete::{GridProblem, Iterate, NewtonOptions};

/// Boundary datum shape `q(s) = tanh(√2 s)`.
#[inline]
pub fn boundary_shape(s: f64) -> f64 {
    tanh(SQRT_2 * s)
}

/// `x ↦ q(ε⁻¹(x − center))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub epsilon: f64,
    pub center: f64,
}

impl BoundaryProfile {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        boundary_shape((x - self.center) / self.epsilon)
    }
}

pub fn boundary_profile(epsilon: f64, center: f64) -> BoundaryProfile {
    BoundaryProfile { epsilon, center }
}

/// Cell problem on `(center − ρ, center + ρ)` with coefficients
/// `(a, θ)(x/δ)` and datum `q(ε⁻¹(x − center))`.
#[derive(Clone, Copy, Debug)]
pub struct CellProblem1D<'m> {
    pub epsilon: f64,
    pub delta: f64,
    pub rho: f64,
    pub center: f64,
    pub medium: &'m Medium1D,
    pub well: DoubleWell,
}

/// Grid resolution: spacing `min(δw/cell_divisions, ε/eps_divisions)` with
/// `δw` the macroscopic cell width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridOptions {
    pub cell_divisions: f64,
    pub eps_divisions: f64,
    pub max_nodes: u64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { cell_divisions: 8.0, eps_divisions: 64.0, max_nodes: 4_000_000 }
    }
}

impl GridOptions {
    /// The same grid with every spacing halved.
    pub fn refined(&self) -> Self {
        GridOptions { cell_divisions: 2.0 * self.cell_divisions, eps_divisions: 2.0 * self.eps_divisions, ..*self }
    }
}

/// Summary of a discretization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nodes: usize,
    pub h_target: f64,
    pub h_max: f64,
    pub lo: f64,
    pub hi: f64,
}

/// A cell problem on its grid.
#[derive(Clone, Debug)]
pub struct DiscreteCellProblem {
    pub grid: GridProblem,
    pub datum: BoundaryProfile,
    pub h_target: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub rho: f64,
    pub center: f64,
    pub bounds: Bounds,
    /// Maximal runs of favorable elements as `(x_start, x_end)`.
    favorable: Vec<(f64, f64)>,
}

impl<'m> CellProblem1D<'m> {
    pub fn new(epsilon: f64, delta: f64, rho: f64, center: f64, medium: &'m Medium1D, well: DoubleWell) -> Result<Self> {
        let p = CellProblem1D { epsilon, delta, rho, center, medium, well };
        p.validate()?;
        Ok(p)
    }

    /// Checks positivity. `δ ≥ ε` is accepted (see [`Self::outside_regime`]).
    pub fn validate(&self) -> Result<()> {
        let ok = self.epsilon > 0.0 && self.delta > 0.0 && self.rho > 0.0 && self.center.is_finite();
        if !ok {
            return Err(Error::InvalidParameter("ε, δ, ρ must be positive".into()));
        }
        self.well.validate()
    }

    /// `δ/ε > 1`: outside the regime the theory addresses.
    pub fn outside_regime(&self) -> bool {
        self.delta > self.epsilon
    }

    pub fn datum(&self) -> BoundaryProfile {
        boundary_profile(self.epsilon, self.center)
    }

    /// Uniform grid of spacing at most `h` inside every δ-cell, with nodes on
    /// all cell boundaries and on `center ± ρ`.
    pub fn discretize(&self, opts: &GridOptions) -> Result<DiscreteCellProblem> {
        self.validate()?;
        let lat = self.medium.lattice;
        let cw = self.delta * lat.width;
        let h_target = (cw / opts.cell_divisions).min(self.epsilon / opts.eps_divisions);
        let per_cell = ceil(cw / h_target - 1e-9).max(1.0) as u64;
        let lo = self.center - self.rho;
        let hi = self.center + self.rho;
        let z_lo = lat.index(lo / self.delta);
        let z_hi = lat.index(hi / self.delta);
        if self.medium.cell(z_lo).is_none() || self.medium.cell(z_hi).is_none() {
            return Err(Error::WindowCoverage { lo: lo / self.delta, hi: hi / self.delta });
        }
        let needed = (z_hi - z_lo + 1) as u64 * per_cell + 1;
        if needed > opts.max_nodes {
            return Err(Error::GridBudget { needed, budget: opts.max_nodes });
        }
        let sliver = 1e-9 * cw;
        let fav = self.medium.bounds.favorable();
        let mut nodes = Vec::with_capacity(needed as usize);
        let mut elem_a = Vec::with_capacity(needed as usize);
        let mut elem_theta = Vec::with_capacity(needed as usize);
        let mut favorable: Vec<(f64, f64)> = Vec::new();
        nodes.push(lo);
        for z in z_lo..=z_hi {
            let c = self.medium.cell(z).unwrap();
            let b0 = *nodes.last().unwrap();
            let mut b1 = self.delta * lat.left(z + 1);
            if b1 > hi - sliver {
                b1 = hi;
            }
            if b1 - b0 <= sliver {
                continue;
            }
            let m = ceil((b1 - b0) / cw * per_cell as f64 - 1e-9).max(1.0) as usize;
            for j in 1..=m {
                let x = if j == m { b1 } else { b0 + (b1 - b0) * j as f64 / m as f64 };
                nodes.push(x);
                elem_a.push(c.a);
                elem_theta.push(c.theta);
            }
            if c == fav {
                match favorable.last_mut() {
                    Some(run) if run.1 == b0 => run.1 = b1,
                    _ => favorable.push((b0, b1)),
                }
            }
            if b1 == hi {
                break;
            }
        }
        let grid = GridProblem {
            nodes,
            elem_a,
            elem_theta,
            eps: self.epsilon,
            well: self.well,
            left: self.datum().eval(lo),
            right: self.datum().eval(hi),
        };
        grid.validate()?;
        Ok(DiscreteCellProblem {
            grid,
            datum: self.datum(),
            h_target,
            epsilon: self.epsilon,
            delta: self.delta,
            rho: self.rho,
            center: self.center,
            bounds: self.medium.bounds,
            favorable,
        })
    }
}

impl DiscreteCellProblem {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            nodes: self.grid.n_nodes(),
            h_target: self.h_target,
            h_max: self.grid.max_spacing(),
            lo: self.grid.nodes[0],
            hi: *self.grid.nodes.last().unwrap(),
        }
    }

    /// Energy of a profile living on this grid.
    pub fn energy(&self, u: &Profile) -> Result<f64> {
        if u.grid != self.grid.nodes {
            return Err(Error::GridMismatch);
        }
        Ok(self.grid.energy(&Iterate::from_values(&u.values)))
    }

    /// The boundary datum sampled on the grid.
    pub fn datum_competitor(&self) -> Profile {
        let values = self.grid.nodes.iter().map(|&x| self.datum.eval(x)).collect();
        Profile { grid: self.grid.nodes.clone(), values }
    }

    /// Favorable runs of length at least `min_len`, longest first.
    pub fn favorable_runs(&self, min_len: f64) -> Vec<(f64, f64)> {
        let mut runs: Vec<(f64, f64)> = self.favorable.iter().copied().filter(|r| r.1 - r.0 >= min_len).collect();
        runs.sort_by(|a, b| (b.1 - b.0).total_cmp(&(a.1 - a.0)).then(a.0.total_cmp(&b.0)));
        runs
    }

    /// `σ_W√(θ*λ)` lower bound minus the discretization slack
    /// `(σ_W√(θ*λ)/ε)·h`.
    pub fn lower_bound(&self, sigma: f64) -> f64 {
        let s = rare_event_reference(&self.bounds, sigma);
        s - s / self.epsilon * self.grid.max_spacing()
    }

    /// Interior profile `q_*` of `(λ, θ*)` recentred at `center_s`, joined
    /// linearly to the datum over the bands `[x₀ − ρ, x₀ − ρ + ε]` and
    /// `[x₀ + ρ − ε, x₀ + ρ]`. Requires `[center_s − Mε, center_s + Mε]`
    /// inside the interior.
    pub fn glue_competitor(&self, q_star: &TransitionProfile, center_s: f64, stretch_m: f64) -> Result<Profile> {
        let (lo, hi) = (self.grid.nodes[0], *self.grid.nodes.last().unwrap());
        let band = self.epsilon.min(0.5 * (hi - lo));
        let (a, b) = (lo + band, hi - band);
        let s_lo = center_s - stretch_m * self.epsilon;
        let s_hi = center_s + stretch_m * self.epsilon;
        if !(s_lo >= a && s_hi <= b) {
            return Err(Error::StretchExitsDomain { lo: s_lo, hi: s_hi });
        }
        let inner = |x: f64| q_star.eval((x - center_s) / self.epsilon);
        let (ua, ub) = (inner(a), inner(b));
        let (da, db) = (self.datum.eval(lo), self.datum.eval(hi));
        let values = self
            .grid
            .nodes
            .iter()
            .map(|&x| {
                if x <= lo {
                    da
                } else if x >= hi {
                    db
                } else if x < a {
                    da + (ua - da) * (x - lo) / band
                } else if x > b {
                    ub + (db - ub) * (x - b) / band
                } else {
                    inner(x)
                }
            })
            .collect();
        Ok(Profile { grid: self.grid.nodes.clone(), values })
    }
}

/// How a start was initialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StartTag {
    /// The monotone datum profile centred at `x₀`.
    Centered,
    /// Glued competitor centred on a favorable run `[start, end]`.
    FavorableRun { start: f64, end: f64 },
}

/// Outcome of one start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub tag: StartTag,
    pub initial_energy: f64,
    pub energy: Option<f64>,
    pub residual: Option<f64>,
    pub iterations: usize,
    pub error: Option<String>,
}

/// Settings for [`minimize_cell_problem`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    pub grid: GridOptions,
    pub newton: NewtonOptions,
    /// Minimal favorable run length, in units of ε, that receives a start.
    pub min_run_eps: f64,
    pub max_run_starts: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { grid: GridOptions::default(), newton: NewtonOptions::default(), min_run_eps: 2.0, max_run_starts: 8 }
    }
}

/// Lowest-energy converged start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub energy: f64,
    pub profile: Profile,
    pub residual_sup: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub best_start: StartTag,
    pub starts_used: Vec<StartRecord>,
    pub grid: GridSpec,
    /// Energy of the datum profile on the same grid.
    pub datum_energy: f64,
    /// `σ_W√(θ*λ) − C·h`.
    pub lower_bound: f64,
}

impl MinimizeReport {
    /// Energy between the lower bound and the datum competitor, values in
    /// `[−1, 1]` and residual below tolerance.
    pub fn invariants_hold(&self) -> bool {
        self.energy >= self.lower_bound
            && self.energy <= self.datum_energy * (1.0 + 1e-12)
            && self.profile.min_value() >= -1.0 - 1e-12
            && self.profile.max_value() <= 1.0 + 1e-12
            && self.residual_sup <= self.tolerance
    }
}

/// Multi-start minimization: the centred datum profile plus a glued
/// competitor on each of the `max_run_starts` longest favorable runs of
/// length `≥ min_run_eps·ε`. Starts are solved by damped Newton; the lowest
/// energy among converged starts whose values stay in `[−1, 1]` wins.
pub fn minimize_cell_problem(problem: &CellProblem1D<'_>, opts: &MinimizeOptions) -> Result<MinimizeReport> {
    let disc = problem.discretize(&opts.grid)?;
    minimize_discrete(&disc, opts)
}

/// [`minimize_cell_problem`] on an existing discretization.
pub fn minimize_discrete(disc: &DiscreteCellProblem, opts: &MinimizeOptions) -> Result<MinimizeReport> {
    let well = disc.grid.well;
    let sigma = sigma_w(&well, SigmaMethod::Equipartition)?;
    let datum = disc.datum_competitor();
    let datum_energy = disc.energy(&datum)?;
    let mut starts: Vec<(StartTag, Profile)> = alloc::vec![(StartTag::Centered, datum)];
    let runs = disc.favorable_runs(opts.min_run_eps * disc.epsilon);
    if !runs.is_empty() {
        let fav = disc.bounds.favorable();
        let q_star = optimal_profile(&well, fav.a, fav.theta)?;
        for &(start, end) in runs.iter().take(opts.max_run_starts) {
            let (lo, hi) = (disc.grid.nodes[0] + disc.epsilon, *disc.grid.nodes.last().unwrap() - disc.epsilon);
            if hi <= lo {
                break;
            }
            let c = (0.5 * (start + end)).clamp(lo, hi);
            if let Ok(p) = disc.glue_competitor(&q_star, c, 0.0) {
                starts.push((StartTag::FavorableRun { start, end }, p));
            }
        }
    }
    let mut records = Vec::with_capacity(starts.len());
    let mut best: Option<(f64, Iterate, f64, f64, usize, StartTag)> = None;
    for (tag, init) in starts {
        let initial_energy = disc.energy(&init)?;
        let mut rec =
            StartRecord { tag: tag.clone(), initial_energy, energy: None, residual: None, iterations: 0, error: None };
        match disc.grid.newton(Iterate::from_values(&init.values), &opts.newton) {
            Ok(out) => {
                rec.iterations = out.iterations;
                let vals = out.iterate.to_values();
                let inside = vals.iter().all(|v| fabs(*v) <= 1.0 + 1e-12);
                if !inside {
                    rec.error = Some("critical point leaves [−1, 1]".to_string());
                } else {
                    rec.energy = Some(out.energy);
                    rec.residual = Some(out.residual);
                    let better = match &best {
                        None => true,
                        Some(b) => out.energy < b.0,
                    };
                    if better {
                        best = Some((out.energy, out.iterate, out.residual, out.tolerance, out.iterations, tag));
                    }
                }
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        records.push(rec);
    }
    let (energy, iterate, residual, tolerance, iterations, best_start) = best.ok_or_else(|| {
        let msgs: Vec<String> = records.iter().filter_map(|r| r.error.clone()).collect();
        Error::SolverFailure(alloc::format!("all starts failed: {}", msgs.join("; ")))
    })?;
    Ok(MinimizeReport {
        energy,
        profile: Profile { grid: disc.grid.nodes.clone(), values: iterate.to_values() },
        residual_sup: residual,
        tolerance,
        iterations,
        best_start,
        starts_used: records,
        grid: disc.spec(),
        datum_energy,
        lower_bound: disc.lower_bound(sigma),
    })
}

/// Energy of a profile on the problem's default grid.
pub fn energy(problem: &CellProblem1D<'_>, u: &Profile) -> Result<f64> {
    problem.discretize(&GridOptions::default())?.energy(u)
}

/// Glued competitor on the default grid of `problem`.
pub fn glue_competitor(problem: &CellProblem1D<'_>, center_s: f64, stretch_m: f64) -> Result<Profile> {
    let disc = problem.discretize(&GridOptions::default())?;
    let fav = problem.medium.bounds.favorable();
    let q_star = optimal_profile(&problem.well, fav.a, fav.theta)?;
    disc.glue_competitor(&q_star, center_s, stretch_m)
}

/// `σ̄ = σ_W√(θ̄ā)`.
pub fn homogenized_reference(constants: &HomogenizedConstants, well: &DoubleWell) -> Result<f64> {
    Ok(sigma_w(well, SigmaMethod::Equipartition)? * libm::sqrt(constants.theta_bar * constants.a_bar))
}

/// `σ_W√(θ*λ)` given `σ_W`.
pub fn rare_event_reference(bounds: &Bounds, sigma: f64) -> f64 {
    sigma * libm::sqrt(bounds.theta_min * bounds.a_min)
}

/// The favorable cell `(λ, θ*)` of a medium.
pub fn favorable_cell(medium: &Medium1D) -> Cell {
    medium.bounds.favorable()
}
