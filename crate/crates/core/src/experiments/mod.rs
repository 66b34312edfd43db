//! Monte-Carlo experiments: regime sweeps over `ε ↦ δ(ε)`, favorable-block
//! counting, the large-deviation rate of window energies, and excursions of
//! Liouville stripes.

mod blocks;
mod excursions;
mod ld;

pub use blocks::{block_count_experiment, block_lattice, count_favorable_blocks, second_moment_bound, BlockCount, BlockReport};
pub use excursions::{
    liouville_excursion_experiment, ExcursionCase, ExcursionReport, ExcursionStripe, LiouvilleEpsRule, MThreshold,
};
pub use ld::{
    calibrate_lambda_dev, ld_rate_compare, ld_rate_machinery, legendre, window_energy_z, window_profile, LambdaCalibration,
    LdCompare, LdQuantities, LdRow, ThetaLaw, WindowEnergy,
};

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use libm::fabs;
use serde::{Deserialize, Serialize};

use crate::exec::Executor;
use crate::homog::{HomogenizedConstants, Scaling};
use crate::media::{sample_checkerboard, CellLaw, Lattice};
use crate::numeric::quantile_sorted;
use crate::rng::derive_seed;
use crate::solver::{homogenized_reference, minimize_cell_problem, rare_event_reference, CellProblem1D, MinimizeOptions};
use crate::wells::{sigma_w, DoubleWell, SigmaMethod};
use crate::{Error, Result};

/// Relative band around a reference value used by the verdicts.
pub const VERDICT_BAND: f64 = 0.05;
/// Largest tolerated fraction of failed samples per ε.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

/// Inputs of [`regime_sweep`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSweepConfig {
    pub law: CellLaw,
    #[serde(default = "crate::wells::quartic_well")]
    pub well: DoubleWell,
    pub eps_grid: Vec<f64>,
    pub scaling: Scaling,
    pub rho: f64,
    pub n_samples: usize,
    pub seed0: u64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub minimize: MinimizeOptions,
}

impl RegimeSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eps_grid.is_empty() || self.eps_grid.windows(2).any(|w| !(w[1] < w[0])) || !(self.eps_grid[0] > 0.0) {
            return Err(Error::InvalidParameter("eps_grid must be positive and strictly decreasing".into()));
        }
        if *self.eps_grid.last().unwrap() <= 0.0 {
            return Err(Error::InvalidParameter("eps_grid must be positive".into()));
        }
        if self.n_samples < 8 {
            return Err(Error::InvalidParameter("n_samples must be at least 8".into()));
        }
        if !(self.rho > 0.0) {
            return Err(Error::InvalidParameter("rho must be positive".into()));
        }
        for &e in &self.eps_grid {
            if self.scaling.delta(e).is_none() {
                return Err(Error::InvalidParameter(alloc::format!("scaling undefined at eps = {e}")));
            }
        }
        self.well.validate()
    }
}

/// Outcome of one `(ε, sample)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub eps: f64,
    pub delta: f64,
    pub sample: usize,
    pub seed: u64,
    pub energy: Option<f64>,
    pub datum_energy: Option<f64>,
    pub lower_bound: Option<f64>,
    pub residual: Option<f64>,
    pub nodes: Option<usize>,
    pub invariants_ok: bool,
    pub error: Option<String>,
}

/// Per-ε aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub delta: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// `(median − σ̄)/σ̄`.
    pub rel_to_homogenized: f64,
    /// `(median − σ_W√(θ*λ))/σ_W√(θ*λ)`.
    pub rel_to_rare: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeVerdict {
    Homogenization,
    RareEvents,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub sigma_w: f64,
    pub sigma_bar: f64,
    pub sigma_rare: f64,
    pub scaling: String,
    pub rows: Vec<SweepRow>,
    pub samples: Vec<SampleRecord>,
    pub verdict: RegimeVerdict,
    /// Some ε has more than [`MAX_FAILURE_FRACTION`] failed samples.
    pub too_many_failures: bool,
}

impl SweepResult {
    /// Every successful sample satisfies the solver invariants.
    pub fn invariants_hold(&self) -> bool {
        self.samples.iter().all(|s| s.energy.is_none() || s.invariants_ok)
    }
}

/// Trend verdict: the last median lies within [`VERDICT_BAND`] of one
/// reference and the distance to it does not grow over the last three ε.
pub fn regime_verdict(rows: &[SweepRow]) -> RegimeVerdict {
    let tail = &rows[rows.len().saturating_sub(3)..];
    let approaching = |f: fn(&SweepRow) -> f64| tail.windows(2).all(|w| fabs(f(&w[1])) <= fabs(f(&w[0])));
    let Some(last) = tail.last() else {
        return RegimeVerdict::Inconclusive;
    };
    if fabs(last.rel_to_homogenized) <= VERDICT_BAND && approaching(|r| r.rel_to_homogenized) {
        RegimeVerdict::Homogenization
    } else if fabs(last.rel_to_rare) <= VERDICT_BAND && approaching(|r| r.rel_to_rare) {
        RegimeVerdict::RareEvents
    } else {
        RegimeVerdict::Inconclusive
    }
}

/// Samples a checkerboard for every `(ε, i)`, minimizes the cell problem on
/// `(center − ρ, center + ρ)` with `δ = δ(ε)`, and aggregates per ε. Sample
/// `i` at grid position `k` uses seed `derive_seed(seed0, 0x5357_0000 + k, i)`.
pub fn regime_sweep<E: Executor>(exec: &E, config: &RegimeSweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let sigma = sigma_w(&config.well, SigmaMethod::Equipartition)?;
    let consts = HomogenizedConstants::from_law(&config.law);
    let sigma_bar = homogenized_reference(&consts, &config.well)?;
    let sigma_rare = rare_event_reference(&config.law.bounds(), sigma);
    let n = config.n_samples;
    let total = config.eps_grid.len() * n;
    let lat = Lattice::CENTERED;
    let samples = exec.map(total, |job| {
        let (k, i) = (job / n, job % n);
        let eps = config.eps_grid[k];
        let delta = config.scaling.delta(eps).unwrap();
        let seed = derive_seed(config.seed0, 0x5357_0000 + k as u64, i as u64);
        let mut rec = SampleRecord {
            eps,
            delta,
            sample: i,
            seed,
            energy: None,
            datum_energy: None,
            lower_bound: None,
            residual: None,
            nodes: None,
            invariants_ok: false,
            error: None,
        };
        let run = || -> Result<_> {
            let lo = (config.center - config.rho) / delta;
            let hi = (config.center + config.rho) / delta;
            let medium = sample_checkerboard(seed, [lat.index(lo) - 1, lat.index(hi) + 1], &config.law)?;
            let problem = CellProblem1D::new(eps, delta, config.rho, config.center, &medium, config.well)?;
            minimize_cell_problem(&problem, &config.minimize)
        };
        match run() {
            Ok(rep) => {
                rec.invariants_ok = rep.invariants_hold();
                rec.energy = Some(rep.energy);
                rec.datum_energy = Some(rep.datum_energy);
                rec.lower_bound = Some(rep.lower_bound);
                rec.residual = Some(rep.residual_sup);
                rec.nodes = Some(rep.grid.nodes);
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    });
    let mut rows = Vec::with_capacity(config.eps_grid.len());
    let mut too_many_failures = false;
    for (k, &eps) in config.eps_grid.iter().enumerate() {
        let chunk = &samples[k * n..(k + 1) * n];
        let mut e: Vec<f64> = chunk.iter().filter_map(|s| s.energy).collect();
        e.sort_by(|a, b| a.total_cmp(b));
        let n_failed = n - e.len();
        if n_failed as f64 > MAX_FAILURE_FRACTION * n as f64 {
            too_many_failures = true;
        }
        let median = quantile_sorted(&e, 0.5);
        rows.push(SweepRow {
            eps,
            delta: config.scaling.delta(eps).unwrap(),
            n_ok: e.len(),
            n_failed,
            median,
            q1: quantile_sorted(&e, 0.25),
            q3: quantile_sorted(&e, 0.75),
            rel_to_homogenized: (median - sigma_bar) / sigma_bar,
            rel_to_rare: (median - sigma_rare) / sigma_rare,
        });
    }
    let verdict = regime_verdict(&rows);
    Ok(SweepResult {
        sigma_w: sigma,
        sigma_bar,
        sigma_rare,
        scaling: config.scaling.label(),
        rows,
        samples,
        verdict,
        too_many_failures,
    })
}

/// Minimized energy with a planted favorable stretch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedReport {
    pub m: f64,
    pub eps: f64,
    pub delta: f64,
    pub energy: f64,
    pub sigma_rare: f64,
    /// `energy/σ_W√(θ*λ) − 1`.
    pub omega: f64,
    pub invariants_ok: bool,
}

/// Samples a checkerboard, overwrites the cells meeting `[−Mε/2, Mε/2]`
/// with `(λ, θ*)` and minimizes the cell problem on `(−ρ, ρ)`.
#[allow(clippy::too_many_arguments)]
pub fn planted_stretch_energy(
    law: &CellLaw,
    well: &DoubleWell,
    eps: f64,
    delta: f64,
    rho: f64,
    m: f64,
    seed: u64,
    opts: &MinimizeOptions,
) -> Result<PlantedReport> {
    if !(m > 0.0 && m * eps < 2.0 * rho) {
        return Err(Error::InvalidParameter("stretch must fit in the domain".into()));
    }
    let lat = Lattice::CENTERED;
    let window = [lat.index(-rho / delta) - 1, lat.index(rho / delta) + 1];
    let fav = law.bounds().favorable();
    let half = 0.5 * m * eps / delta;
    let spec = crate::media::MediumSpec::Checkerboard {
        law: law.clone(),
        seed,
        window,
        plants: alloc::vec![crate::media::Plant { first: lat.index(-half), last: lat.index(half), cell: fav }],
        lattice: lat,
    };
    let medium = spec.realize()?;
    let problem = CellProblem1D::new(eps, delta, rho, 0.0, &medium, *well)?;
    let rep = minimize_cell_problem(&problem, opts)?;
    let sigma_rare = rare_event_reference(&law.bounds(), sigma_w(well, SigmaMethod::Equipartition)?);
    Ok(PlantedReport {
        m,
        eps,
        delta,
        energy: rep.energy,
        sigma_rare,
        omega: rep.energy / sigma_rare - 1.0,
        invariants_ok: rep.invariants_hold(),
    })
}
