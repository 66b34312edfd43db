//! Window energies `Z_γ = ∫_{−r}^{r} ½q′² + θ(s/γ)W(q)` and their
//! large-deviation rate.
//!
//! With `w_z = ∫_{cell z} W(q)` the deviation is `Z_γ − E Z_γ = Σ w_z(θ_z − m)`,
//! so `log E exp(ξγ⁻¹(Z_γ − E Z_γ)) = Σ_z 𝓛_Θ(ξw_z/γ) = 𝓛_γ(ξ)/γ` and
//! `𝓛_γ(ξ) → 𝓛(ξ) = ∫𝓛_Θ(ξW(q(s)))ds`.

use alloc::string::String;
use alloc::vec::Vec;
use libm::{exp, fabs, log, sqrt};
use serde::{Deserialize, Serialize};

use crate::exec::Executor;
use crate::media::{CellLaw, Lattice, Medium1D};
use crate::numeric::{log_cosh, wilson_interval, NeumaierSum, GL5_NODES, GL5_WEIGHTS};
use crate::profile::Profile;
use crate::rng::{derive_seed, streams, CounterRng};
use crate::solver::discrete::{GridProblem, Iterate, NewtonOptions};
use crate::wells::{optimal_profile, DoubleWell};
use crate::{Error, Result};

/// Law of `Θ` alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaLaw {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
    pub mean: f64,
}

impl ThetaLaw {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::EmptySupport);
        }
        if values.iter().chain(&probs).any(|v| !v.is_finite()) || probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidParameter("θ law needs finite values and nonnegative weights".into()));
        }
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptySupport);
        }
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let mean = values.iter().zip(&probs).map(|(v, p)| v * p).sum();
        Ok(ThetaLaw { values, probs, mean })
    }

    /// `θ`-marginal of a cell law, equal values merged.
    pub fn from_cell_law(law: &CellLaw) -> Self {
        let mut values: Vec<f64> = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        for at in law.atoms() {
            match values.iter().position(|&v| v == at.theta) {
                Some(k) => probs[k] += at.weight,
                None => {
                    values.push(at.theta);
                    probs.push(at.weight);
                }
            }
        }
        ThetaLaw::new(values, probs).expect("cell laws are valid")
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn symmetric_two_point(&self) -> Option<f64> {
        (self.values.len() == 2 && self.probs[0] == self.probs[1]).then(|| fabs(self.values[1] - self.values[0]))
    }

    /// `𝓛_Θ(ξ) = log E e^{ξ(Θ − m)}`; `log cosh(ξ(θ₂ − θ₁)/2)` for two
    /// equally likely values.
    pub fn log_mgf(&self, xi: f64) -> f64 {
        if let Some(d) = self.symmetric_two_point() {
            return log_cosh(0.5 * xi * d);
        }
        let top = self.values.iter().map(|v| xi * (v - self.mean)).fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self.values.iter().zip(&self.probs).map(|(v, p)| p * exp(xi * (v - self.mean) - top)).sum();
        top + log(s)
    }

    /// `𝓛_Θ′(ξ)`, the mean of `Θ − m` under the tilted law.
    pub fn log_mgf_slope(&self, xi: f64) -> f64 {
        if let Some(d) = self.symmetric_two_point() {
            return 0.5 * d * libm::tanh(0.5 * xi * d);
        }
        self.tilted(xi).iter().zip(&self.values).map(|(p, v)| p * (v - self.mean)).sum()
    }

    /// Probabilities proportional to `p_k e^{ξθ_k}`.
    pub fn tilted(&self, xi: f64) -> Vec<f64> {
        let top = self.values.iter().map(|v| xi * (v - self.mean)).fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.values.iter().zip(&self.probs).map(|(v, p)| p * exp(xi * (v - self.mean) - top)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }

    /// Hoeffding constant `((θ^* − θ_*)/2)²/2`.
    pub fn hoeffding(&self) -> f64 {
        let h = 0.5 * (self.max() - self.min());
        0.5 * h * h
    }
}

/// `sup_ξ (xξ − L(ξ))` for a convex `L` with `L(0) = 0`, given `L` and `L′`
/// and the asymptotic slopes `(L′(−∞), L′(+∞))`. Returns `(value, ξ*)`;
/// the value is `+∞` when `x` lies on or outside the slope range.
pub fn legendre<F: Fn(f64) -> (f64, f64)>(x: f64, l: F, slopes: (f64, f64)) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter("Legendre argument must be finite".into()));
    }
    if x <= slopes.0 || x >= slopes.1 {
        return Ok((f64::INFINITY, if x <= slopes.0 { f64::NEG_INFINITY } else { f64::INFINITY }));
    }
    let s0 = l(0.0).1;
    if x == s0 {
        return Ok((-l(0.0).0, 0.0));
    }
    let dir = if x < s0 { -1.0 } else { 1.0 };
    let mut b = 1.0;
    while (l(dir * b).1 - x) * dir < 0.0 {
        b *= 2.0;
        if b > 1e18 {
            return Err(Error::MaximizationNonConvergence);
        }
    }
    let (mut lo, mut hi) = if dir < 0.0 { (-b, 0.0) } else { (0.0, b) };
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if l(mid).1 < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xi = 0.5 * (lo + hi);
    if !(hi - lo <= 1e-12 * b) {
        return Err(Error::MaximizationNonConvergence);
    }
    Ok((x * xi - l(xi).0, xi))
}

/// Minimizer of `∫_{−r}^{r} ½u′² + θW(u)` with `u(±r) = q(±r)`, `q` the
/// optimal profile of `½u′² + W(u)`, on `elements` uniform elements.
pub fn window_profile(well: &DoubleWell, theta: f64, r: f64, elements: usize) -> Result<Profile> {
    if !(r > 0.0 && theta > 0.0 && elements >= 2) {
        return Err(Error::InvalidParameter("need r, θ > 0 and at least two elements".into()));
    }
    let q = optimal_profile(well, 1.0, 1.0)?;
    let nodes: Vec<f64> = (0..=elements).map(|i| -r + 2.0 * r * i as f64 / elements as f64).collect();
    let problem = GridProblem::homogeneous(nodes.clone(), 1.0, theta, 1.0, *well, q.eval(-r), q.eval(r))?;
    let init: Vec<f64> = nodes.iter().map(|&s| q.eval(s * sqrt(theta))).collect();
    let out = problem.newton(Iterate::from_values(&init), &NewtonOptions::default())?;
    Profile::new(nodes, out.iterate.to_values())
}

/// Gradient part and per-cell potential weights of `Z_γ` for a fixed
/// profile; macroscopic cell `z` is `γ·[left(z), left(z + 1))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowEnergy {
    pub gamma: f64,
    pub r: f64,
    pub lattice: Lattice,
    /// `∫½q′²`.
    pub gradient: f64,
    pub z_first: i64,
    /// `w_z = ∫_{cell z ∩ [−r, r]} W(q)`.
    pub weights: Vec<f64>,
}

impl WindowEnergy {
    pub fn new(q: &Profile, well: &DoubleWell, gamma: f64, r: f64, lattice: Lattice) -> Result<Self> {
        if !(gamma > 0.0 && r > 0.0) {
            return Err(Error::InvalidParameter("γ and r must be positive".into()));
        }
        let g = &q.grid;
        let tol = 1e-12 * r;
        if fabs(g[0] + r) > tol || fabs(g[g.len() - 1] - r) > tol {
            return Err(Error::InvalidParameter("profile must live on [−r, r]".into()));
        }
        let z_first = lattice.index(-r / gamma);
        let z_last = lattice.index(r / gamma);
        let mut sums = alloc::vec![NeumaierSum::default(); (z_last - z_first + 1) as usize];
        let mut grad = NeumaierSum::default();
        for e in 0..g.len() - 1 {
            let (s0, s1) = (g[e], g[e + 1]);
            let (u0, u1) = (q.values[e], q.values[e + 1]);
            let h = s1 - s0;
            grad.add(0.5 * (u1 - u0) * (u1 - u0) / h);
            let mut a = s0;
            let mut z = lattice.index(s0 / gamma).max(z_first);
            while a < s1 {
                let b = (gamma * lattice.left(z + 1)).min(s1);
                if b > a {
                    let mut acc = 0.0;
                    for k in 0..5 {
                        let s = a + GL5_NODES[k] * (b - a);
                        acc += GL5_WEIGHTS[k] * well.evaluate(u0 + (u1 - u0) * (s - s0) / h);
                    }
                    sums[(z.min(z_last) - z_first) as usize].add(acc * (b - a));
                }
                a = b;
                z += 1;
            }
        }
        while sums.len() > 1 && sums.last().unwrap().value() == 0.0 {
            sums.pop();
        }
        Ok(WindowEnergy {
            gamma,
            r,
            lattice,
            gradient: grad.value(),
            z_first,
            weights: sums.iter().map(|s| s.value()).collect(),
        })
    }

    pub fn z_last(&self) -> i64 {
        self.z_first + self.weights.len() as i64 - 1
    }

    /// `∫W(q)`.
    pub fn potential_integral(&self) -> f64 {
        let mut s = NeumaierSum::default();
        self.weights.iter().for_each(|&w| s.add(w));
        s.value()
    }

    /// `Z_γ` for cell values `θ(z)`.
    pub fn eval<F: FnMut(i64) -> f64>(&self, mut theta: F) -> f64 {
        let mut s = NeumaierSum::default();
        s.add(self.gradient);
        for (k, &w) in self.weights.iter().enumerate() {
            s.add(w * theta(self.z_first + k as i64));
        }
        s.value()
    }

    /// `Z_γ` for a constant medium `θ`.
    pub fn constant(&self, theta: f64) -> f64 {
        self.gradient + theta * self.potential_integral()
    }

    /// `𝓛_γ(ξ) = γΣ𝓛_Θ(ξw_z/γ)` and its derivative.
    pub fn cumulant(&self, law: &ThetaLaw, xi: f64) -> (f64, f64) {
        let (mut v, mut d) = (NeumaierSum::default(), NeumaierSum::default());
        for &w in &self.weights {
            let t = xi * w / self.gamma;
            v.add(self.gamma * law.log_mgf(t));
            d.add(w * law.log_mgf_slope(t));
        }
        (v.value(), d.value())
    }

    /// `𝓛_γ*(x)`.
    pub fn rate(&self, law: &ThetaLaw, x: f64) -> Result<(f64, f64)> {
        let iw = self.potential_integral();
        legendre(x, |xi| self.cumulant(law, xi), ((law.min() - law.mean) * iw, (law.max() - law.mean) * iw))
    }
}

/// `Z_γ` for the medium `θ(s/γ)` given in microscopic units.
pub fn window_energy_z(medium: &Medium1D, gamma: f64, r: f64, q_star: &Profile, well: &DoubleWell) -> Result<f64> {
    let we = WindowEnergy::new(q_star, well, gamma, r, medium.lattice)?;
    if medium.cell(we.z_first).is_none() || medium.cell(we.z_last()).is_none() {
        return Err(Error::WindowCoverage { lo: -r / gamma, hi: r / gamma });
    }
    Ok(we.eval(|z| medium.cell(z).unwrap().theta))
}

/// Gauss points of `W(q(s))` over the profile elements.
#[derive(Clone, Debug, PartialEq)]
struct PotentialQuadrature {
    values: Vec<f64>,
    weights: Vec<f64>,
    integral: f64,
}

impl PotentialQuadrature {
    fn new(q: &Profile, well: &DoubleWell) -> Self {
        let mut values = Vec::with_capacity(5 * q.len());
        let mut weights = Vec::with_capacity(5 * q.len());
        let mut total = NeumaierSum::default();
        for e in 0..q.len() - 1 {
            let h = q.grid[e + 1] - q.grid[e];
            for k in 0..5 {
                let u = q.values[e] + GL5_NODES[k] * (q.values[e + 1] - q.values[e]);
                let w = well.evaluate(u);
                values.push(w);
                weights.push(GL5_WEIGHTS[k] * h);
                total.add(GL5_WEIGHTS[k] * h * w);
            }
        }
        PotentialQuadrature { values, weights, integral: total.value() }
    }

    fn cumulant(&self, law: &ThetaLaw, xi: f64) -> (f64, f64) {
        let (mut v, mut d) = (NeumaierSum::default(), NeumaierSum::default());
        for (&w, &c) in self.values.iter().zip(&self.weights) {
            v.add(c * law.log_mgf(xi * w));
            d.add(c * w * law.log_mgf_slope(xi * w));
        }
        (v.value(), d.value())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdQuantities {
    pub r: f64,
    pub theta_law: ThetaLaw,
    pub q_star: Profile,
    /// `∫W(q*)`.
    pub potential_integral: f64,
    pub xi_grid: Vec<f64>,
    /// `𝓛_Θ` on the grid.
    pub log_mgf: Vec<f64>,
    /// `𝓛` on the grid.
    pub scaled_cumulant: Vec<f64>,
    pub hoeffding_holds: bool,
    pub convex: bool,
    /// `(λ, 𝓛*(−λ), ξ*)` for each requested deviation.
    pub rates: Vec<(f64, f64, f64)>,
    #[serde(skip)]
    quad: PotentialQuadrature,
}

impl LdQuantities {
    /// `(𝓛(ξ), 𝓛′(ξ))`.
    pub fn cumulant(&self, xi: f64) -> (f64, f64) {
        self.quad.cumulant(&self.theta_law, xi)
    }

    /// `(𝓛*(x), ξ*)`.
    pub fn rate_at(&self, x: f64) -> Result<(f64, f64)> {
        let iw = self.potential_integral;
        let law = &self.theta_law;
        legendre(x, |xi| self.cumulant(xi), ((law.min() - law.mean) * iw, (law.max() - law.mean) * iw))
    }

    /// `𝓛*(−λ)`.
    pub fn rate(&self, lambda: f64) -> Result<f64> {
        Ok(self.rate_at(-lambda)?.0)
    }
}

/// Tabulates `𝓛_Θ` and `𝓛` on `xi_grid`, checks the Hoeffding bound and
/// convexity there, and evaluates `𝓛*(−λ)` for each `λ ∈ lambda_devs`.
pub fn ld_rate_machinery(
    theta_law: &ThetaLaw,
    q_star: &Profile,
    well: &DoubleWell,
    r: f64,
    xi_grid: &[f64],
    lambda_devs: &[f64],
) -> Result<LdQuantities> {
    let n = xi_grid.len();
    if n < 3 || xi_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("ξ grid must be increasing with at least three points".into()));
    }
    if (0..n).any(|i| fabs(xi_grid[i] + xi_grid[n - 1 - i]) > 1e-12 * fabs(xi_grid[0])) {
        return Err(Error::InvalidParameter("ξ grid must be symmetric around 0".into()));
    }
    let g = &q_star.grid;
    if fabs(g[0] + r) > 1e-12 * r || fabs(g[g.len() - 1] - r) > 1e-12 * r {
        return Err(Error::InvalidParameter("profile must live on [−r, r]".into()));
    }
    let quad = PotentialQuadrature::new(q_star, well);
    let log_mgf: Vec<f64> = xi_grid.iter().map(|&x| theta_law.log_mgf(x)).collect();
    let scaled_cumulant: Vec<f64> = xi_grid.iter().map(|&x| quad.cumulant(theta_law, x).0).collect();
    let h = theta_law.hoeffding();
    let hoeffding_holds = xi_grid.iter().zip(&log_mgf).all(|(&x, &l)| l <= h * x * x * (1.0 + 1e-12) + 1e-300);
    let convex = [&log_mgf, &scaled_cumulant].iter().all(|v| {
        (1..n - 1).all(|i| {
            let (h0, h1) = (xi_grid[i] - xi_grid[i - 1], xi_grid[i + 1] - xi_grid[i]);
            let second = (v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0;
            second >= -1e-10
        })
    });
    let mut out = LdQuantities {
        r,
        theta_law: theta_law.clone(),
        q_star: q_star.clone(),
        potential_integral: quad.integral,
        xi_grid: xi_grid.to_vec(),
        log_mgf,
        scaled_cumulant,
        hoeffding_holds,
        convex,
        rates: Vec::new(),
        quad,
    };
    for &l in lambda_devs {
        let (v, xi) = out.rate_at(-l)?;
        out.rates.push((l, v, xi));
    }
    Ok(out)
}

/// One row of [`ld_rate_compare`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdRow {
    pub gamma: f64,
    /// `plain` or `tilted`.
    pub method: String,
    pub n: usize,
    pub hits: u64,
    pub p_hat: f64,
    pub std_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `γ log P̂`, `−∞` on zero hits.
    pub gamma_log_p: f64,
    /// `𝓛*(−λ)`.
    pub rate: f64,
    /// `𝓛_γ*(−λ)`.
    pub finite_rate: f64,
    /// `|γ log P̂ + 𝓛*(−λ)|/𝓛*(−λ)`.
    pub rel_error: f64,
    /// Tilt parameter `ξ` (zero for plain sampling).
    pub xi: f64,
    pub zero_hits: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdCompare {
    pub lambda_dev: f64,
    pub rate: f64,
    pub rows: Vec<LdRow>,
}

impl LdCompare {
    pub fn row(&self, gamma: f64, method: &str) -> Option<&LdRow> {
        self.rows.iter().find(|r| r.gamma == gamma && r.method == method)
    }
}

/// Deviations `Σ w_z(θ_z − m)` of `n` plain samples.
fn plain_deviations<E: Executor>(exec: &E, we: &WindowEnergy, law: &CellLaw, m: f64, n: usize, seed0: u64, tag: u64) -> Vec<f64> {
    exec.map(n, |i| {
        let mut rd = CounterRng::new(derive_seed(seed0, tag, i as u64), streams::CELLS).reader(we.z_first, 1);
        let mut s = NeumaierSum::default();
        for &w in &we.weights {
            s.add(w * (law.sample(rd.uniform()).theta - m));
        }
        s.value()
    })
}

/// Outcome of the `λ_dev` calibration pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaCalibration {
    pub gamma: f64,
    pub lambda_dev: f64,
    pub p_hat: f64,
    pub hits: u64,
    pub n: usize,
    pub iterations: u32,
}

/// Largest `λ` with `P̂{Z_γ − E Z_γ ≤ −λ} ≥ target` over `n` plain samples
/// at `gamma`, by bisection.
pub fn calibrate_lambda_dev<E: Executor>(
    exec: &E,
    law: &CellLaw,
    q_star: &Profile,
    well: &DoubleWell,
    r: f64,
    gamma: f64,
    n: usize,
    seed0: u64,
    target: f64,
) -> Result<LambdaCalibration> {
    if !(target > 0.0 && target < 1.0) || n == 0 {
        return Err(Error::InvalidParameter("target must lie in (0, 1) and n ≥ 1".into()));
    }
    let theta = ThetaLaw::from_cell_law(law);
    let we = WindowEnergy::new(q_star, well, gamma, r, Lattice::CENTERED)?;
    let dev = plain_deviations(exec, &we, law, theta.mean, n, seed0, 0x4341_0000);
    let freq = |l: f64| dev.iter().filter(|&&d| d <= -l).count();
    let need = libm::ceil(target * n as f64) as usize;
    let (mut lo, mut hi) = (0.0, -dev.iter().copied().fold(0.0, f64::min) + 1e-12);
    if freq(lo) < need {
        return Err(Error::Precondition("target frequency exceeds P̂{Z ≤ E Z}".into()));
    }
    let mut iterations = 0;
    while hi - lo > 1e-12 * hi.max(1.0) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if freq(mid) >= need {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let hits = freq(lo) as u64;
    Ok(LambdaCalibration { gamma, lambda_dev: lo, p_hat: hits as f64 / n as f64, hits, n, iterations })
}

/// Plain and exponentially tilted estimates of `P{Z_γ − E Z_γ ≤ −λ}` for
/// each `γ`. The tilted sampler draws `θ_z` from `p_k e^{t_zθ_k}` with
/// `t_z = ξ_γw_z/γ`, `ξ_γ` the maximizer of `𝓛_γ*(−λ)`, and reweights by
/// `exp(Σ𝓛_Θ(t_z) − Σt_z(θ_z − m))`. Cells follow the centered lattice.
#[allow(clippy::too_many_arguments)]
pub fn ld_rate_compare<E: Executor>(
    exec: &E,
    law: &CellLaw,
    q_star: &Profile,
    well: &DoubleWell,
    r: f64,
    gammas: &[f64],
    lambda_dev: f64,
    n_samples: usize,
    seed0: u64,
) -> Result<LdCompare> {
    if n_samples < 2 || !(lambda_dev >= 0.0) {
        return Err(Error::InvalidParameter("need n_samples ≥ 2 and λ_dev ≥ 0".into()));
    }
    let theta = ThetaLaw::from_cell_law(law);
    let xi0 = [-1.0, 0.0, 1.0];
    let ld = ld_rate_machinery(&theta, q_star, well, r, &xi0, &[lambda_dev])?;
    let rate = ld.rates[0].1;
    let rel = |glp: f64| if rate > 0.0 { fabs(glp + rate) / rate } else { fabs(glp) };
    let mut rows = Vec::new();
    for (gi, &gamma) in gammas.iter().enumerate() {
        let we = WindowEnergy::new(q_star, well, gamma, r, Lattice::CENTERED)?;
        let (finite_rate, xi) = we.rate(&theta, -lambda_dev)?;
        let nf = n_samples as f64;

        let dev = plain_deviations(exec, &we, law, theta.mean, n_samples, seed0, 0x4c44_0000 + gi as u64);
        let hits = dev.iter().filter(|&&d| d <= -lambda_dev).count() as u64;
        let p = hits as f64 / nf;
        let (ci_lo, ci_hi) = wilson_interval(hits, n_samples as u64, 1.96);
        let glp = if hits > 0 { gamma * log(p) } else { f64::NEG_INFINITY };
        rows.push(LdRow {
            gamma,
            method: "plain".into(),
            n: n_samples,
            hits,
            p_hat: p,
            std_error: sqrt(p * (1.0 - p) / nf),
            ci_lo,
            ci_hi,
            gamma_log_p: glp,
            rate,
            finite_rate,
            rel_error: rel(glp),
            xi: 0.0,
            zero_hits: hits == 0,
        });

        if !xi.is_finite() {
            continue;
        }
        // Per-cell tilted cumulative tables.
        let tilts: Vec<f64> = we.weights.iter().map(|w| xi * w / gamma).collect();
        let log_norm: f64 = tilts.iter().map(|&t| theta.log_mgf(t)).sum();
        let cdfs: Vec<Vec<f64>> = tilts
            .iter()
            .map(|&t| {
                let mut acc = 0.0;
                theta.tilted(t).into_iter().map(|p| {
                    acc += p;
                    acc
                }).collect()
            })
            .collect();
        let samples = exec.map(n_samples, |i| {
            let mut rd = CounterRng::new(derive_seed(seed0, 0x544c_0000 + gi as u64, i as u64), streams::CELLS).reader(we.z_first, 1);
            let (mut d, mut e) = (NeumaierSum::default(), NeumaierSum::default());
            for (k, &w) in we.weights.iter().enumerate() {
                let u = rd.uniform();
                let c = &cdfs[k];
                let j = c.partition_point(|&x| x <= u).min(c.len() - 1);
                let dv = theta.values[j] - theta.mean;
                d.add(w * dv);
                e.add(tilts[k] * dv);
            }
            if d.value() <= -lambda_dev {
                exp(log_norm - e.value())
            } else {
                0.0
            }
        });
        let hits = samples.iter().filter(|&&x| x > 0.0).count() as u64;
        let mean = samples.iter().sum::<f64>() / nf;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
        let se = sqrt(var / nf);
        let glp = if mean > 0.0 { gamma * log(mean) } else { f64::NEG_INFINITY };
        rows.push(LdRow {
            gamma,
            method: "tilted".into(),
            n: n_samples,
            hits,
            p_hat: mean,
            std_error: se,
            ci_lo: (mean - 1.96 * se).max(0.0),
            ci_hi: mean + 1.96 * se,
            gamma_log_p: glp,
            rate,
            finite_rate,
            rel_error: rel(glp),
            xi,
            zero_hits: hits == 0,
        });
    }
    Ok(LdCompare { lambda_dev, rate, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    fn two_point() -> CellLaw {
        CellLaw::product(&[1.0], &[1.0, 2.0]).unwrap()
    }

    #[test]
    fn log_cosh_closed_form() {
        let t = ThetaLaw::from_cell_law(&two_point());
        assert!((t.log_mgf(1.0) - 0.120_114_506_958_277_45).abs() < 1e-12);
        // Generic branch agrees with the closed form.
        let g = ThetaLaw { values: alloc::vec![1.0, 2.0, 2.0], probs: alloc::vec![0.5, 0.25, 0.25], mean: 1.5 };
        for xi in [-7.0, -1.0, 0.3, 4.0] {
            assert!((g.log_mgf(xi) - t.log_mgf(xi)).abs() < 1e-13);
            assert!((g.log_mgf_slope(xi) - t.log_mgf_slope(xi)).abs() < 1e-13);
        }
    }

    #[test]
    fn legendre_of_quadratic() {
        // L(ξ) = ξ²/2 has L*(x) = x²/2.
        let (v, xi) = legendre(-0.3, |x| (0.5 * x * x, x), (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        assert!((v - 0.045).abs() < 1e-12 && (xi + 0.3).abs() < 1e-10);
        assert_eq!(legendre(-2.0, |x| (log_cosh(x), libm::tanh(x)), (-1.0, 1.0)).unwrap().0, f64::INFINITY);
    }

    #[test]
    fn constant_theta_window_energy() {
        let well = DoubleWell::Quartic;
        let q = window_profile(&well, 1.5, 5.0, 2048).unwrap();
        let we = WindowEnergy::new(&q, &well, 0.1, 5.0, Lattice::CENTERED).unwrap();
        let direct: f64 = (0..q.len() - 1)
            .map(|e| {
                let h = q.grid[e + 1] - q.grid[e];
                let d = q.values[e + 1] - q.values[e];
                let pot: f64 = (0..5).map(|k| GL5_WEIGHTS[k] * well.evaluate(q.values[e] + GL5_NODES[k] * d)).sum();
                0.5 * d * d / h + 1.5 * pot * h
            })
            .sum();
        assert!((we.constant(1.5) - direct).abs() < 1e-8);
        assert_eq!(we.weights.len(), 101);
    }

    #[test]
    fn impossible_deviation_has_no_hits() {
        let well = DoubleWell::Quartic;
        let q = window_profile(&well, 1.5, 2.0, 256).unwrap();
        let cmp = ld_rate_compare(&Sequential, &two_point(), &q, &well, 2.0, &[0.5], 1e3, 50, 3).unwrap();
        assert_eq!(cmp.rows.len(), 1);
        assert_eq!(cmp.rows[0].hits, 0);
        assert_eq!(cmp.rate, f64::INFINITY);
    }
}
