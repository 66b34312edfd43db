//! Tail probabilities of `Sub_0(r)`, `Osc_0(r)` and the scale conditions
//! built on them.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use libm::{exp, floor, log, log2, pow};
use serde::{Deserialize, Serialize};

use super::{osc_quantity, sub_quantity, HomogenizedConstants};
use crate::exec::Executor;
use crate::media::{sample_checkerboard, CellLaw, Lattice};
use crate::numeric::{wilson_interval, LineFit};
use crate::rng::derive_seed;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailQuantity {
    Sub,
    Osc,
}

impl TailQuantity {
    pub fn name(&self) -> &'static str {
        match self {
            TailQuantity::Sub => "sub",
            TailQuantity::Osc => "osc",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            TailQuantity::Sub => 0x5375,
            TailQuantity::Osc => 0x4f73,
        }
    }
}

/// One row of a tail table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub quantity: TailQuantity,
    pub r: f64,
    pub nu: f64,
    pub n: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed0: u64,
}

impl TailEstimate {
    /// Frequency of `value > ν` with a 95% Wilson interval.
    pub fn from_samples(quantity: TailQuantity, r: f64, nu: f64, samples: &[f64], seed0: u64) -> Self {
        let hits = samples.iter().filter(|&&v| v > nu).count() as u64;
        let n = samples.len() as u64;
        let (ci_lo, ci_hi) = wilson_interval(hits, n, 1.96);
        TailEstimate { quantity, r, nu, n, hits, p_hat: hits as f64 / n.max(1) as f64, ci_lo, ci_hi, seed0 }
    }
}

/// `quantity_0(r)` (truncated at `R_max`) for samples `0..n` of the
/// checkerboard with law `law`; sample `i` uses seed
/// `derive_seed(seed0, tag, i)`, so windows are shared across radii.
pub fn quantity_samples<E: Executor>(
    exec: &E,
    quantity: TailQuantity,
    law: &CellLaw,
    r: f64,
    r_max: f64,
    n: usize,
    seed0: u64,
) -> Result<Vec<f64>> {
    let consts = HomogenizedConstants::from_law(law);
    let lat = Lattice::CENTERED;
    let window = [lat.index(-0.5 * r_max) - 1, lat.index(0.5 * r_max) + 1];
    exec.map(n, |i| {
        let m = sample_checkerboard(derive_seed(seed0, quantity.tag(), i as u64), window, law)?;
        match quantity {
            TailQuantity::Sub => sub_quantity(&m, 0.0, r, r_max, consts.a_bar),
            TailQuantity::Osc => osc_quantity(&m, 0.0, r, r_max, consts.theta_bar),
        }
    })
    .into_iter()
    .collect()
}

/// Monte-Carlo estimate of `P{quantity_0(r) > ν}`.
#[allow(clippy::too_many_arguments)]
pub fn tail_probability<E: Executor>(
    exec: &E,
    quantity: TailQuantity,
    law: &CellLaw,
    r: f64,
    r_max: f64,
    nu: f64,
    n_samples: usize,
    seed0: u64,
) -> Result<TailEstimate> {
    if n_samples < 100 {
        return Err(Error::InvalidParameter("tail estimates need at least 100 samples".into()));
    }
    let v = quantity_samples(exec, quantity, law, r, r_max, n_samples, seed0)?;
    Ok(TailEstimate::from_samples(quantity, r, nu, &v, seed0))
}

/// Outcome of the threshold search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuCalibration {
    pub nu: f64,
    pub iterations: u32,
    /// `P̂` at each radius, in input order.
    pub p_hats: Vec<f64>,
    /// Whether every `P̂` lies in `[p_lo, p_hi]`.
    pub in_range: bool,
}

/// Bisection for the largest `ν` with `P̂_last(ν) ≥ target`, where the last
/// sample set belongs to the largest radius; `P̂` is then checked against
/// `[p_lo, p_hi]` at every radius.
pub fn calibrate_nu(samples_by_r: &[Vec<f64>], target: f64, p_lo: f64, p_hi: f64) -> Result<NuCalibration> {
    let last = samples_by_r.last().filter(|v| !v.is_empty()).ok_or(Error::InvalidParameter("no samples".into()))?;
    let freq = |v: &[f64], nu: f64| v.iter().filter(|&&x| x > nu).count() as f64 / v.len() as f64;
    let mut lo = 0.0;
    let mut hi = last.iter().fold(0.0f64, |m, v| m.max(*v));
    let mut iterations = 0;
    if freq(last, lo) < target {
        hi = lo;
    }
    while hi - lo > 1e-12 * hi.max(1e-300) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if freq(last, mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let p_hats: Vec<f64> = samples_by_r.iter().map(|v| freq(v, lo)).collect();
    let in_range = p_hats.iter().all(|p| (p_lo..=p_hi).contains(p));
    Ok(NuCalibration { nu: lo, iterations, p_hats, in_range })
}

/// `P(r) = C·exp(−c·r^d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub c_const: f64,
    pub rate: f64,
    pub dim: u32,
}

impl TailModel {
    /// From a line fit of `−log P̂` against `r^d`.
    pub fn from_fit(fit: &LineFit, dim: u32) -> Self {
        TailModel { c_const: exp(-fit.intercept), rate: fit.slope, dim }
    }

    pub fn log_p(&self, r: f64) -> f64 {
        if self.c_const <= 0.0 {
            return f64::NEG_INFINITY;
        }
        log(self.c_const) - self.rate * pow(r, self.dim as f64)
    }
}

/// Step rule `δ(ε) = ε/R_j` for `2^{−(j+1)/(2d)} ≤ ε < 2^{−j/(2d)}`,
/// `j = 1, …, J` (the first band also covers larger ε).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandScale {
    pub dim: u32,
    /// `radii[j − 1] = R_j`.
    pub radii: Vec<f64>,
}

impl BandScale {
    pub fn band(&self, eps: f64) -> Option<usize> {
        if !(eps > 0.0) {
            return None;
        }
        let j = floor(-2.0 * self.dim as f64 * log2(eps) + 1e-9).max(1.0) as usize;
        (j <= self.radii.len()).then_some(j)
    }

    pub fn delta(&self, eps: f64) -> Option<f64> {
        self.band(eps).map(|j| eps / self.radii[j - 1])
    }

    /// One ε per band, `2^{−(j+½)/(2d)}`, decreasing.
    pub fn band_grid(&self) -> Vec<f64> {
        let d2 = 2.0 * self.dim as f64;
        (1..=self.radii.len()).map(|j| pow(2.0, -(j as f64 + 0.5) / d2)).collect()
    }
}

/// Families `ε ↦ δ(ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Scaling {
    /// `δ = c·ε^β`.
    Power {
        beta: f64,
        #[serde(default = "one")]
        prefactor: f64,
    },
    /// `δ = ε/(k·log(1/ε))`.
    EpsOverLog { k: f64 },
    /// `δ = ε/c`.
    EpsOverConst { c: f64 },
    Bands(BandScale),
    /// `δ = factor·inner(ε)`.
    Scaled { factor: f64, inner: Box<Scaling> },
}

fn one() -> f64 {
    1.0
}

impl Scaling {
    pub fn delta(&self, eps: f64) -> Option<f64> {
        let d = match self {
            Scaling::Power { beta, prefactor } => prefactor * pow(eps, *beta),
            Scaling::EpsOverLog { k } => eps / (k * log(1.0 / eps)),
            Scaling::EpsOverConst { c } => eps / c,
            Scaling::Bands(b) => b.delta(eps)?,
            Scaling::Scaled { factor, inner } => factor * inner.delta(eps)?,
        };
        (d > 0.0 && d.is_finite()).then_some(d)
    }

    pub fn label(&self) -> String {
        match self {
            Scaling::Power { beta, prefactor } if *prefactor == 1.0 => alloc::format!("eps^{beta}"),
            Scaling::Power { beta, prefactor } => alloc::format!("{prefactor}*eps^{beta}"),
            Scaling::EpsOverLog { k } => alloc::format!("eps/({k}*log(1/eps))"),
            Scaling::EpsOverConst { c } => alloc::format!("eps/{c}"),
            Scaling::Bands(b) => alloc::format!("bands({})", b.radii.len()),
            Scaling::Scaled { factor, inner } => alloc::format!("{factor}*{}", inner.label()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleVerdict {
    Vanishing,
    Diverging,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub eps: f64,
    pub delta: f64,
    /// `ε/δ(ε)`.
    pub ratio: f64,
    /// `log(ε^{−d}P(ε/δ))`.
    pub log_value: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleCheck {
    pub rows: Vec<ScaleRow>,
    pub verdict: ScaleVerdict,
}

/// `ε^{−d}P(ε/δ(ε))` on a decreasing grid; the verdict reads the trend of
/// the last five values (monotone decrease: vanishing, increase: diverging).
pub fn check_scale_condition(model: &TailModel, scaling: &Scaling, eps_grid: &[f64]) -> Result<ScaleCheck> {
    if eps_grid.len() < 2 || eps_grid.windows(2).any(|w| !(w[1] < w[0])) || eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("eps grid must be positive and strictly decreasing".into()));
    }
    let d = model.dim as f64;
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let delta = scaling
            .delta(eps)
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("scaling {} undefined at eps = {eps}", scaling.label())))?;
        let ratio = eps / delta;
        let log_value = -d * log(eps) + model.log_p(ratio);
        rows.push(ScaleRow { eps, delta, ratio, log_value, value: exp(log_value) });
    }
    let tail: Vec<f64> = rows[rows.len().saturating_sub(5)..].iter().map(|r| r.log_value).collect();
    let verdict = if tail.iter().all(|v| *v == f64::NEG_INFINITY) {
        ScaleVerdict::Vanishing
    } else if tail.windows(2).all(|w| w[1] < w[0]) {
        ScaleVerdict::Vanishing
    } else if tail.windows(2).all(|w| w[1] > w[0]) {
        ScaleVerdict::Diverging
    } else {
        ScaleVerdict::Inconclusive
    };
    Ok(ScaleCheck { rows, verdict })
}

/// For `j = 1..=j_max`, `R_j` is the smallest ladder radius `R ≥ j` with
/// `P̂{Sub_0(R) > 2^{−j}} ≤ 2^{−j}` and `P̂{Osc_0(R) > 2^{−j}} ≤ 2^{−j}`;
/// `p_sub(k, ν)`, `p_osc(k, ν)` give the estimates at `ladder[k]`.
pub fn construct_admissible_scale<S, O>(ladder: &[f64], p_sub: S, p_osc: O, dim: u32, j_max: u32) -> Result<BandScale>
where
    S: Fn(usize, f64) -> f64,
    O: Fn(usize, f64) -> f64,
{
    if ladder.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("radius ladder must increase".into()));
    }
    let mut radii = Vec::with_capacity(j_max as usize);
    for j in 1..=j_max {
        let level = pow(2.0, -(j as f64));
        let found = ladder
            .iter()
            .enumerate()
            .find(|&(k, &r)| r >= j as f64 && p_sub(k, level) <= level && p_osc(k, level) <= level)
            .map(|(_, &r)| r);
        match found {
            Some(r) => radii.push(r),
            None => return Err(Error::LadderExhausted(j)),
        }
    }
    Ok(BandScale { dim, radii })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(c: f64) -> TailModel {
        TailModel { c_const: c, rate: 1.0, dim: 1 }
    }

    fn grid() -> Vec<f64> {
        (0..10).map(|k| 0.1 - 0.01 * k as f64).collect()
    }

    #[test]
    fn power_scaling_vanishes() {
        let s = Scaling::Power { beta: 2.0, prefactor: 1.0 };
        let c = check_scale_condition(&model(1.0), &s, &grid()).unwrap();
        assert_eq!(c.verdict, ScaleVerdict::Vanishing);
        let r = &c.rows[0];
        assert!((r.value - 10.0 * exp(-10.0)).abs() < 1e-15);
    }

    #[test]
    fn half_log_scaling_diverges() {
        let s = Scaling::EpsOverLog { k: 0.5 };
        let c = check_scale_condition(&model(1.0), &s, &grid()).unwrap();
        assert_eq!(c.verdict, ScaleVerdict::Diverging);
        for r in &c.rows {
            assert!((r.value - pow(r.eps, -0.5)).abs() < 1e-9 * r.value);
        }
    }

    #[test]
    fn zero_tail_vanishes() {
        let s = Scaling::EpsOverConst { c: 1.0 };
        assert_eq!(check_scale_condition(&model(0.0), &s, &grid()).unwrap().verdict, ScaleVerdict::Vanishing);
    }

    #[test]
    fn bands_from_models() {
        let ladder: Vec<f64> = (1..=200).map(f64::from).collect();
        let zero = construct_admissible_scale(&ladder, |_, _| 0.0, |_, _| 0.0, 1, 12).unwrap();
        assert_eq!(zero.radii, (1..=12).map(f64::from).collect::<Vec<_>>());
        let e = |k: usize, _nu: f64| exp(-ladder[k]);
        let s = construct_admissible_scale(&ladder, e, e, 1, 12).unwrap();
        assert_eq!(s.radii, zero.radii);
        let grid = s.band_grid();
        let m = model(1.0);
        assert_eq!(check_scale_condition(&m, &Scaling::Bands(s.clone()), &grid).unwrap().verdict, ScaleVerdict::Vanishing);
        let half = Scaling::Scaled { factor: 0.5, inner: Box::new(Scaling::Bands(s.clone())) };
        assert_eq!(check_scale_condition(&m, &half, &grid).unwrap().verdict, ScaleVerdict::Vanishing);
        assert_eq!(s.band(0.8), Some(1));
        assert_eq!(s.band(pow(2.0, -12.5 / 2.0)), Some(12));
        assert_eq!(s.band(pow(2.0, -13.5 / 2.0)), None);
        let short: Vec<f64> = ladder[..5].to_vec();
        assert_eq!(construct_admissible_scale(&short, |_, _| 0.0, |_, _| 0.0, 1, 8), Err(Error::LadderExhausted(6)));
    }
}
