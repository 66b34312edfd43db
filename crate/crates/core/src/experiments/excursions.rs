//! Macroscopic excursions of a Liouville stripe.
//!
//! On band `N`, `ε ∈ (ε_{N+1}, ε_N]` with `ε_N = ϱ/(2N·3^N)`, the rule sets
//! `δ(ε) = ε/μ_N` with `μ_N = T_N/(2N)`. An excursion of `f_x` of microscopic
//! length `T_N/2` then has macroscopic length `δT_N/2 = Nε`, and the search
//! for it from `s = −ϱ/δ` ends within `T_N·3^N` microscopic units, i.e.
//! within `2ϱ` macroscopically.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use libm::pow;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::media::{LiouvilleStripe, RationalPoint};
use crate::{Error, Result};

/// Band rule `ε ↦ δ(ε)` adapted to the stripe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleEpsRule {
    pub rho: f64,
    /// `T_N` for `N = 1, …, N_max`.
    pub times: Vec<f64>,
}

impl LiouvilleEpsRule {
    pub fn new(stripe: &LiouvilleStripe, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidParameter("ϱ must be positive".into()));
        }
        let times = (1..=stripe.n_max as u32).map(|n| Ok(stripe.excursion_time(n)?.value)).collect::<Result<_>>()?;
        Ok(LiouvilleEpsRule { rho, times })
    }

    pub fn n_max(&self) -> u32 {
        self.times.len() as u32
    }

    /// `ε_N = ϱ/(2N·3^N)`.
    pub fn eps_band(&self, n: u32) -> f64 {
        self.rho / (2.0 * n as f64 * pow(3.0, n as f64))
    }

    /// `μ_N = T_N/(2N)`.
    pub fn mu(&self, n: u32) -> f64 {
        self.times[n as usize - 1] / (2.0 * n as f64)
    }

    /// Band containing `ε`, if covered by the stored convergents.
    pub fn band(&self, eps: f64) -> Option<u32> {
        (1..=self.n_max()).find(|&n| eps <= self.eps_band(n) && eps > self.eps_band(n + 1))
    }

    pub fn delta(&self, eps: f64) -> Option<f64> {
        self.band(eps).map(|n| eps / self.mu(n))
    }
}

/// Stripe under test.
#[derive(Clone, Copy, Debug)]
pub enum ExcursionStripe<'a> {
    /// `f ≡ value`.
    Constant(f64),
    Liouville { stripe: &'a LiouvilleStripe, x: &'a RationalPoint },
}

/// Search at one `ε` on band `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcursionCase {
    pub m: u32,
    pub n: u32,
    pub eps: f64,
    pub delta: f64,
    /// Macroscopic start `s_{ε,M}`.
    pub s: Option<f64>,
    /// Exact microscopic start.
    pub s_micro_exact: Option<String>,
    /// Macroscopic length `δT_N/2` of the certified excursion.
    pub excursion_length: Option<f64>,
    /// Microscopic probe points certified inside the strip.
    pub probes: Vec<f64>,
    pub ok: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MThreshold {
    pub m: u32,
    /// Every tested `ε ≤ threshold` admits `s` with `f ≡ 1` on
    /// `[s, s + Mε] ⊂ [−ϱ, ϱ]`; `+∞` for the constant stripe, `None` when
    /// no band could be verified.
    pub threshold: Option<f64>,
    /// Smallest band edge reached, `ε_{N_max + 1}`.
    pub verified_down_to: f64,
    pub cases: Vec<ExcursionCase>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcursionReport {
    pub rho: f64,
    pub rows: Vec<MThreshold>,
}

impl ExcursionReport {
    /// Thresholds are nonincreasing in `M`, counting `None` as zero.
    pub fn thresholds_decrease(&self) -> bool {
        let t: Vec<f64> = self.rows.iter().map(|r| r.threshold.unwrap_or(0.0)).collect();
        self.rows.windows(2).zip(t.windows(2)).all(|(r, t)| r[1].m < r[0].m || t[1] <= t[0])
    }
}

fn search(stripe: &LiouvilleStripe, x: &RationalPoint, rule: &LiouvilleEpsRule, m: u32, n: u32, eps: f64) -> ExcursionCase {
    let delta = eps / rule.mu(n);
    let mut case = ExcursionCase {
        m,
        n,
        eps,
        delta,
        s: None,
        s_micro_exact: None,
        excursion_length: None,
        probes: Vec::new(),
        ok: false,
        error: None,
    };
    let run = || -> Result<_> {
        let from = BigRational::from_float(-rule.rho / delta).ok_or(Error::InvalidParameter("non-finite start".into()))?;
        let speed = stripe.speed(n)?;
        let budget = 1.0 / speed.lo.to_f64().unwrap_or(0.0);
        stripe.locate_excursion_from(x, n, &from, budget)
    };
    match run() {
        Ok(exc) => {
            let s = delta * exc.s;
            let len = delta * exc.length;
            case.s = Some(s);
            case.s_micro_exact = Some(exc.s_exact);
            case.excursion_length = Some(len);
            case.probes = exc.probes;
            let end = s + m as f64 * eps;
            if m as f64 * eps > len {
                case.error = Some(alloc::format!("excursion length {len:e} shorter than Mε = {:e}", m as f64 * eps));
            } else if s < -rule.rho || end > rule.rho {
                case.error = Some(alloc::format!("interval [{s}, {end}] leaves [−ϱ, ϱ]"));
            } else {
                case.ok = true;
            }
        }
        Err(e) => case.error = Some(e.to_string()),
    }
    case
}

/// For each `M`, runs the exact search on every band `N ∈ [M, N_max]` at
/// `ε ∈ {ε_N, √(ε_Nε_{N+1}), ε_{N+1}(1 + 10⁻⁹)}` and reports `ε_M` as the
/// threshold when all succeed.
pub fn liouville_excursion_experiment(source: ExcursionStripe<'_>, rho: f64, m_list: &[u32]) -> Result<ExcursionReport> {
    if m_list.iter().any(|&m| m == 0) {
        return Err(Error::InvalidParameter("M must be positive".into()));
    }
    let (stripe, x) = match source {
        ExcursionStripe::Constant(v) => {
            let threshold = if v == 1.0 { Some(f64::INFINITY) } else { None };
            let rows = m_list.iter().map(|&m| MThreshold { m, threshold, verified_down_to: 0.0, cases: Vec::new() }).collect();
            return Ok(ExcursionReport { rho, rows });
        }
        ExcursionStripe::Liouville { stripe, x } => (stripe, x),
    };
    if stripe.n_max < 2 {
        return Err(Error::InvalidParameter("stripe needs N_max ≥ 2".into()));
    }
    let rule = LiouvilleEpsRule::new(stripe, rho)?;
    let n_max = rule.n_max();
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let mut cases = Vec::new();
        for n in m..=n_max {
            let (hi, lo) = (rule.eps_band(n), rule.eps_band(n + 1));
            for eps in [hi, libm::sqrt(hi * lo), lo * (1.0 + 1e-9)] {
                cases.push(search(stripe, x, &rule, m, n, eps));
            }
        }
        let threshold = if !cases.is_empty() && cases.iter().all(|c| c.ok) { Some(rule.eps_band(m)) } else { None };
        if m > n_max {
            cases.push(ExcursionCase {
                m,
                n: n_max,
                eps: rule.eps_band(n_max),
                delta: rule.eps_band(n_max) / rule.mu(n_max),
                s: None,
                s_micro_exact: None,
                excursion_length: None,
                probes: Vec::new(),
                ok: false,
                error: Some(Error::SearchBudgetExhausted(alloc::format!("M = {m} needs bands beyond N_max = {n_max}")).to_string()),
            });
        }
        rows.push(MThreshold { m, threshold, verified_down_to: rule.eps_band(n_max + 1), cases });
    }
    Ok(ExcursionReport { rho, rows })
}
