//! Energy of the planar competitor `u(x) = q_*(ε⁻¹(x₁ − S))` in the cube
//! `Q_r = (−r/2, r/2)^d` for quasi one-dimensional media.

use alloc::vec;
use alloc::vec::Vec;
use libm::{ceil, floor, pow, sqrt};
use serde::{Deserialize, Serialize};

use crate::media::ProductMediumD;
use crate::numeric::{NeumaierSum, GL5_NODES, GL5_WEIGHTS};
use crate::rng::{derive_seed, CounterRng};
use crate::wells::{optimal_profile, DoubleWell, TransitionProfile};
use crate::{Error, Result};

/// Settings for the transverse average.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanarOptions {
    /// Monte-Carlo cells per column in `d = 3`.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for PlanarOptions {
    fn default() -> Self {
        PlanarOptions { mc_samples: 64, seed: 0 }
    }
}

/// Competitor energy and its parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarEnergy {
    pub energy: f64,
    /// Monte-Carlo standard error (zero for `d = 2`).
    pub std_error: f64,
    pub gradient_part: f64,
    pub potential_part: f64,
    /// `r^{d−1}σ_W`.
    pub reference: f64,
    /// `(1 + sup θ̃)·r^{d−1}·∫_{|s|>M} ½q_*′² + W(q_*)`, the bound on the
    /// energy outside the flat stretch.
    pub tail_bound: f64,
}

/// `∫_{|s| > m} ½q′² + W(q)` of a transition profile with coefficients
/// `(1, 1)`.
pub fn profile_tail_energy(q: &TransitionProfile, well: &DoubleWell, m: f64) -> f64 {
    let l = q.half_length();
    if m >= l {
        return 0.0;
    }
    let mut acc = NeumaierSum::default();
    let cells = ceil((l - m) * 64.0).max(1.0) as usize;
    let h = (l - m) / cells as f64;
    for side in [-1.0f64, 1.0] {
        for i in 0..cells {
            let a = m + i as f64 * h;
            for k in 0..5 {
                let s = side * (a + GL5_NODES[k] * h);
                let d = q.slope(s, well);
                acc.add(GL5_WEIGHTS[k] * h * (0.5 * d * d + well.evaluate(q.eval(s))));
            }
        }
    }
    acc.value()
}

/// Energy of `u(x) = q_*(ε⁻¹(x₁ − S))` on `Q_r` for `−r/2 + ε ≤ x₁ ≤ r/2 − ε`,
/// joined linearly to the datum `q(ε⁻¹x₁)` on the two ε-bands. Since `u`
/// depends on `x₁` only, the energy is
/// `r^{d−1}∫ε/2 u′² + ∫ε⁻¹ W(u(x₁))·θ^stripe(x₁/δ)·Θ̃(x₁) dx₁` with
/// `Θ̃(x₁)` the transverse integral of `θ̃(x/δ)`, summed exactly over
/// δ-cells for `d = 2` and sampled for `d = 3`.
///
/// Requires `θ^stripe ≡ 1` on `[S − Mε, S + Mε]`.
pub fn planar_competitor_energy_dd(
    medium: &ProductMediumD,
    well: &DoubleWell,
    epsilon: f64,
    delta: f64,
    r: f64,
    shift_s: f64,
    stretch_m: f64,
    opts: &PlanarOptions,
) -> Result<PlanarEnergy> {
    if !(epsilon > 0.0 && delta > 0.0 && r > 4.0 * epsilon) {
        return Err(Error::InvalidParameter("need ε, δ > 0 and r > 4ε".into()));
    }
    let half = 0.5 * r;
    let (a, b) = (-half + epsilon, half - epsilon);
    if !(shift_s - stretch_m * epsilon >= a && shift_s + stretch_m * epsilon <= b) {
        return Err(Error::StretchExitsDomain { lo: shift_s - stretch_m * epsilon, hi: shift_s + stretch_m * epsilon });
    }
    let d = medium.dim;
    let q_star = optimal_profile(well, 1.0, 1.0)?;
    let datum = |x: f64| super::boundary_shape(x / epsilon);
    let inner = |x: f64| q_star.eval((x - shift_s) / epsilon);
    let (ua, ub) = (inner(a), inner(b));
    let (da, db) = (datum(-half), datum(half));
    let u = |x: f64| {
        if x < a {
            da + (ua - da) * (x + half) / epsilon
        } else if x > b {
            ub + (db - ub) * (x - b) / epsilon
        } else {
            inner(x)
        }
    };

    // Flatness of the stripe on the stretch.
    let z_first = floor((shift_s - stretch_m * epsilon) / delta) as i64;
    let z_last = floor((shift_s + stretch_m * epsilon) / delta) as i64;
    let probe = |y: f64| medium.stripe.eval(y).ok_or(Error::WindowCoverage { lo: -half / delta, hi: half / delta });
    for z in z_first..=z_last {
        for t in [0.0, 0.5, 0.999_999] {
            if probe(z as f64 + t)? != 1.0 {
                return Err(Error::Precondition(alloc::format!("stripe not identically 1 near cell {z}")));
            }
        }
    }

    let r_pow = pow(r, (d - 1) as f64);
    // Gradient part: ramps exactly, interior by composite Gauss–Legendre.
    let mut grad = NeumaierSum::default();
    grad.add(0.5 * epsilon * (ua - da) * (ua - da) / epsilon);
    grad.add(0.5 * epsilon * (db - ub) * (db - ub) / epsilon);
    let cells = ceil((b - a) / (epsilon / 32.0)) as usize;
    let h = (b - a) / cells as f64;
    for i in 0..cells {
        let x0 = a + i as f64 * h;
        for k in 0..5 {
            let slope = q_star.slope((x0 + GL5_NODES[k] * h - shift_s) / epsilon, well) / epsilon;
            grad.add(GL5_WEIGHTS[k] * h * 0.5 * epsilon * slope * slope);
        }
    }
    let gradient_part = r_pow * grad.value();

    // Transverse integrals per column z₁ (in units of δ^{d−1}).
    let z1_lo = floor(-half / delta) as i64;
    let z1_hi = floor(half / delta) as i64;
    let ncol = (z1_hi - z1_lo + 1) as usize;
    let t_lo = -half / delta;
    let t_hi = half / delta;
    let zt_lo = floor(t_lo) as i64;
    let zt_hi = floor(t_hi) as i64;
    let overlap = |z: i64| ((z + 1) as f64).min(t_hi) - (z as f64).max(t_lo);
    let mut col_mean = vec![0.0; ncol];
    let mut col_var = vec![0.0; ncol];
    let trans_measure = pow(r, (d - 1) as f64);
    if d == 2 {
        let mut sums = vec![NeumaierSum::default(); ncol];
        for z2 in zt_lo..=zt_hi {
            let w = overlap(z2);
            if w <= 0.0 {
                continue;
            }
            let mut row = medium.transverse.row(z1_lo, z2, 0);
            for s in sums.iter_mut() {
                s.add(w * row.next_value());
            }
        }
        for (m, s) in col_mean.iter_mut().zip(&sums) {
            *m = s.value() * delta / r;
        }
    } else {
        let n = opts.mc_samples.max(2);
        let seed = derive_seed(opts.seed, 0x504c, 0);
        let g = CounterRng::new(seed, 0x504c);
        for (c, (m, v)) in col_mean.iter_mut().zip(col_var.iter_mut()).enumerate() {
            let z1 = z1_lo + c as i64;
            let mut rd = g.reader(z1, 2 * n as u32);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let y2 = t_lo + (t_hi - t_lo) * rd.uniform();
                let y3 = t_lo + (t_hi - t_lo) * rd.uniform();
                let val = medium.transverse.cell(z1, floor(y2) as i64, floor(y3) as i64);
                s1 += val;
                s2 += val * val;
            }
            let mean = s1 / n as f64;
            *m = mean;
            *v = ((s2 / n as f64 - mean * mean).max(0.0)) * n as f64 / (n as f64 - 1.0) / n as f64;
        }
    }

    // Potential part, column by column, split at the ramp kinks.
    let mut pot = NeumaierSum::default();
    let mut var = 0.0;
    let sub = ceil(delta / (epsilon / 16.0)).max(1.0) as usize;
    for c in 0..ncol {
        let z1 = z1_lo + c as i64;
        let lo = (z1 as f64 * delta).max(-half);
        let hi = ((z1 + 1) as f64 * delta).min(half);
        if hi <= lo {
            continue;
        }
        let mut breaks: Vec<f64> = vec![lo];
        for k in [a, b] {
            if k > lo && k < hi {
                breaks.push(k);
            }
        }
        breaks.push(hi);
        let mut col = 0.0;
        for seg in breaks.windows(2) {
            let hs = (seg[1] - seg[0]) / sub as f64;
            for j in 0..sub {
                let x0 = seg[0] + j as f64 * hs;
                for k in 0..5 {
                    let x = x0 + GL5_NODES[k] * hs;
                    col += GL5_WEIGHTS[k] * hs * well.evaluate(u(x)) * probe(x / delta)?;
                }
            }
        }
        let scale = col / epsilon * trans_measure;
        pot.add(scale * col_mean[c]);
        var += scale * scale * col_var[c];
    }
    let potential_part = pot.value();
    let sigma = crate::wells::sigma_w(well, crate::wells::SigmaMethod::Equipartition)?;
    let theta_sup = 1.0 + medium.transverse.h;
    Ok(PlanarEnergy {
        energy: gradient_part + potential_part,
        std_error: sqrt(var),
        gradient_part,
        potential_part,
        reference: r_pow * sigma * sqrt(medium.stripe.minimum()),
        tail_bound: (1.0 + theta_sup) * r_pow * profile_tail_energy(&q_star, well, stretch_m),
    })
}
