//! Heavy-tailed lamp stripes. A lamp at site `m` has range `X_m` with
//! `P(X = k) ∝ |k|^{−(2+α)}` on `ℤ∖{0}` and lights every site `k` with
//! `|m − k| ≤ X_m`; lit sites carry `Θ = 1`, dark sites `Θ = 2`.

use alloc::vec;
use alloc::vec::Vec;
use libm::pow;
use serde::{Deserialize, Serialize};

use super::{Bounds, Cell, Lattice, Medium1D, MediumSpec};
use crate::numeric::hurwitz_zeta;
use crate::rng::{streams, CounterRng};
use crate::{Error, Result};

const TABLE_LEN: usize = 4096;

/// The range law `μ_α`.
#[derive(Clone, Debug)]
pub struct LampLaw {
    pub alpha: f64,
    s: f64,
    zeta: f64,
    /// `tail[n − 1] = H(s, n) = Σ_{j ≥ n} j^{−s}` for `n = 1..=TABLE_LEN + 1`.
    tail: Vec<f64>,
}

impl LampLaw {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        let s = 2.0 + alpha;
        let mut tail = vec![0.0; TABLE_LEN + 1];
        tail[TABLE_LEN] = hurwitz_zeta(s, TABLE_LEN as u64 + 1);
        for n in (1..=TABLE_LEN).rev() {
            tail[n - 1] = tail[n] + pow(n as f64, -s);
        }
        Ok(LampLaw { alpha, s, zeta: tail[0], tail })
    }

    /// Normalizer `Z_α = 2ζ(2 + α)`.
    pub fn normalizer(&self) -> f64 {
        2.0 * self.zeta
    }

    pub fn pmf(&self, k: i64) -> f64 {
        if k == 0 {
            0.0
        } else {
            pow(k.unsigned_abs() as f64, -self.s) / self.normalizer()
        }
    }

    /// `P(X ≥ n)` for `n ≥ 1`.
    pub fn upper_tail(&self, n: u64) -> f64 {
        self.hurwitz(n) / self.normalizer()
    }

    fn hurwitz(&self, n: u64) -> f64 {
        if n as usize <= TABLE_LEN + 1 {
            self.tail[n as usize - 1]
        } else {
            hurwitz_zeta(self.s, n)
        }
    }

    /// Draw from two uniforms: `u_sign < ½` gives a negative range, and
    /// `u_mag` is inverted through the tail `H(s, n)/ζ(s)`.
    pub fn sample(&self, u_sign: f64, u_mag: f64) -> i64 {
        let n = self.magnitude(u_mag) as i64;
        if u_sign < 0.5 {
            -n
        } else {
            n
        }
    }

    /// `|X|` is the `n` with `H(s, n + 1) < t ≤ H(s, n)`, `t = (1 − u)ζ`.
    fn magnitude(&self, u: f64) -> u64 {
        let t = (1.0 - u) * self.zeta;
        if t > self.tail[TABLE_LEN] {
            // tail is decreasing; count entries at or above t
            return self.tail.partition_point(|&h| h >= t) as u64;
        }
        let mut lo = TABLE_LEN as u64 + 1; // H(lo) ≥ t
        let mut hi = 2 * lo;
        while hurwitz_zeta(self.s, hi) >= t {
            lo = hi;
            if hi >= 1 << 50 {
                return hi;
            }
            hi *= 2;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if hurwitz_zeta(self.s, mid) >= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Expected number of lamps beyond distance `K` that reach a given
    /// site: `Σ_{m > K} P(X ≥ m) = [H(s−1, K+1) − K·H(s, K+1)] / Z_α`.
    pub fn ignored_illumination(&self, k: u64) -> f64 {
        let kf = k as f64;
        ((hurwitz_zeta(self.s - 1.0, k + 1) - kf * hurwitz_zeta(self.s, k + 1)) / self.normalizer()).max(0.0)
    }

    /// Smallest `K` with [`Self::ignored_illumination`]`(K) < tol`.
    pub fn padding_for(&self, tol: f64, max_pad: u64) -> Result<u64> {
        let mut hi = 1u64;
        while self.ignored_illumination(hi) >= tol {
            if hi > max_pad {
                return Err(Error::WindowTooSmall(alloc::format!(
                    "lamp padding for tolerance {tol:e} exceeds {max_pad} sites at alpha = {}",
                    self.alpha
                )));
            }
            hi *= 2;
        }
        let mut lo = 0u64;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.ignored_illumination(mid) < tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if hi > max_pad {
            return Err(Error::WindowTooSmall(alloc::format!("lamp padding {hi} exceeds {max_pad} sites")));
        }
        Ok(hi)
    }
}

/// Truncation settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LampOptions {
    /// Bound on the expected number of ignored lamps reaching a site.
    pub pad_tolerance: f64,
    pub max_pad: u64,
}

impl Default for LampOptions {
    fn default() -> Self {
        LampOptions { pad_tolerance: 1e-4, max_pad: 10_000_000 }
    }
}

/// Lamp ranges on `[window[0] − pad, window[1] + pad]` and the markers
/// `Θ_k ∈ {1, 2}` on the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LampStripe {
    pub alpha: f64,
    pub seed: u64,
    pub window: [i64; 2],
    pub first_lamp: i64,
    pub ranges: Vec<i64>,
    pub markers: Vec<u8>,
}

impl LampStripe {
    /// Markers from explicit ranges; `ranges[i]` belongs to site
    /// `first_lamp + i`. Lamps not listed are off.
    pub fn from_ranges(alpha: f64, window: [i64; 2], first_lamp: i64, ranges: Vec<i64>) -> Result<Self> {
        if window[1] < window[0] {
            return Err(Error::InvalidParameter("empty lamp window".into()));
        }
        let n = (window[1] - window[0] + 1) as usize;
        let mut diff = vec![0i64; n + 1];
        for (i, &x) in ranges.iter().enumerate() {
            if x < 1 {
                continue;
            }
            let m = first_lamp + i as i64;
            let lo = m.saturating_sub(x).max(window[0]);
            let hi = m.saturating_add(x).min(window[1]);
            if lo > hi {
                continue;
            }
            diff[(lo - window[0]) as usize] += 1;
            diff[(hi - window[0]) as usize + 1] -= 1;
        }
        let mut markers = Vec::with_capacity(n);
        let mut acc = 0i64;
        for d in &diff[..n] {
            acc += d;
            markers.push(if acc > 0 { 1 } else { 2 });
        }
        Ok(LampStripe { alpha, seed: 0, window, first_lamp, ranges, markers })
    }

    pub fn marker(&self, k: i64) -> Option<u8> {
        if k < self.window[0] {
            return None;
        }
        self.markers.get((k - self.window[0]) as usize).copied()
    }

    pub fn pad(&self) -> i64 {
        self.window[0] - self.first_lamp
    }

    /// `θ^stripe` as a medium on unit cells `[k, k + 1)` with `a ≡ 1`.
    pub fn to_medium(&self) -> Medium1D {
        let cells = self.markers.iter().map(|&m| Cell { a: 1.0, theta: m as f64 }).collect();
        Medium1D {
            spec: MediumSpec::Lamp { alpha: self.alpha, seed: self.seed, window: self.window },
            lattice: Lattice::SITES,
            z_min: self.window[0],
            cells,
            bounds: Bounds { a_min: 1.0, a_max: 1.0, theta_min: 1.0, theta_max: 2.0 },
        }
    }

    /// Flags `Θ_k = 1` over the window.
    pub fn lit(&self) -> Vec<bool> {
        self.markers.iter().map(|&m| m == 1).collect()
    }
}

/// Samples lamp ranges `X_m` for `m ∈ [window[0] − K, window[1] + K]`, with
/// `K` the padding from [`LampOptions`], and computes the markers. Range
/// `X_m` depends only on `(seed, m)`.
pub fn sample_lamp_stripe(seed: u64, alpha: f64, window: [i64; 2], opts: &LampOptions) -> Result<LampStripe> {
    let law = LampLaw::new(alpha)?;
    let pad = law.padding_for(opts.pad_tolerance, opts.max_pad)? as i64;
    sample_with_law(seed, &law, window, pad)
}

pub(crate) fn sample_with_law(seed: u64, law: &LampLaw, window: [i64; 2], pad: i64) -> Result<LampStripe> {
    if window[1] < window[0] {
        return Err(Error::InvalidParameter("empty lamp window".into()));
    }
    let first = window[0] - pad;
    let count = (window[1] + pad - first + 1) as usize;
    let mut reader = CounterRng::new(seed, streams::LAMPS).reader(first, 2);
    let mut ranges = Vec::with_capacity(count);
    for _ in 0..count {
        let u_sign = reader.uniform();
        let u_mag = reader.uniform();
        // Off lamps do not need their magnitude.
        ranges.push(if u_sign < 0.5 { -1 } else { law.sample(u_sign, u_mag) });
    }
    let mut stripe = LampStripe::from_ranges(law.alpha, window, first, ranges)?;
    stripe.seed = seed;
    Ok(stripe)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_normalizes() {
        let law = LampLaw::new(1.0).unwrap();
        let total: f64 = (1..200_000i64).map(|k| 2.0 * law.pmf(k)).sum::<f64>() + 2.0 * law.upper_tail(200_000);
        assert!((total - 1.0).abs() < 1e-12);
        assert!((law.upper_tail(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inversion_hits_the_table_boundaries() {
        let law = LampLaw::new(1.0).unwrap();
        assert_eq!(law.magnitude(0.0), 1);
        // u just above P(|X| = 1) gives 2.
        let p1 = 1.0 / law.zeta;
        assert_eq!(law.magnitude(p1 * 0.999), 1);
        assert_eq!(law.magnitude(p1 * 1.001), 2);
        let n = law.magnitude(1.0 - 1e-12);
        assert!(n > TABLE_LEN as u64);
        let t = (1.0 - (1.0 - 1e-12)) * law.zeta;
        assert!(hurwitz_zeta(3.0, n) >= t && hurwitz_zeta(3.0, n + 1) < t);
    }

    #[test]
    fn padding_meets_tolerance() {
        let law = LampLaw::new(1.0).unwrap();
        let k = law.padding_for(1e-4, 10_000_000).unwrap();
        assert!(law.ignored_illumination(k) < 1e-4);
        assert!(law.ignored_illumination(k - 1) >= 1e-4);
        let direct: f64 = (k + 1..k + 2_000_000).map(|m| law.upper_tail(m)).sum();
        assert!((direct - law.ignored_illumination(k)).abs() < 1e-6);
        assert!(LampLaw::new(0.01).unwrap().padding_for(1e-4, 1000).is_err());
    }
}
