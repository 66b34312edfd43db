//! Quasi-periodic stripes from the base-2 Liouville constant
//! `λ = Σ_{k≥1} 2^{−k!}`.
//!
//! The convergents are `q_N = 2^{N!}` and `p_N = Σ_{k≤N} 2^{N!−k!}`. With
//! `e_N = (−p_N, q_N)/√(p_N² + q_N²)` and `R_N = (p_N² + q_N²)^{−1/2}`, the
//! transverse coordinate of a torus point in units of `R_N` is
//! `x·e_N / R_N = −p_N x₁ + q_N x₂`. The strip `E_N` (width `R_N/3^N`) is
//! therefore
//!
//! ```text
//! E_N = { x : frac(−p_N x₁ + q_N x₂) ∈ [m_N/3^N, (m_N + 1)/3^N] }
//! ```
//!
//! and `Ẽ_N` is its first half. Along the line `x + sη`, `η = (1, λ)/√(1+λ²)`,
//! the coordinate moves at speed `ρ_N = (q_N λ − p_N)/√(1+λ²) > 0`, so a strip
//! is crossed in time `T_N = 3^{−N}/ρ_N`.
//!
//! All membership decisions use exact rationals: `λ` is enclosed between its
//! truncation at `K = N_max + 2` terms and that truncation plus the tail bound
//! `2^{1−(K+1)!}`, and square roots are enclosed with integer square roots.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rng::{streams, CounterRng};
use crate::{Error, Result};

/// Largest supported `N_max`; `q_5 = 2^{120}` would still fit, but the
/// search and probe arithmetic is budgeted for `N ≤ 4`.
pub const N_MAX_LIMIT: usize = 4;
/// Bits of precision for square-root enclosures.
const SQRT_BITS: u64 = 300;

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

fn pow3(n: u32) -> BigInt {
    num_traits::pow(BigInt::from(3u32), n as usize)
}

/// Closed rational interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Enclosure {
    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))).to_f64().unwrap_or(f64::NAN)
    }

    /// Relative width `(hi − lo)/|lo|`.
    pub fn relative_width(&self) -> f64 {
        ((&self.hi - &self.lo) / self.lo.abs()).to_f64().unwrap_or(f64::INFINITY)
    }

    /// Product of two positive enclosures.
    fn mul_pos(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo * &other.lo, hi: &self.hi * &other.hi }
    }

    /// `c / self` for a positive enclosure and `c > 0`.
    fn recip_scaled(&self, c: &BigRational) -> Enclosure {
        Enclosure { lo: c / &self.hi, hi: c / &self.lo }
    }
}

/// `√y` for `y > 0`, enclosed to `bits` binary digits.
fn sqrt_bounds(y: &BigRational, bits: u64) -> (BigRational, BigRational) {
    let a = y.numer();
    let b = y.denom();
    let s = ((a * b) << (2 * bits)).sqrt();
    let den = b << bits;
    (BigRational::new(s.clone(), den.clone()), BigRational::new(s + 1, den))
}

/// `λ` enclosed using `k` explicit terms.
pub fn lambda_enclosure(k: u32) -> Enclosure {
    let d = factorial(k as u64);
    let mut num = BigInt::zero();
    for j in 1..=k as u64 {
        num += pow2(d - factorial(j));
    }
    let lo = BigRational::new(num, pow2(d));
    let tail = BigRational::new(BigInt::one(), pow2(factorial(k as u64 + 1) - 1));
    Enclosure { hi: &lo + tail, lo }
}

/// `(1 + λ²)^{−1/2}` enclosed.
fn direction_scale(lambda: &Enclosure) -> Enclosure {
    let one = BigRational::one();
    let (lo_sqrt, _) = sqrt_bounds(&(&one + &lambda.lo * &lambda.lo), SQRT_BITS);
    let (_, hi_sqrt) = sqrt_bounds(&(&one + &lambda.hi * &lambda.hi), SQRT_BITS);
    Enclosure { lo: &one / hi_sqrt, hi: &one / lo_sqrt }
}

mod decimal {
    use alloc::string::{String, ToString};
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<BigUint>().map_err(serde::de::Error::custom)
    }
}

/// One stored convergent `p_N/q_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub n: u32,
    #[serde(with = "decimal")]
    pub p: BigUint,
    #[serde(with = "decimal")]
    pub q: BigUint,
}

impl Convergent {
    /// `p_N/q_N` for the base-2 Liouville constant.
    pub fn liouville(n: u32) -> Self {
        let d = factorial(n as u64);
        let mut p = BigUint::zero();
        for j in 1..=n as u64 {
            p += BigUint::one() << (d - factorial(j));
        }
        Convergent { n, p, q: BigUint::one() << d }
    }

    pub fn ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p.clone()), BigInt::from(self.q.clone()))
    }

    /// `R_N = (p² + q²)^{−1/2}` in floating point.
    pub fn gap(&self) -> f64 {
        let p = self.p.to_f64().unwrap();
        let q = self.q.to_f64().unwrap();
        1.0 / libm::hypot(p, q)
    }
}

/// Torus point with rational coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalPoint {
    pub x1: BigRational,
    pub x2: BigRational,
}

impl RationalPoint {
    /// Exact conversion of two finite floats.
    pub fn from_f64(x1: f64, x2: f64) -> Result<Self> {
        let conv = |x: f64| {
            BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter("base point must be finite".into()))
        };
        Ok(RationalPoint { x1: conv(x1)?, x2: conv(x2)? })
    }

    pub fn origin() -> Self {
        RationalPoint { x1: BigRational::zero(), x2: BigRational::zero() }
    }
}

/// `E_N` or its first half `Ẽ_N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripKind {
    Full,
    Half,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct StripeDoc {
    n_max: usize,
    strip_indices: Vec<u64>,
    convergents: Vec<Convergent>,
}

/// Liouville stripe data for `N = 1..=N_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StripeDoc", into = "StripeDoc")]
pub struct LiouvilleStripe {
    pub n_max: usize,
    /// `m_N` for `N = 1..=N_max` (index `N − 1`).
    pub strip_indices: Vec<u64>,
    pub convergents: Vec<Convergent>,
    lambda: Enclosure,
    scale: Enclosure,
    /// Speeds `ρ_N` enclosed.
    speeds: Vec<Enclosure>,
}

impl TryFrom<StripeDoc> for LiouvilleStripe {
    type Error = Error;
    fn try_from(doc: StripeDoc) -> Result<Self> {
        let s = build_liouville_stripe(doc.n_max, &doc.strip_indices)?;
        if s.convergents != doc.convergents {
            return Err(Error::InvariantViolation("stored convergents do not match the construction".into()));
        }
        Ok(s)
    }
}

impl From<LiouvilleStripe> for StripeDoc {
    fn from(s: LiouvilleStripe) -> Self {
        StripeDoc { n_max: s.n_max, strip_indices: s.strip_indices, convergents: s.convergents }
    }
}

/// Builds the stripe and validates `gcd(p_N, q_N) = 1` and
/// `0 < λ − p_N/q_N < q_N^{−N}` exactly. Missing strip indices default to 0.
pub fn build_liouville_stripe(n_max: usize, strip_indices: &[u64]) -> Result<LiouvilleStripe> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("N_max must be at least 1".into()));
    }
    if n_max > N_MAX_LIMIT {
        return Err(Error::NmaxTooLarge(n_max));
    }
    let mut indices = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let m = strip_indices.get(n - 1).copied().unwrap_or(0);
        if m >= 3u64.pow(n as u32) {
            return Err(Error::InvalidParameter(alloc::format!("m_{n} = {m} is not below 3^{n}")));
        }
        indices.push(m);
    }
    let lambda = lambda_enclosure(n_max as u32 + 2);
    let scale = direction_scale(&lambda);
    let mut convergents = Vec::with_capacity(n_max);
    let mut speeds = Vec::with_capacity(n_max);
    for n in 1..=n_max as u32 {
        let c = Convergent::liouville(n);
        if !c.p.gcd(&c.q).is_one() || c.q <= BigUint::one() {
            return Err(Error::InvariantViolation(alloc::format!("convergent {n} not in lowest terms")));
        }
        let r = c.ratio();
        let bound = BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(c.q.clone()), n as usize));
        if !(lambda.lo > r && &lambda.hi - &r < bound) {
            return Err(Error::InvariantViolation(alloc::format!("Liouville inequality fails at N = {n}")));
        }
        let q = BigRational::from_integer(BigInt::from(c.q.clone()));
        let p = BigRational::from_integer(BigInt::from(c.p.clone()));
        let offset = Enclosure { lo: &q * &lambda.lo - &p, hi: &q * &lambda.hi - &p };
        speeds.push(scale.mul_pos(&offset));
        convergents.push(c);
    }
    Ok(LiouvilleStripe { n_max, strip_indices: indices, convergents, lambda, scale, speeds })
}

/// Crossing time `T_N` with its exact enclosure.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcursionTime {
    pub n: u32,
    pub enclosure: Enclosure,
    pub value: f64,
}

impl ExcursionTime {
    /// Leading significant digits of the lower end, `d.ddd…e±k`.
    pub fn digits(&self, count: usize) -> String {
        significant_digits(&self.enclosure.lo, count)
    }
}

/// Decimal rendering of a positive rational, truncated to `count`
/// significant digits.
pub fn significant_digits(x: &BigRational, count: usize) -> String {
    let count = count.max(1);
    let approx = x.to_f64().unwrap_or(1.0);
    let mut e = libm::floor(libm::log10(approx)) as i64;
    let ten = BigInt::from(10u32);
    let lower = num_traits::pow(ten.clone(), count - 1);
    let upper = num_traits::pow(ten.clone(), count);
    let scaled = |e: i64| -> BigInt {
        let shift = count as i64 - 1 - e;
        let v = if shift >= 0 {
            x * BigRational::from_integer(num_traits::pow(ten.clone(), shift as usize))
        } else {
            x / BigRational::from_integer(num_traits::pow(ten.clone(), (-shift) as usize))
        };
        v.floor().to_integer()
    };
    let mut s = scaled(e);
    while s >= upper {
        e += 1;
        s = scaled(e);
    }
    while s < lower {
        e -= 1;
        s = scaled(e);
    }
    let digits = s.to_string();
    let mut out = String::new();
    out.push_str(&digits[..1]);
    if count > 1 {
        out.push('.');
        out.push_str(&digits[1..]);
    }
    if e != 0 {
        out.push_str(&alloc::format!("e{e}"));
    }
    out
}

/// Verified excursion `[s, s + T_N/2]` with `f_x ≡ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub n: u32,
    pub s: f64,
    /// Exact start as `numerator/denominator`.
    pub s_exact: String,
    pub length: f64,
    pub probes: Vec<f64>,
}

impl LiouvilleStripe {
    pub fn lambda(&self) -> &Enclosure {
        &self.lambda
    }

    /// `(1 + λ²)^{−1/2}` enclosed.
    pub fn direction_scale(&self) -> &Enclosure {
        &self.scale
    }

    pub fn convergent(&self, n: u32) -> Result<&Convergent> {
        if n == 0 || n as usize > self.n_max {
            return Err(Error::InvalidParameter(alloc::format!("N = {n} outside 1..={}", self.n_max)));
        }
        Ok(&self.convergents[n as usize - 1])
    }

    /// Speed `ρ_N` of the transverse coordinate along `η`.
    pub fn speed(&self, n: u32) -> Result<&Enclosure> {
        self.convergent(n)?;
        Ok(&self.speeds[n as usize - 1])
    }

    /// `T_N = (1+λ²)^{1/2} 3^{−N} q_N^{−1} (λ − λ_N)^{−1}`.
    pub fn excursion_time(&self, n: u32) -> Result<ExcursionTime> {
        let speed = self.speed(n)?;
        if !speed.lo.is_positive() {
            return Err(Error::InvariantViolation("λ equals its convergent".into()));
        }
        let w = BigRational::new(BigInt::one(), pow3(n));
        let enclosure = speed.recip_scaled(&w);
        let value = enclosure.mid_f64();
        Ok(ExcursionTime { n, enclosure, value })
    }

    /// `T_N·M^{−N}` for every stored `N`.
    pub fn growth_trend(&self, m: f64) -> Result<Vec<f64>> {
        (1..=self.n_max as u32).map(|n| Ok(self.excursion_time(n)?.value / libm::pow(m, n as f64))).collect()
    }

    /// `|E_N| = L_N R_N / 3^N = q_N (p_N² + q_N²)^{−1/2} 3^{−N}`.
    pub fn strip_area(&self, n: u32) -> Result<f64> {
        let c = self.convergent(n)?;
        Ok(c.q.to_f64().unwrap() * c.gap() / libm::pow(3.0, n as f64))
    }

    /// Exact transverse coordinate `−p_N x₁ + q_N x₂`.
    fn transverse(&self, n: u32, x: &RationalPoint) -> BigRational {
        let c = &self.convergents[n as usize - 1];
        let p = BigRational::from_integer(BigInt::from(c.p.clone()));
        let q = BigRational::from_integer(BigInt::from(c.q.clone()));
        q * &x.x2 - p * &x.x1
    }

    /// Strip bounds `[m/3^N, (m + 1)/3^N]` (or the first half).
    fn strip_bounds(&self, n: u32, kind: StripKind) -> (BigRational, BigRational) {
        let d = pow3(n);
        let m = BigInt::from(self.strip_indices[n as usize - 1]);
        let lo = BigRational::new(m.clone(), d.clone());
        let hi = match kind {
            StripKind::Full => BigRational::new(m + 1, d),
            StripKind::Half => BigRational::new(2 * m + 1, 2 * d),
        };
        (lo, hi)
    }

    /// Certified membership of `x + sη` in the strip. `Some(b)` when the
    /// enclosure decides, `None` when it straddles a boundary.
    pub fn member_along(&self, n: u32, x: &RationalPoint, s: &BigRational, kind: StripKind) -> Result<Option<bool>> {
        let (lo, hi) = self.transverse_along(n, x, s)?;
        let fl = lo.floor();
        if fl != hi.floor() {
            return Ok(None);
        }
        let (flo, fhi) = (lo - &fl, hi - &fl);
        let (a, b) = self.strip_bounds(n, kind);
        if flo >= a && fhi <= b {
            Ok(Some(true))
        } else if fhi < a || flo > b {
            Ok(Some(false))
        } else {
            Ok(None)
        }
    }

    /// Enclosure of the transverse coordinate of `x + sη`.
    fn transverse_along(&self, n: u32, x: &RationalPoint, s: &BigRational) -> Result<(BigRational, BigRational)> {
        let speed = self.speed(n)?;
        let v0 = self.transverse(n, x);
        let (a, b) = (s * &speed.lo, s * &speed.hi);
        Ok(if a <= b { (&v0 + a, v0 + b) } else { (&v0 + b, v0 + a) })
    }

    /// [`Self::locate_excursion_from`] starting at `s = 0`.
    pub fn locate_excursion(&self, x: &RationalPoint, n: u32, max_s: f64) -> Result<Excursion> {
        self.locate_excursion_from(x, n, &BigRational::zero(), max_s)
    }

    /// Locates `s ≥ from` with `x + sη ∈ Ẽ_N` and verifies `f_x = 1` at
    /// `s + {0, T_N/4, T_N/2}` (with `T_N` replaced by its certified lower
    /// bound). If `x + from·η` is already in `Ẽ_N`, `s = from`. Otherwise the
    /// entry point is placed `1/16` of the strip width inside its left edge.
    /// Fails if the entry lies beyond `from + max_len`.
    pub fn locate_excursion_from(&self, x: &RationalPoint, n: u32, from: &BigRational, max_len: f64) -> Result<Excursion> {
        let time = self.excursion_time(n)?;
        let speed = self.speed(n)?;
        let (lo, hi) = self.transverse_along(n, x, from)?;
        let two = BigRational::from_integer(BigInt::from(2));
        let mid = (&lo + &hi) / &two;
        let f0 = &mid - mid.floor();
        let (a, _) = self.strip_bounds(n, StripKind::Half);
        let s = if self.member_along(n, x, from, StripKind::Half)? == Some(true) {
            from.clone()
        } else {
            let width = BigRational::new(BigInt::one(), pow3(n));
            let target = &a + width / BigRational::from_integer(BigInt::from(16));
            let mut delta = target - &f0;
            if delta.is_negative() {
                delta += BigRational::one();
            }
            let mid_speed = (&speed.lo + &speed.hi) / &two;
            let run = delta / mid_speed;
            let rf = run.to_f64().unwrap_or(f64::INFINITY);
            if !(rf <= max_len) {
                return Err(Error::SearchBudgetExhausted(alloc::format!(
                    "entry into the strip at distance {rf:e} beyond the budget {max_len:e}"
                )));
            }
            from + run
        };
        if self.member_along(n, x, &s, StripKind::Half)? != Some(true) {
            return Err(Error::InvariantViolation("entry point not certified inside the half strip".into()));
        }
        let t_lo = &time.enclosure.lo;
        let four = BigRational::from_integer(BigInt::from(4));
        let offsets = [BigRational::zero(), t_lo / four, t_lo / &two];
        let mut probes = Vec::with_capacity(3);
        for off in &offsets {
            let t = &s + off;
            if self.member_along(n, x, &t, StripKind::Full)? != Some(true) {
                return Err(Error::InvariantViolation(alloc::format!("probe at s + {} not certified in E_{n}", off)));
            }
            probes.push(t.to_f64().unwrap_or(f64::NAN));
        }
        Ok(Excursion {
            n,
            s: s.to_f64().unwrap_or(f64::NAN),
            s_exact: alloc::format!("{}/{}", s.numer(), s.denom()),
            length: t_lo.to_f64().unwrap_or(f64::NAN) / 2.0,
            probes,
        })
    }

    /// Floating-point transverse offsets and speeds for fast evaluation of
    /// `f_x`; adequate away from strip boundaries.
    pub fn line(&self, x: &RationalPoint) -> StripeLine {
        let mut offsets = Vec::with_capacity(self.n_max);
        let mut speeds = Vec::with_capacity(self.n_max);
        let mut lows = Vec::with_capacity(self.n_max);
        let mut highs = Vec::with_capacity(self.n_max);
        for n in 1..=self.n_max as u32 {
            let v0 = self.transverse(n, x);
            offsets.push((&v0 - v0.floor()).to_f64().unwrap());
            speeds.push(self.speeds[n as usize - 1].mid_f64());
            let (a, b) = self.strip_bounds(n, StripKind::Full);
            lows.push(a.to_f64().unwrap());
            highs.push(b.to_f64().unwrap());
        }
        StripeLine { offsets, speeds, lows, highs }
    }
}

/// `f_x(s) = 2 − χ_E(x + sη)` in floating point.
#[derive(Clone, Debug, PartialEq)]
pub struct StripeLine {
    offsets: Vec<f64>,
    speeds: Vec<f64>,
    lows: Vec<f64>,
    highs: Vec<f64>,
}

impl StripeLine {
    pub fn eval(&self, s: f64) -> f64 {
        for k in 0..self.offsets.len() {
            let v = self.offsets[k] + s * self.speeds[k];
            let f = v - libm::floor(v);
            if f >= self.lows[k] && f <= self.highs[k] {
                return 1.0;
            }
        }
        2.0
    }
}

/// `L(p/q) = inf{T > 0 : (T, Tp/q) ∈ ℤ²}` by direct search over integers.
pub fn cycle_length(p: u64, q: u64) -> u64 {
    assert!(q > 0);
    let mut t = 1u64;
    while ((t as u128 * p as u128) % q as u128) != 0 {
        t += 1;
    }
    t
}

/// `R(p/q) = min{k·e > 0 : k ∈ ℤ²}` by direct search: returns the minimal
/// positive `q k₂ − p k₁` and `R` itself.
pub fn cycle_gap(p: u64, q: u64) -> (u64, f64) {
    assert!(q > 0);
    let mut best = q;
    for k1 in 0..q {
        // smallest positive q·k₂ − p·k₁ for this k₁
        let r = ((q as u128 - (p as u128 * k1 as u128) % q as u128) % q as u128) as u64;
        let v = if r == 0 { q } else { r };
        best = best.min(v);
        if best == 1 {
            break;
        }
    }
    let norm = libm::hypot(p as f64, q as f64);
    (best, best as f64 / norm)
}

/// Monte-Carlo estimate of `|E_1 ∪ … ∪ E_{N_max}|` from `n_points` points
/// with 53-bit dyadic coordinates. Membership is decided exactly in integer
/// arithmetic. Returns `(hits, n_points)`.
pub fn torus_membership_estimate(stripe: &LiouvilleStripe, n_points: u64, seed: u64) -> (u64, u64) {
    const BITS: u32 = 53;
    let modulus: i128 = 1 << BITS;
    let coeffs: Vec<(i128, i128, i128, i128)> = stripe
        .convergents
        .iter()
        .zip(&stripe.strip_indices)
        .map(|(c, &m)| {
            let p = c.p.to_u64().unwrap() as i128;
            let q = c.q.to_u64().unwrap() as i128;
            (p, q, 3i128.pow(c.n), m as i128)
        })
        .collect();
    let mut reader = CounterRng::new(seed, streams::PROBES).reader(0, 2);
    let mut hits = 0u64;
    for _ in 0..n_points {
        let a = (reader.next_u64() >> (64 - BITS)) as i128;
        let b = (reader.next_u64() >> (64 - BITS)) as i128;
        let inside = coeffs.iter().any(|&(p, q, d, m)| {
            let r = (q * b - p * a).rem_euclid(modulus);
            let scaled = d * r;
            scaled >= m * modulus && scaled <= (m + 1) * modulus
        });
        hits += inside as u64;
    }
    (hits, n_points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergents_small() {
        let c = Convergent::liouville(2);
        assert_eq!((c.p.to_u64().unwrap(), c.q.to_u64().unwrap()), (3, 4));
        let c = Convergent::liouville(3);
        assert_eq!((c.p.to_u64().unwrap(), c.q.to_u64().unwrap()), (49, 64));
    }

    #[test]
    fn sqrt_enclosure_brackets() {
        let two = BigRational::from_integer(BigInt::from(2));
        let (lo, hi) = sqrt_bounds(&two, 64);
        assert!(&lo * &lo <= two && &hi * &hi >= two);
        assert!((hi - lo) * BigRational::from_integer(pow2(60)) < BigRational::one());
    }

    #[test]
    fn digits_render() {
        let x = BigRational::new(BigInt::from(314159), BigInt::from(100000));
        assert_eq!(significant_digits(&x, 4), "3.141");
        let y = BigRational::new(BigInt::from(12345), BigInt::one());
        assert_eq!(significant_digits(&y, 3), "1.23e4");
    }
}
