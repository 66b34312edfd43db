//! Quasi one-dimensional media `θ(y) = θ^stripe(y₁)·θ̃(y)` in `d` dimensions
//! with `a ≡ Id`.

use libm::floor;
use serde::{Deserialize, Serialize};

use super::lamp::LampStripe;
use super::liouville::StripeLine;
use crate::rng::{streams, to_unit, CounterRng};
use crate::{Error, Result};

/// The stripe factor as a function of `y₁`.
#[derive(Clone, Debug, PartialEq)]
pub enum StripeProfile {
    Constant(f64),
    /// Markers on unit cells `[k, k + 1)`; undefined outside the window.
    Lamp(LampStripe),
    Liouville(StripeLine),
}

impl StripeProfile {
    pub fn eval(&self, y1: f64) -> Option<f64> {
        match self {
            StripeProfile::Constant(c) => Some(*c),
            StripeProfile::Lamp(l) => l.marker(floor(y1) as i64).map(f64::from),
            StripeProfile::Liouville(line) => Some(line.eval(y1)),
        }
    }

    /// Smallest value of the stripe.
    pub fn minimum(&self) -> f64 {
        match self {
            StripeProfile::Constant(c) => *c,
            _ => 1.0,
        }
    }
}

/// I.i.d. checkerboard on unit cubes with values `1 ± h` (equal weights).
/// The cell `z ∈ ℤ^d` is read from stream `TRANSVERSE_BASE | z₂ << 28 | z₃`
/// at index `z₁`, so `|z₃| < 2^27` and `|z₂| < 2^31` are required.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transverse {
    pub h: f64,
    pub seed: u64,
}

impl Transverse {
    pub fn new(h: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&h) {
            return Err(Error::InvalidParameter("transverse amplitude needs 0 ≤ h < 1".into()));
        }
        Ok(Transverse { h, seed })
    }

    fn stream(z2: i64, z3: i64) -> u64 {
        let a = (z2 as i32 as u32 as u64) << 28;
        let b = (z3 as i32 as u32 as u64) & 0x0FFF_FFFF;
        streams::TRANSVERSE_BASE | a | b
    }

    /// `θ̃` on the cell `(z₁, z₂, z₃)` (pass `z₃ = 0` in two dimensions).
    pub fn cell(&self, z1: i64, z2: i64, z3: i64) -> f64 {
        if self.h == 0.0 {
            return 1.0;
        }
        let u = to_unit(CounterRng::new(self.seed, Self::stream(z2, z3)).word(z1, 0, 1));
        if u < 0.5 {
            1.0 - self.h
        } else {
            1.0 + self.h
        }
    }

    /// A reader over consecutive `z₁` for fixed `(z₂, z₃)`.
    pub fn row(&self, z1_start: i64, z2: i64, z3: i64) -> TransverseRow {
        TransverseRow { h: self.h, reader: CounterRng::new(self.seed, Self::stream(z2, z3)).reader(z1_start, 1) }
    }
}

/// Sequential access to `θ̃` along `z₁`.
pub struct TransverseRow {
    h: f64,
    reader: crate::rng::Reader,
}

impl TransverseRow {
    #[inline]
    pub fn next_value(&mut self) -> f64 {
        let u = self.reader.uniform();
        if self.h == 0.0 {
            1.0
        } else if u < 0.5 {
            1.0 - self.h
        } else {
            1.0 + self.h
        }
    }
}

/// `θ(y) = θ^stripe(y₁)·θ̃(y)` for `d ∈ {2, 3}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMediumD {
    pub dim: usize,
    pub stripe: StripeProfile,
    pub transverse: Transverse,
}

impl ProductMediumD {
    pub fn new(dim: usize, stripe: StripeProfile, transverse: Transverse) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidParameter("product media need d ∈ {2, 3}".into()));
        }
        Ok(ProductMediumD { dim, stripe, transverse })
    }

    /// `θ` at a microscopic point (`y.len() == dim`).
    pub fn theta(&self, y: &[f64]) -> Option<f64> {
        let z3 = if self.dim == 3 { floor(y[2]) as i64 } else { 0 };
        let s = self.stripe.eval(y[0])?;
        Some(s * self.transverse.cell(floor(y[0]) as i64, floor(y[1]) as i64, z3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_reader_matches_cells() {
        let t = Transverse::new(0.5, 9).unwrap();
        let mut row = t.row(-4, 3, 0);
        for z1 in -4..20 {
            assert_eq!(row.next_value(), t.cell(z1, 3, 0));
        }
    }

    #[test]
    fn product_multiplies() {
        let t = Transverse::new(0.25, 1).unwrap();
        let m = ProductMediumD::new(2, StripeProfile::Constant(2.0), t).unwrap();
        let v = m.theta(&[0.5, 0.5]).unwrap();
        assert!(v == 2.0 * 0.75 || v == 2.0 * 1.25);
    }
}
