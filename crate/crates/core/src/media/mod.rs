//! Coefficient fields `(a, θ)`: random checkerboards, periodic and constant
//! media, lamp stripes, Liouville stripes and stripe × checkerboard products.
//!
//! One-dimensional media live on a lattice of cells `[o + z·w, o + (z+1)·w)`
//! in microscopic units. The random checkerboard uses `o = −½`, `w = 1`, so
//! cell `z` is `[z − ½, z + ½)`; lamp stripes use `o = 0`.

mod lamp;
mod liouville;
mod product;

pub use lamp::{sample_lamp_stripe, LampLaw, LampOptions, LampStripe};
pub use liouville::{
    build_liouville_stripe, cycle_gap, cycle_length, lambda_enclosure, significant_digits, torus_membership_estimate,
    Convergent, Enclosure, Excursion, ExcursionTime, LiouvilleStripe, RationalPoint, StripKind, StripeLine, N_MAX_LIMIT,
};
pub use product::{ProductMediumD, StripeProfile, Transverse, TransverseRow};

use alloc::string::String;
use alloc::vec::Vec;
use libm::floor;
use serde::{Deserialize, Serialize};

use crate::exec::Executor;
use crate::numeric::wilson_interval;
use crate::rng::{streams, to_unit, CounterRng};
use crate::{Error, Result};

/// Cell lattice in microscopic coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub origin: f64,
    pub width: f64,
}

impl Lattice {
    /// Cells `[z − ½, z + ½)`.
    pub const CENTERED: Lattice = Lattice { origin: -0.5, width: 1.0 };
    /// Cells `[k, k + 1)`.
    pub const SITES: Lattice = Lattice { origin: 0.0, width: 1.0 };

    #[inline]
    pub fn index(&self, y: f64) -> i64 {
        floor((y - self.origin) / self.width) as i64
    }

    #[inline]
    pub fn left(&self, z: i64) -> f64 {
        self.origin + z as f64 * self.width
    }
}

impl Default for Lattice {
    fn default() -> Self {
        Lattice::CENTERED
    }
}

/// Coefficient pair of one cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub a: f64,
    pub theta: f64,
}

/// Ellipticity bounds `(λ, Λ, θ*, θ^*)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub a_min: f64,
    pub a_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Bounds {
    pub fn validate(&self) -> Result<()> {
        let ok = self.a_min > 0.0
            && self.a_min <= self.a_max
            && self.theta_min > 0.0
            && self.theta_min <= self.theta_max
            && self.a_max.is_finite()
            && self.theta_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("bounds need 0 < λ ≤ Λ < ∞ and 0 < θ* ≤ θ^* < ∞".into()))
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.a_min <= c.a && c.a <= self.a_max && self.theta_min <= c.theta && c.theta <= self.theta_max
    }

    pub fn check(&self, c: Cell) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::BoundsViolated { a: c.a, theta: c.theta })
        }
    }

    /// The favorable pair `(λ, θ*)`.
    pub fn favorable(&self) -> Cell {
        Cell { a: self.a_min, theta: self.theta_min }
    }

    /// Tightest bounds containing the given cells.
    pub fn hull<I: IntoIterator<Item = Cell>>(cells: I) -> Option<Bounds> {
        let mut it = cells.into_iter();
        let first = it.next()?;
        let mut b = Bounds { a_min: first.a, a_max: first.a, theta_min: first.theta, theta_max: first.theta };
        for c in it {
            b.a_min = b.a_min.min(c.a);
            b.a_max = b.a_max.max(c.a);
            b.theta_min = b.theta_min.min(c.theta);
            b.theta_max = b.theta_max.max(c.theta);
        }
        Some(b)
    }
}

/// Weighted atom of a cell law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawAtom {
    pub a: f64,
    pub theta: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CellLawDoc {
    atoms: Vec<LawAtom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<Bounds>,
}

/// Discrete law of `(A_z, Θ_z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CellLawDoc", into = "CellLawDoc")]
pub struct CellLaw {
    atoms: Vec<LawAtom>,
    bounds: Bounds,
    declared_bounds: bool,
    cumulative: Vec<f64>,
}

impl TryFrom<CellLawDoc> for CellLaw {
    type Error = Error;
    fn try_from(doc: CellLawDoc) -> Result<Self> {
        CellLaw::new(doc.atoms, doc.bounds)
    }
}

impl From<CellLaw> for CellLawDoc {
    fn from(law: CellLaw) -> Self {
        CellLawDoc { bounds: if law.declared_bounds { Some(law.bounds) } else { None }, atoms: law.atoms }
    }
}

impl CellLaw {
    /// Law with the given atoms; weights are normalized. Bounds default to
    /// the hull of the support.
    pub fn new(atoms: Vec<LawAtom>, bounds: Option<Bounds>) -> Result<Self> {
        let atoms: Vec<LawAtom> = atoms.into_iter().filter(|a| a.weight > 0.0).collect();
        if atoms.is_empty() {
            return Err(Error::EmptySupport);
        }
        if atoms.iter().any(|a| !a.weight.is_finite() || !a.a.is_finite() || !a.theta.is_finite()) {
            return Err(Error::InvalidParameter("law atoms must be finite".into()));
        }
        let declared_bounds = bounds.is_some();
        let bounds = match bounds {
            Some(b) => b,
            None => Bounds::hull(atoms.iter().map(|a| Cell { a: a.a, theta: a.theta })).unwrap(),
        };
        bounds.validate()?;
        for at in &atoms {
            bounds.check(Cell { a: at.a, theta: at.theta })?;
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        let atoms: Vec<LawAtom> = atoms.into_iter().map(|a| LawAtom { weight: a.weight / total, ..a }).collect();
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for a in &atoms {
            acc += a.weight;
            cumulative.push(acc);
        }
        Ok(CellLaw { atoms, bounds, declared_bounds, cumulative })
    }

    /// Point mass.
    pub fn point(a: f64, theta: f64) -> Result<Self> {
        CellLaw::new(alloc::vec![LawAtom { a, theta, weight: 1.0 }], None)
    }

    /// Independent `A` and `Θ`, each uniform over the listed values.
    pub fn product(a_values: &[f64], theta_values: &[f64]) -> Result<Self> {
        let mut atoms = Vec::new();
        for &a in a_values {
            for &theta in theta_values {
                atoms.push(LawAtom { a, theta, weight: 1.0 });
            }
        }
        CellLaw::new(atoms, None)
    }

    /// The four-point law with weight ¼ on each of
    /// `(λ,θ*), (λ,θ^*), (Λ,θ*), (Λ,θ^*)`.
    pub fn four_point(lambda: f64, big_lambda: f64, theta_lo: f64, theta_hi: f64) -> Result<Self> {
        CellLaw::product(&[lambda, big_lambda], &[theta_lo, theta_hi])
    }

    pub fn atoms(&self) -> &[LawAtom] {
        &self.atoms
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn is_constant(&self) -> bool {
        self.atoms.iter().all(|a| a.a == self.atoms[0].a && a.theta == self.atoms[0].theta)
    }

    /// Probability of the favorable pair `(λ, θ*)`.
    pub fn favorable_probability(&self) -> f64 {
        let f = self.bounds.favorable();
        self.atoms.iter().filter(|a| a.a == f.a && a.theta == f.theta).map(|a| a.weight).sum()
    }

    /// Inverse-CDF draw from a uniform `u ∈ [0, 1)`.
    #[inline]
    pub fn sample(&self, u: f64) -> Cell {
        let k = self.cumulative.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
        Cell { a: self.atoms[k].a, theta: self.atoms[k].theta }
    }
}

/// Cell override used to plant deterministic stretches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plant {
    pub first: i64,
    pub last: i64,
    pub cell: Cell,
}

/// Replayable description of a 1D medium.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MediumSpec {
    Checkerboard {
        law: CellLaw,
        seed: u64,
        window: [i64; 2],
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        plants: Vec<Plant>,
        #[serde(default)]
        lattice: Lattice,
    },
    Periodic {
        pattern: Vec<Cell>,
        lattice: Lattice,
        window: [i64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<Bounds>,
    },
    Constant {
        cell: Cell,
        window: [i64; 2],
        #[serde(default)]
        lattice: Lattice,
    },
    Lamp {
        alpha: f64,
        seed: u64,
        window: [i64; 2],
    },
    Explicit {
        lattice: Lattice,
        z_min: i64,
        cells: Vec<Cell>,
        bounds: Bounds,
    },
}

impl MediumSpec {
    pub fn realize(&self) -> Result<Medium1D> {
        match self {
            MediumSpec::Checkerboard { law, seed, window, plants, lattice } => {
                let mut m = sample_checkerboard(*seed, *window, law)?;
                m.lattice = *lattice;
                for p in plants {
                    m.plant(p.first, p.last, p.cell)?;
                }
                m.spec = self.clone();
                Ok(m)
            }
            MediumSpec::Periodic { pattern, lattice, window, bounds } => {
                check_window(*window)?;
                if pattern.is_empty() {
                    return Err(Error::EmptySupport);
                }
                let b = match bounds {
                    Some(b) => *b,
                    None => Bounds::hull(pattern.iter().copied()).unwrap(),
                };
                b.validate()?;
                for c in pattern {
                    b.check(*c)?;
                }
                let len = pattern.len() as i64;
                let cells = (window[0]..=window[1]).map(|z| pattern[z.rem_euclid(len) as usize]).collect();
                Ok(Medium1D { spec: self.clone(), lattice: *lattice, z_min: window[0], cells, bounds: b })
            }
            MediumSpec::Constant { cell, window, lattice } => {
                check_window(*window)?;
                let b = Bounds::hull([*cell]).unwrap();
                b.validate()?;
                let n = (window[1] - window[0] + 1) as usize;
                Ok(Medium1D { spec: self.clone(), lattice: *lattice, z_min: window[0], cells: alloc::vec![*cell; n], bounds: b })
            }
            MediumSpec::Lamp { alpha, seed, window } => {
                let stripe = sample_lamp_stripe(*seed, *alpha, *window, &LampOptions::default())?;
                let mut m = stripe.to_medium();
                m.spec = self.clone();
                Ok(m)
            }
            MediumSpec::Explicit { lattice, z_min, cells, bounds } => {
                bounds.validate()?;
                if cells.is_empty() {
                    return Err(Error::EmptySupport);
                }
                for c in cells {
                    bounds.check(*c)?;
                }
                Ok(Medium1D { spec: self.clone(), lattice: *lattice, z_min: *z_min, cells: cells.clone(), bounds: *bounds })
            }
        }
    }
}

fn check_window(window: [i64; 2]) -> Result<()> {
    if window[1] < window[0] {
        Err(Error::InvalidParameter(alloc::format!("empty window [{}, {}]", window[0], window[1])))
    } else {
        Ok(())
    }
}

/// Sampled 1D medium: cell values over `[z_min, z_min + len)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Medium1D {
    pub spec: MediumSpec,
    pub lattice: Lattice,
    pub z_min: i64,
    pub cells: Vec<Cell>,
    pub bounds: Bounds,
}

/// Serializable replay document of a medium.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumDoc {
    pub spec: MediumSpec,
    pub bounds: Bounds,
}

/// I.i.d. cells `z ∈ [window[0], window[1]]` drawn from `law`; cell `z`
/// depends only on `(seed, z)`.
pub fn sample_checkerboard(seed: u64, window: [i64; 2], law: &CellLaw) -> Result<Medium1D> {
    check_window(window)?;
    let n = (window[1] - window[0] + 1) as usize;
    let mut reader = CounterRng::new(seed, streams::CELLS).reader(window[0], 1);
    let cells = (0..n).map(|_| law.sample(reader.uniform())).collect();
    Ok(Medium1D {
        spec: MediumSpec::Checkerboard { law: law.clone(), seed, window, plants: Vec::new(), lattice: Lattice::CENTERED },
        lattice: Lattice::CENTERED,
        z_min: window[0],
        cells,
        bounds: law.bounds(),
    })
}

/// Single cell draw of the checkerboard, identical to the windowed sample.
pub fn checkerboard_cell(seed: u64, z: i64, law: &CellLaw) -> Cell {
    law.sample(to_unit(CounterRng::new(seed, streams::CELLS).word(z, 0, 1)))
}

/// I.i.d. checkerboard on the unit squares `[z − ½, z + ½)²`; cell `z`
/// is word `z₁` of stream `CELLS_2D | z₂`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkerboard2D {
    pub law: CellLaw,
    pub seed: u64,
}

impl Checkerboard2D {
    pub fn cell(&self, z1: i64, z2: i64) -> Cell {
        let stream = streams::CELLS_2D | (z2 as i32 as u32 as u64);
        self.law.sample(to_unit(CounterRng::new(self.seed, stream).word(z1, 0, 1)))
    }

    pub fn theta(&self, z1: i64, z2: i64) -> f64 {
        self.cell(z1, z2).theta
    }
}

impl Medium1D {
    pub fn constant(cell: Cell, window: [i64; 2]) -> Result<Self> {
        MediumSpec::Constant { cell, window, lattice: Lattice::CENTERED }.realize()
    }

    pub fn z_max(&self) -> i64 {
        self.z_min + self.cells.len() as i64 - 1
    }

    pub fn doc(&self) -> MediumDoc {
        MediumDoc { spec: self.spec.clone(), bounds: self.bounds }
    }

    #[inline]
    pub fn cell(&self, z: i64) -> Option<Cell> {
        if z < self.z_min {
            return None;
        }
        self.cells.get((z - self.z_min) as usize).copied()
    }

    /// Coefficients at microscopic position `y`.
    #[inline]
    pub fn at(&self, y: f64) -> Option<Cell> {
        self.cell(self.lattice.index(y))
    }

    /// Microscopic interval covered by the window.
    pub fn extent(&self) -> (f64, f64) {
        (self.lattice.left(self.z_min), self.lattice.left(self.z_max() + 1))
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let (a, b) = self.extent();
        a <= lo && hi <= b
    }

    /// Overwrite cells `first..=last` (within the window) with `cell`.
    pub fn plant(&mut self, first: i64, last: i64, cell: Cell) -> Result<()> {
        self.bounds.check(cell)?;
        if first < self.z_min || last > self.z_max() || last < first {
            return Err(Error::WindowCoverage { lo: first as f64, hi: last as f64 });
        }
        for z in first..=last {
            self.cells[(z - self.z_min) as usize] = cell;
        }
        if let MediumSpec::Checkerboard { plants, .. } = &mut self.spec {
            plants.push(Plant { first, last, cell });
        } else {
            self.spec = MediumSpec::Explicit { lattice: self.lattice, z_min: self.z_min, cells: self.cells.clone(), bounds: self.bounds };
        }
        Ok(())
    }

    /// Maximal runs `[z_first, z_last]` of cells equal to `target`.
    pub fn runs_of(&self, target: Cell) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        let mut start: Option<i64> = None;
        for (k, c) in self.cells.iter().enumerate() {
            let z = self.z_min + k as i64;
            if *c == target {
                if start.is_none() {
                    start = Some(z);
                }
            } else if let Some(s) = start.take() {
                out.push((s, z - 1));
            }
        }
        if let Some(s) = start {
            out.push((s, self.z_max()));
        }
        out
    }

    /// Flags `pred(cell)` over the window.
    pub fn flags<P: Fn(Cell) -> bool>(&self, pred: P) -> Vec<bool> {
        self.cells.iter().map(|c| pred(*c)).collect()
    }
}

/// Arrival radius `T̂_j`: the smallest `R ≥ 0` such that some
/// `x ∈ [−R, R]` has `(a, θ) ≡ target` on `[x, x + j)` (microscopic units).
/// Returns `+∞` if no such stretch lies inside the window.
pub fn find_minimal_stretch(medium: &Medium1D, j: f64, target: Cell) -> f64 {
    let mut best = f64::INFINITY;
    for (zs, ze) in medium.runs_of(target) {
        let s = medium.lattice.left(zs);
        let e = medium.lattice.left(ze + 1);
        if e - s < j {
            continue;
        }
        let (lo, hi) = (s, e - j);
        let r = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { libm::fabs(lo).min(libm::fabs(hi)) };
        best = best.min(r);
    }
    best
}

/// One row of a run-length tail table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTailRow {
    pub n: u32,
    pub events: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Empirical `P{flag ≡ true on the 2N sites [c − N, c + N − 1]}` over all
/// centers `c` at distance ≥ `max N` from the window edges, pooled over
/// `n_windows` independent windows produced by `sample(i)`. Error bars are
/// Wilson intervals on the pooled counts (centers within one window are
/// correlated, so the bars are optimistic for strongly dependent fields).
pub fn run_length_tail<E, F>(exec: &E, n_windows: usize, lengths: &[u32], sample: F) -> Result<Vec<RunTailRow>>
where
    E: Executor,
    F: Fn(usize) -> Result<Vec<bool>> + Sync + Send,
{
    let n_max = *lengths.iter().max().ok_or_else(|| Error::InvalidParameter(String::from("no lengths given")))? as usize;
    let per_window = exec.map(n_windows, |i| -> Result<Vec<(u64, u64)>> {
        let flags = sample(i)?;
        if flags.len() < 2 * n_max + 1 {
            return Err(Error::WindowTooSmall(alloc::format!("{} sites for N = {}", flags.len(), n_max)));
        }
        // prefix[k] = number of false flags among the first k sites
        let mut prefix = Vec::with_capacity(flags.len() + 1);
        prefix.push(0u32);
        for f in &flags {
            prefix.push(prefix.last().unwrap() + (!*f) as u32);
        }
        let centers = n_max..=flags.len() - n_max;
        Ok(lengths
            .iter()
            .map(|&n| {
                let n = n as usize;
                let mut ev = 0u64;
                let mut tr = 0u64;
                for c in centers.clone() {
                    tr += 1;
                    if prefix[c + n] == prefix[c - n] {
                        ev += 1;
                    }
                }
                (ev, tr)
            })
            .collect())
    });
    let mut events = alloc::vec![0u64; lengths.len()];
    let mut trials = alloc::vec![0u64; lengths.len()];
    for w in per_window {
        for (k, (e, t)) in w?.into_iter().enumerate() {
            events[k] += e;
            trials[k] += t;
        }
    }
    Ok(lengths
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let (lo, hi) = wilson_interval(events[k], trials[k], 1.96);
            RunTailRow {
                n,
                events: events[k],
                trials: trials[k],
                p_hat: if trials[k] > 0 { events[k] as f64 / trials[k] as f64 } else { 0.0 },
                ci_lo: lo,
                ci_hi: hi,
            }
        })
        .collect())
}
