//! Favorable-block counting.
//!
//! With the medium in microscopic units `y = x/γ`, a block is the macroscopic
//! interval `[x − r, x + r)` with `x ∈ 2rℤ` and `|x| ≤ R − 1 − r`; it is
//! favorable when all of its `2r/γ` microcells carry the target pair.

use alloc::vec::Vec;
use libm::{fabs, floor, pow, round, sqrt};
use serde::{Deserialize, Serialize};

use crate::exec::Executor;
use crate::media::{Cell, CellLaw, Lattice, Medium1D, MediumSpec};
use crate::rng::derive_seed;
use crate::{Error, Result};

const ALIGN_TOL: f64 = 1e-9;

/// Lattice whose cell boundaries contain every block edge `(2k ± 1)r/γ`:
/// sites `[k, k+1)` when `r/γ ∈ ℤ`, centered cells when `2r/γ` is odd.
pub fn block_lattice(r: f64, gamma: f64) -> Result<Lattice> {
    if !(r > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidParameter("r and γ must be positive".into()));
    }
    let cells = 2.0 * r / gamma;
    let n = round(cells);
    if n < 1.0 || fabs(cells - n) > ALIGN_TOL * cells.max(1.0) {
        return Err(Error::Alignment(alloc::format!("2r/γ = {cells} is not an integer")));
    }
    Ok(if (n as u64) % 2 == 0 { Lattice::SITES } else { Lattice::CENTERED })
}

/// Number of blocks `2K + 1`, `K = ⌊(R − 1 − r)/(2r)⌋`.
fn block_range(big_r: f64, r: f64) -> Result<i64> {
    let k = floor((big_r - 1.0 - r) / (2.0 * r));
    if k < 0.0 {
        return Err(Error::InvalidParameter(alloc::format!("R = {big_r} holds no block of radius {r}")));
    }
    Ok(k as i64)
}

/// Outcome of one count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCount {
    pub count: u64,
    pub blocks: u64,
    pub block_cells: u64,
}

/// Counts the favorable blocks in `medium` (microscopic units, `y = x/γ`).
pub fn count_favorable_blocks(medium: &Medium1D, big_r: f64, r: f64, gamma: f64, target: Cell) -> Result<BlockCount> {
    let lat = block_lattice(r, gamma)?;
    if medium.lattice != lat {
        return Err(Error::Alignment(alloc::format!("medium lattice {:?} does not match blocks ({lat:?})", medium.lattice)));
    }
    let k_max = block_range(big_r, r)?;
    let n_cells = round(2.0 * r / gamma) as i64;
    let first = lat.index((-(2 * k_max) as f64 * r - r) / gamma + 0.5 * lat.width);
    let last = first + (2 * k_max + 1) * n_cells - 1;
    if medium.cell(first).is_none() || medium.cell(last).is_none() {
        return Err(Error::WindowCoverage { lo: lat.left(first), hi: lat.left(last + 1) });
    }
    let flags = medium.flags(|c| c == target);
    let off = (first - medium.z_min) as usize;
    let mut prefix = Vec::with_capacity(((2 * k_max + 1) * n_cells + 1) as usize);
    prefix.push(0u64);
    for f in &flags[off..=(last - medium.z_min) as usize] {
        prefix.push(prefix.last().unwrap() + *f as u64);
    }
    let n = n_cells as usize;
    let count = (0..(2 * k_max + 1) as usize).filter(|&b| prefix[(b + 1) * n] - prefix[b * n] == n as u64).count();
    Ok(BlockCount { count: count as u64, blocks: (2 * k_max + 1) as u64, block_cells: n_cells as u64 })
}

/// `1 − 4Var/E²`, the second-moment lower bound on `P{X ≥ E/2}`.
pub fn second_moment_bound(mean: f64, var: f64) -> f64 {
    1.0 - 4.0 * var / (mean * mean)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub big_r: f64,
    pub r: f64,
    pub gamma: f64,
    pub block_cells: u64,
    pub blocks: u64,
    /// Probability of the target pair in one cell.
    pub p_cell: f64,
    pub p_block: f64,
    /// `#blocks · p_block`.
    pub expected_exact: f64,
    /// `p_block·⌊(R − 1)/r⌋`.
    pub expected_floor: f64,
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// `(mean − expected_floor)/std_error`, with the binomial standard
    /// error when the sample variance vanishes.
    pub z_floor: f64,
    pub z_exact: f64,
    /// Empirical `P{X ≥ E/2}` with `E = expected_exact`.
    pub p_half: f64,
    /// `1 − 4Var/E²` with the exact binomial variance.
    pub bound: f64,
    pub bound_applicable: bool,
    pub bound_holds: bool,
}

/// Counts favorable blocks in `n_samples` independent media drawn from
/// `law`, target `(λ, θ*)`. Sample `i` uses seed `derive_seed(seed0, 0x424c, i)`.
pub fn block_count_experiment<E: Executor>(
    exec: &E,
    law: &CellLaw,
    big_r: f64,
    r: f64,
    gamma: f64,
    n_samples: usize,
    seed0: u64,
) -> Result<BlockReport> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let lat = block_lattice(r, gamma)?;
    let k_max = block_range(big_r, r)?;
    let n_cells = round(2.0 * r / gamma) as i64;
    let first = lat.index((-(2 * k_max) as f64 * r - r) / gamma + 0.5 * lat.width);
    let window = [first, first + (2 * k_max + 1) * n_cells - 1];
    let target = law.bounds().favorable();
    let counts = exec.map(n_samples, |i| {
        let spec = MediumSpec::Checkerboard {
            law: law.clone(),
            seed: derive_seed(seed0, 0x424c, i as u64),
            window,
            plants: Vec::new(),
            lattice: lat,
        };
        count_favorable_blocks(&spec.realize()?, big_r, r, gamma, target)
    });
    let counts: Vec<BlockCount> = counts.into_iter().collect::<Result<_>>()?;
    let blocks = counts[0].blocks;
    let p_cell = law.favorable_probability();
    let p_block = pow(p_cell, n_cells as f64);
    let expected_exact = blocks as f64 * p_block;
    let expected_floor = p_block * floor((big_r - 1.0) / r);
    let n = n_samples as f64;
    let mean = counts.iter().map(|c| c.count as f64).sum::<f64>() / n;
    let variance = counts.iter().map(|c| (c.count as f64 - mean) * (c.count as f64 - mean)).sum::<f64>() / (n - 1.0);
    let binom_var = blocks as f64 * p_block * (1.0 - p_block);
    let se = sqrt(if variance > 0.0 { variance } else { binom_var } / n);
    let z = |e: f64| if se > 0.0 { (mean - e) / se } else if mean == e { 0.0 } else { f64::INFINITY };
    let p_half = counts.iter().filter(|c| c.count as f64 >= 0.5 * expected_exact).count() as f64 / n;
    let bound = second_moment_bound(expected_exact, binom_var);
    let bound_applicable = expected_exact >= 2.0;
    // Allow three binomial standard errors of the empirical frequency.
    let slack = 3.0 * sqrt((bound.clamp(0.0, 1.0) * (1.0 - bound.clamp(0.0, 1.0))) / n);
    Ok(BlockReport {
        big_r,
        r,
        gamma,
        block_cells: n_cells as u64,
        blocks,
        p_cell,
        p_block,
        expected_exact,
        expected_floor,
        samples: n_samples,
        mean,
        variance,
        std_error: se,
        z_floor: z(expected_floor),
        z_exact: z(expected_exact),
        p_half,
        bound,
        bound_applicable,
        bound_holds: !bound_applicable || p_half + slack >= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    #[test]
    fn lattice_choice_follows_parity() {
        assert_eq!(block_lattice(1.5, 0.5).unwrap(), Lattice::SITES);
        assert_eq!(block_lattice(1.5, 1.0).unwrap(), Lattice::CENTERED);
        assert!(matches!(block_lattice(1.5, 0.7), Err(Error::Alignment(_))));
    }

    #[test]
    fn constant_favorable_medium_counts_every_block() {
        let law = CellLaw::point(1.0, 1.0).unwrap();
        let rep = block_count_experiment(&Sequential, &law, 40.0, 1.5, 0.5, 4, 1).unwrap();
        // K = ⌊37.5/3⌋ = 12.
        assert_eq!(rep.blocks, 25);
        assert_eq!(rep.mean, 25.0);
        assert_eq!(rep.variance, 0.0);
    }

    #[test]
    fn planted_block_is_found_exactly_once() {
        let law = CellLaw::four_point(1.0, 4.0, 1.0, 2.0).unwrap();
        let spec = MediumSpec::Explicit {
            lattice: Lattice::CENTERED,
            z_min: -40,
            cells: alloc::vec![Cell { a: 4.0, theta: 2.0 }; 81],
            bounds: law.bounds(),
        };
        let mut m = spec.realize().unwrap();
        let fav = law.bounds().favorable();
        // Block x = 2r = 3 with r = 1.5, γ = 1: cells 2..=4.
        m.plant(2, 4, fav).unwrap();
        let c = count_favorable_blocks(&m, 20.0, 1.5, 1.0, fav).unwrap();
        assert_eq!((c.count, c.blocks), (1, 11));
        m.plant(3, 5, fav).unwrap();
        assert_eq!(count_favorable_blocks(&m, 20.0, 1.5, 1.0, fav).unwrap().count, 1);
    }
}
