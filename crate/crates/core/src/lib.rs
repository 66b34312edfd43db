//! Heterogeneous Allen–Cahn energies
//!
//! ```text
//! F(u) = ∫ ε/2 · a(x/δ) |u'|² + ε⁻¹ · θ(x/δ) · W(u) dx
//! ```
//!
//! with random or quasi-periodic microstructure: double-well potentials and
//! their surface tension, media (checkerboards, lamp stripes, Liouville
//! stripes, products), homogenization diagnostics, a 1D cell-problem
//! minimizer and Monte-Carlo experiments contrasting the homogenized and the
//! rare-event limits.
//!
//! The crate is `no_std` and only needs `alloc`. Parallelism is injected
//! through [`exec::Executor`].

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod exec;
pub mod experiments;
pub mod homog;
pub mod media;
pub mod numeric;
pub mod profile;
pub mod rng;
pub mod solver;
pub mod wells;

pub use error::{Error, Result};
