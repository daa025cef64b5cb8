//! Arithmetic (adelic) cut-and-project point sets and their fine-scale
//! statistics.
//!
//! The library generates point sets such as the visible lattice points, or
//! lattice points with k-free coordinates, defined by congruence windows in
//! the finite adeles; it measures directional gap distributions, local
//! direction counts and Lorentz-gas free path lengths, and cross-validates
//! the empirical distributions against Monte Carlo evaluation of the
//! corresponding limit laws on level-N marked-lattice spaces.
//!
//! Module map:
//! * [`window`] — congruence windows, exact Haar measures, ε-truncation,
//!   residue reduction and rational shifts.
//! * [`pointset`] — sieved enumeration of realized point sets in annuli.
//! * [`directions`] — radial projections, local direction counts, gap
//!   distributions.
//! * [`lorentz`] — free path lengths against ρ-ball scatterer fields and
//!   their Boltzmann–Grad statistics.
//! * [`homogeneous`] — Haar sampling of level-N marked (affine) lattices,
//!   Siegel / Siegel–Weil mean-value checks and limit-law Monte Carlo.
//! * [`stats`] — empirical CDFs, integer-count laws, survival curves.

pub mod bitset;
pub mod directions;
pub mod homogeneous;
pub mod lorentz;
pub mod pointset;
pub mod primes;
pub mod rng;
pub mod stats;
pub mod window;

pub use window::{CongruenceWindow, LocalCondition, LocalMode, ResidueWindow, TailFamily};
