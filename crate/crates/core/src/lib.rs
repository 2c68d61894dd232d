//! Quadratic system-bath models: two harmonic oscillators sharing a finite
//! heat bath of independent oscillators, plus the machinery to analyze them.
//!
//! The crate is organized around an explicit (mass, stiffness) representation
//! of quadratic Hamiltonians:
//!
//! * [`quad_model`] builds the one-body and two-body bath Hamiltonians,
//!   transforms to center-of-mass/relative coordinates, and checks structural
//!   claims (lower bounds, independent-oscillator form).
//! * [`bath`] holds spectral-density recipes, the Ohmic discretization, and
//!   the memory kernel of the generalized Langevin equation.
//! * [`spectrum`] performs exact normal-mode analysis: mode frequencies,
//!   equilibrium quantum/classical covariances, and time correlations.
//! * [`dynamics`] integrates trajectory ensembles (symplectic deterministic
//!   runs, white-noise Langevin runs) and checks the memory-kernel equation
//!   against explicit-bath trajectories.
//!
//! Natural units `hbar = k_B = 1` throughout. The crate is `no_std` with
//! `alloc`; all operations are pure functions of their inputs and the values
//! are immutable once constructed.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bath;
pub mod dynamics;
pub mod error;
pub mod quad_model;
pub mod spectrum;

pub use error::{Error, Result};
pub use quad_model::{BathMode, BathSpec, QuadraticSystem, Role, StructureReport};
