//! Spectral toolkit for the 3-D incompressible Navier-Stokes equations on
//! the periodic box.
//!
//! The crate provides:
//!
//! * [`field`] — real vector fields in collocation and Fourier form, with
//!   Leray projection, dealiasing, and divergence;
//! * [`generators`] — Beltrami, Taylor-Green, and seeded random solenoidal
//!   test fields;
//! * [`operators`] — curl, fractional powers of `A = -Δ`, and the bounded
//!   compositions built from them, realized as exact spectral multipliers;
//! * [`norms`] — lattice `L^p`, fractional Sobolev, and `L^θ`-in-time norms;
//! * [`solver`] — an integrating-factor RK4 Galerkin solver for the
//!   projected equations, with energy- and weak-form residual checks;
//! * [`criteria`] — regularity-criterion specifications, evaluation over
//!   trajectories, and the blow-up indicator.
//!
//! Everything is `no_std` + `alloc`; all operations are pure functions of
//! immutable inputs and safe to evaluate concurrently.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod criteria;
pub mod fft;
pub mod field;
pub mod generators;
pub mod grid;
pub mod norms;
pub mod operators;
mod rng;
pub mod solver;

pub use field::{FieldMeta, PhysicalVectorField, SpectralScalarField, SpectralVectorField};
pub use grid::GridSpec;
pub use norms::{NormSpec, TimeSeries};
pub use operators::FractionalOrder;
pub use solver::{SolverConfig, Trajectory};
