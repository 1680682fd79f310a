//! Monotone finite-volume schemes for one-dimensional scalar conservation laws
//! driven by rough initial data.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: uniform grids, cell-average projection and restriction.
//! * [`flux`]: analytic fluxes and two-point monotone numerical fluxes.
//! * [`solver`]: explicit first-order time stepping.
//! * [`initial_data`]: splitmix64/Box–Muller streams and fractional Brownian
//!   motion by random midpoint displacement.
//! * [`diagnostics`]: total variation, Lip⁺ seminorm, L¹ distances, error
//!   bounds and rate fitting.
//! * [`experiments`]: seeded ensemble studies producing tabular results.
//! * [`cli`]: configuration files, CSV/manifest output and the command runner.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod flux;
pub mod initial_data;
pub mod mesh;
pub mod solver;

pub use error::{Error, Result};
pub use flux::{FluxSpec, NumericalFlux, NumericalFluxKind};
pub use mesh::{CellField, Grid};
pub use solver::{Boundary, SchemeConfig, Trajectory};
