// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

//! Cavity-field simulator for a coherently prepared, nondegenerate Y-shaped
//! four-level correlated emission laser.
//!
//! The atoms are injected in a superposition of the two upper levels and the
//! ground level; after adiabatic elimination the three cavity modes obey a
//! master equation with gain on modes 2 and 3, loss on mode 1, and pairwise
//! cross terms. The crate is organised around that master equation:
//!
//! * [`model`] turns the preparation (η₁, η₂) into populations, coherences and
//!   the seven prefactors `A..G`.
//! * [`dynamics`] propagates the closed set of normally ordered second moments
//!   through the drift/diffusion form of the equivalent Langevin system, both
//!   in closed form (eigenbasis of the drift) and by direct integration, and
//!   solves the Lyapunov steady state.
//! * [`fock_oracle`] integrates the full density matrix on a truncated
//!   three-mode Fock space and serves as the independent reference.
//! * [`entanglement`] builds quadrature covariance matrices and evaluates the
//!   three variance-sum inseparability inequalities, including sweeps over the
//!   preparation triangle.
//! * [`export`] holds the CSV and JSON layouts written by the CLI.

// Negated comparisons such as `!(x > 0.0)` are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entanglement;
pub mod export;
pub mod fock_oracle;
pub mod model;
mod ode;

pub use dynamics::{Backend, DiffusionMatrix, DriftMatrix, EigenSystem, SecondMoments, Stability};
pub use entanglement::{Bipartition, CovarianceMatrix, Gains, VlfReport};
pub use fock_oracle::{DensityState, FockConfig};
pub use model::{AtomPreparation, ModelParams, Prefactors};

/// Absolute tolerance used when deciding whether an inversion pair sits on the
/// edge of the physical triangle.
pub const TRIANGLE_TOL: f64 = 1e-12;
