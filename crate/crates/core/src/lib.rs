//! Dynamical low-rank solver for the isothermal BGK equation in 2x2D phase
//! space.
//!
//! The distribution is written as f = M(rho,u) g with the deviation g kept as
//! a rank-r factorization g = sum_ij X_i(x) S_ij V_j(v) on doubly periodic
//! grids. Each step advances the moment fields with a conservative update
//! closed by the kinetic fluxes, then runs a first-order IMEX
//! projector-splitting sweep (K, S, L) on the factors; the stiff relaxation is
//! implicit, so step sizes are independent of the Knudsen number eps.
//!
//! Spatial transport is handled either by a Fourier spectral method for
//! smooth regimes or by shock-capturing finite differences (characteristic-
//! wise limited Lax-Wendroff for the factors, a staggered Nessyahu-Tadmor
//! scheme for the moments). A MacCormack solver for the isothermal
//! Navier-Stokes equations serves as the fluid-limit reference.
//!
//! The `scenario` module wires the pieces into runnable setups behind the
//! `lowrank-bgk` command-line binary.

pub mod config;
pub mod error;
pub mod fft;
pub mod fluid;
pub mod grid;
pub mod ksl;
pub mod lowrank;
pub mod moment_solver;
pub mod moments;
pub mod scenario;
pub mod snapshot;
pub mod spline;

pub use config::{Scenario, ScenarioConfig, SolverKind};
pub use error::{Error, Result};
pub use ksl::{Discretization, ScfdFlux};
