//! Simulator and verifier for three-dimensional axisymmetric incompressible
//! MHD with a purely swirling magnetic field.
//!
//! The state is evolved in the reduced variables `Pi = B^theta / r` and
//! `Omega = omega^theta / r`; the velocity is recovered from a stream
//! function `psi^theta / r` through a five-dimensional radial Laplacian.
//! The [`diagnostics`] module turns the energy law, the maximum principle
//! for `Pi` and the a-priori inequalities into time-series checks, and
//! [`apweight`] probes the Muckenhoupt condition for `|y'|^alpha` on `R^5`.

pub mod advect;
pub mod apweight;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod initial;
pub mod par;
pub mod poisson;
pub mod snapshot;

pub use error::{BlowUpReport, Error, Result};
pub use grid::{make_grid, norm_lp, Boundary, Grid, Parity, ScalarField, VelocityField};
