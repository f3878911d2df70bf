//! Potentials with two prescribed energy levels.
//!
//! Given a generating function `xi(x)` (the ratio of the two eigenfunctions)
//! and two energies `E1 < E2`, this crate builds the potential that has both
//! energies in its spectrum, predicts which excited states they are from
//! the zeros, poles and critical points of `xi`, and checks the prediction
//! with an independent finite-difference eigensolver.
//!
//! Units are `hbar = 2m = 1`, so the Hamiltonian is `-d^2/dx^2 + U(x)`.

pub mod catalog;
pub mod classify;
pub mod construct;
pub mod deform;
mod error;
pub mod exprlang;
pub mod pipeline;
pub mod quadrature;
pub mod radial;
pub mod spectral;

pub use error::{Error, Result};
