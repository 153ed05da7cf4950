//! Structure-preserving cosine pseudo-spectral solvers for the sine-Gordon
//! equation `u_tt - Lap u + phi(x, y) sin u = 0` on rectangles with
//! homogeneous Neumann boundaries (1-D problems run as a degenerate strip).
//!
//! The spatial discretization diagonalizes the Neumann Laplacian with fast
//! cosine transforms on either cell centers or cell vertices; time stepping
//! combines a Crank-Nicolson-type prediction-correction core with one of two
//! scalar closures that enforce exact discrete energy conservation: a
//! post-step projection or a supplementary-variable relaxation.

pub mod bench;
pub mod error;
pub mod grid;
pub mod integrators;
pub mod model;
mod par;
pub mod rootfind;
pub mod spectral;

pub use error::{Error, Result};
