//! Numerical laboratory for the rigidity of Hawking mass.
//!
//! * [`sphharm`]: real spherical harmonics, quadrature grids and products.
//! * [`meanfield`]: the equation `Δu = 6 − 6eᵘ` on the round sphere and its
//!   local uniqueness iteration.
//! * [`surfspec`]: curvature and Schrödinger spectra of conformal spheres.
//! * [`rotsym`]: rotationally symmetric 3-metrics, Hawking masses and
//!   centered-sphere isoperimetric profiles.
//! * [`cli`]: the `hawklab` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod meanfield;
pub mod rotsym;
pub mod sphharm;
pub mod surfspec;

pub use error::{Error, Result};
