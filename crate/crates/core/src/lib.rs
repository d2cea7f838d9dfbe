//! First-passage times of one-dimensional diffusions reflected between two
//! boundaries `a < b`.
//!
//! The crate covers the direct problem (Laplace transforms, densities and
//! moments of the hitting time of a barrier `S`), the inverse problem
//! (recovering the law of a random starting point from a prescribed hitting
//! time law), reductions of conjugated diffusions to regulated Brownian
//! motion, and a Monte Carlo simulator used as an independent oracle.
//!
//! The crate is `no_std` and only needs `alloc`. Enable the `std` feature to
//! get `std::error::Error` impls and the std-backed random number machinery.
//!
//! Module map:
//!
//! - [`analytic_bm`]: closed forms for Brownian motion with constant drift.
//! - [`bvp`]: finite-difference solvers for the Laplace-transform and moment
//!   ODE problems of a general reflected diffusion.
//! - [`laplace`]: numerical inversion, forward quadrature and moment
//!   extraction for transforms.
//! - [`ifpt`]: the inverse first-passage solver and its diagnostics.
//! - [`conjugation`]: maps `V` turning a diffusion into regulated BM.
//! - [`montecarlo`]: Euler–Maruyama simulation with reflection by folding.
//! - [`presets`]: the worked transforms and densities used across the crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic_bm;
pub mod bvp;
pub mod conjugation;
mod error;
pub mod ifpt;
pub mod laplace;
pub mod montecarlo;
pub mod presets;
pub mod quadrature;
pub mod special;
mod transform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use transform::{DensityOnInterval, TransformFn};
