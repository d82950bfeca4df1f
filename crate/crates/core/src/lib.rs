//! Critical-point solver and hypothesis checker for the nonlocal Kirchhoff
//! equation
//!
//! ```text
//! -(1 + b ∫|∇u|²) Δu + V(x) u = f(x, u),   x ∈ R³
//! ```
//!
//! restricted to radially symmetric functions on a truncated ball B_R with
//! homogeneous Dirichlet data at r = R.
//!
//! The pipeline mirrors the two-solution argument: shift the potential so that
//! `Ṽ = V + V₀ ≥ 1`, certify the mountain-pass geometry by sampling, find a
//! negative-level local minimizer inside a small H-ball, then a positive-level
//! mountain-pass point, and check that the two are distinct.
//!
//! Modules:
//! - [`grid`]: radial nodes, quadrature and face derivatives.
//! - [`model`]: potentials, nonlinearities, the shift `V₀`.
//! - [`functional`]: energy, derivative, Riesz representative, dual norm.
//! - [`geometry`]: sphere sampling, negative-energy point, small-t dip.
//! - [`solvers`]: ball-constrained descent, path deformation, distinctness.
//! - [`checkers`]: sampled verification of (V1), (S1), (S2), (S3), (AR).
//! - [`cli`]: config, report and the `check | geometry | solve` pipelines.

// `!(x > 0.0)` is how validation rejects NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkers;
pub mod cli;
pub mod error;
pub mod functional;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod solvers;

pub use error::{Error, Result};
pub use functional::{EnergyBreakdown, Functional, GradientReport};
pub use grid::{DiffScheme, Field, RadialGrid};
pub use model::{Nonlinearity, Potential, ProblemSpec};
