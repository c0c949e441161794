//! Pseudo-spectral solver for the time-fractional Allen-Cahn equation
//!
//!   D^alpha phi = eps^2 Lap phi - (phi^3 - phi) + source,   0 < alpha <= 1,
//!
//! where D^alpha is the Caputo derivative, discretized in time with scalar
//! auxiliary variable (SAV) schemes built on nonuniform L1-type stencils and
//! in space with Fourier or cosine bases on rectangles.
//!
//! Layout:
//! - [`mesh`]: time meshes (uniform, graded, composite) and stencil weights;
//! - [`spectral`]: grids, transforms, Laplacian, Helmholtz solves;
//! - [`models`]: potential, manufactured solutions, initial conditions;
//! - [`sav`]: the two time steppers and their energy diagnostics;
//! - [`experiments`]: convergence studies, benchmark and coarsening runs;
//! - [`config`] / [`output`]: CLI-facing run descriptions and CSV writers.

pub mod config;
pub mod error;
pub mod experiments;
pub mod mesh;
pub mod models;
pub mod output;
pub mod sav;
pub mod special;
pub mod spectral;

pub use error::Error;
