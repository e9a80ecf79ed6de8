//! Arbitrary even-order implicit leapfrog integrators for the three-field
//! Maxwell system
//!
//!   dp/dt + div(eps E)            = 0
//!   grad p + eps dE/dt - curl H   = 0
//!   mu dH/dt + curl E             = 0
//!
//! on 2D simplicial meshes, discretized with a Whitney-form de Rham complex
//! (orders 1 and 2).  The time integrator `LF_R` is a staggered leapfrog whose
//! spatial couplings are modified by truncated tanh-series corrections; the
//! update is a Cayley-type transform and conserves a discrete energy exactly
//! for every even order `R`.
//!
//! Crate layout:
//! - [`mesh`]      — triangle meshes: structured unit-square generator and a
//!                   `.node`/`.ele` importer, orientation and topology checks.
//! - [`coeffs`]    — exact rational correction coefficients `gamma_s`.
//! - [`feec`]      — finite element complexes: mass matrices, coboundaries,
//!                   projections, evaluation, error norms, quadrature.
//! - [`operators`] — composite operators, scheme couplings `K`/`L`, and the
//!                   assembled block systems for one time step.
//! - [`stepper`]   — bootstrap + interior time stepping, energy tracking,
//!                   convergence drivers.
//! - [`problems`]  — built-in analytic solutions used as benchmarks.
//! - [`io`]        — VTK (legacy ASCII) and Matrix Market writers.
//! - [`cli`]       — command line front end (feature `cli`).

pub mod coeffs;
pub mod feec;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod problems;
pub mod stepper;

#[cfg(feature = "cli")]
pub mod cli;
