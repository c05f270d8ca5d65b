//! Heat equation with the dynamical boundary condition `∂_t u + ∂_ν u = 0`
//! in the large diffusion regime `ε ∂_t u = Δu`.
//!
//! Two geometries are supported: the half-space with data depending only on
//! the height `x_N` (reduced to a half-line) and the radial exterior of the
//! unit ball in ℝ³. The solution is split as `u = v + w`, where `w` is
//! harmonic with the boundary dynamics and `v` solves a heat equation with
//! zero boundary values. `v` is the fixed point of
//!
//! ```text
//! Q_ε[v](x,t) = S₁(t/ε)Φ(x) − D_ε[φ_b](x,t) − D̃_ε[v](x,t)
//! ```
//!
//! and depends on itself only through its boundary trace `∂_ν v(∂Ω, t)`, so
//! the Picard iteration runs on a scalar Volterra problem in time.
//!
//! Module map:
//!
//! - [`data`]: the initial-data mini-language
//! - [`domain`]: geometries, grids, sampled functions, traces, `E_ε` and the `X_T` norm
//! - [`kernels`]: erf, image-method heat kernels, boundary semigroup kernels
//! - [`quadrature`]: Gauss–Legendre panels for the weakly singular time integrals
//! - [`operators`]: `S₁`, `S₂`, `F₁`, `F₂`, `D_ε`, `D̃_ε`, `Q_ε`
//! - [`picard`]: the fixed-point solver and field reconstruction
//! - [`oracles`]: closed-form reference values
//! - [`experiments`]: rate studies, lower bounds, the inequality suite
//! - [`cli`]: the `dynbc` command-line front end
//!
//! Every capability has a runnable program under `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cli;
pub mod data;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod operators;
pub mod oracles;
pub mod picard;
pub mod quadrature;

pub use data::{parse_data_spec, DataSpec};
pub use domain::{
    sup_norm, xt_norm, BoundaryTrace, EnergyRecord, Geometry, GeometryKind, SampledFunction,
    SpatialGrid, Tail, TimeGrid,
};
pub use error::{Error, Result};
pub use operators::{PreparedTrace, ProblemData};
pub use picard::{solve, SolutionPair, SolverConfig};


