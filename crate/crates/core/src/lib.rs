//! Numerics for fractional Brownian motion written as a diffusion equation
//! whose diffusivity solves a nonlinear fractional equation.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`fraccalc`]: Riemann–Liouville derivatives and integrals, exact power
//!   rules, a Grünwald–Letnikov scheme and a singularity-removing quadrature.
//! * [`diffusivity`]: the law `D(t) = 2HC t^(2H-1)`, the coupling constant
//!   `k`, and residual certificates for the fractional equations `D` obeys.
//! * [`fbm`]: exact samplers (Cholesky, circulant embedding, iterated
//!   composition) and ensemble statistics.
//! * [`densities`]: closed-form and quadrature densities.
//! * [`pdesolve`]: Crank–Nicolson and flux-limited transport solvers plus
//!   finite-difference residual checkers.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod densities;
pub mod diffusivity;
mod error;
pub mod fbm;
mod fft;
pub mod fraccalc;
pub mod grid;
mod linalg;
pub mod pdesolve;
pub mod quadrature;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use diffusivity::{HurstSpec, Regime, ResidualReport};
pub use error::{Error, Result};
pub use grid::{GridFunction, SpaceGrid, SpaceTimeField, UniformTimeGrid};
