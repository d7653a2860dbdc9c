//! Fractional Navier-Stokes turbulence laboratory.
//!
//! The crate bundles four layers that share one set of conventions:
//!
//! - [`scaling`]: closed-form spectrum, energy-flux and mean-square-displacement
//!   exponents for the space/time fractional orders `(beta, mu)`.
//! - [`grid`], [`operators`], [`mittag_leffler`]: periodic spectral fields and the
//!   fractional operators acting on them.
//! - [`solver`]: a 2D pseudo-spectral vorticity solver with fractional-Laplacian
//!   dissipation and an optional fractional-time memory term.
//! - [`diffusion`] and [`analysis`]: stochastic anomalous transport and the
//!   estimators that turn fields and ensembles back into exponents.

pub mod analysis;
pub mod diffusion;
pub mod error;
pub mod grid;
pub mod mittag_leffler;
pub mod operators;
pub mod rng;
pub mod scaling;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{GridSpec, SpectralField};
pub use scaling::{FractionalOrders, Regime, ScalingPrediction};
