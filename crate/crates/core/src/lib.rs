//! Pseudo-spectral simulation and transverse-stability analysis for cubic
//! KP-type models of anti-plane shear waves in nonlocal elastic media.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernels`]: kernel symbols `β̂` and the multipliers derived from them;
//! * [`spectral`]: periodic grids, transforms and dealiased cubic products;
//! * [`models`]: the model equations as Fourier-space right-hand sides;
//! * [`waves`]: line solitary waves and their transverse perturbations;
//! * [`solver`]: ETDRK4 and RK4 time stepping with invariant monitors;
//! * [`stability`]: perturbation formulas, the linearized eigenvalue pencil
//!   and growth-rate measurement from simulations.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod kernels;
pub mod models;
pub mod solver;
pub mod spectral;
pub mod stability;
pub mod waves;

pub use error::{Error, Result};
pub use exec::Execution;
pub use kernels::{DispersionMode, DispersionQuery, KernelRegistry, KernelSpec, RadialSymbol};
pub use models::{Evaluator, ModelSpec, ModelTag, Projection, TransportOperator};
pub use spectral::{Grid, SpectralField};
