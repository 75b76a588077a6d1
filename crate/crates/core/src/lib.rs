//! Square-wave modulated (Floquet) two- and three-level open systems.
//!
//! Stroboscopic Lindblad steady states, closed-form two-level results,
//! QI/ATS lineshape models, spectrum fits with AIC weights, and parameter
//! scans. Everything is dimensionless in units of the 1→0 decay rate γ10.
//!
//! Superoperators act on column-stacked density matrices:
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod cli;
mod error;
pub mod fitting;
pub mod lineshape;
pub mod model;
pub mod ode;
pub mod propagation;
pub mod quantum;
pub mod repro;
pub mod scans;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Worker count cap read by the scan layer.
pub const THREADS_ENV: &str = "FLOQUET_QI_THREADS";
