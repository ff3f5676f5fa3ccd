//! Estimation of numerical sparsity and effective rank from randomized
//! linear measurements, with adaptive basis-pursuit recovery.
//!
//! The library is organized around a small number of building blocks:
//!
//! * [`stable`] — symmetric-stable (Cauchy / Gaussian) measurement ensembles
//!   with deterministic, splittable seeding.
//! * [`measures`] — exact computation of the numerical sparsity
//!   `s(x) = ||x||_1^2 / ||x||_2^2`, the effective rank
//!   `r(X) = tr(X)^2 / ||X||_F^2`, and best T-term approximations.
//! * [`sketch`] — the two-ensemble sketch of a vector and the dimension-free
//!   confidence interval for `s(x)`.
//! * [`rank`] — identity-trace and Gaussian-probe sketches of a PSD matrix
//!   and the confidence interval for `r(X)`.
//! * [`recovery`] — the adaptive measurement budget, seed-streamed
//!   measurement operators, and a basis-pursuit solver.
//! * [`adversarial`] — the dense null-space perturbation showing why
//!   deterministic designs cannot estimate sparsity, and the associated
//!   minimax lower-bound formulas.
//! * [`experiments`] — deterministic simulation harnesses (relative-error
//!   sweeps, reconstruction runs, coverage studies) with CSV/SVG output.

pub mod adversarial;
pub(crate) mod dense;
pub mod error;
pub mod experiments;
pub mod io;
pub mod matrix;
pub mod measures;
pub mod quantile;
pub mod rank;
pub mod recovery;
pub mod rng;
pub mod signal;
pub mod sketch;
pub mod stable;

pub use error::{Error, Result};
pub use matrix::PsdMatrix;
pub use rng::RngStream;
pub use signal::Signal;
pub use stable::StableKind;
