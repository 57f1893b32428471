//! Multilevel (quasi-)Monte Carlo estimation for elliptic PDEs with
//! lognormal diffusion coefficients.
//!
//! The crate estimates statistics of a quantity of interest of
//!
//! ```text
//!     -div( a(x, y) grad u(x, y) ) = f(x)   on D = [0,1]^2,  u = 0 on the boundary,
//! ```
//!
//! where `a = exp(z)` and `z` is a mean-zero Gaussian random field with
//! Matérn covariance, sampled through a truncated Karhunen–Loève expansion.
//! Estimation runs on a geometric hierarchy of finite-difference grids and
//! supports three estimator families:
//!
//! * plain multilevel Monte Carlo (independent samples per level),
//! * multilevel quasi-Monte Carlo with randomly shifted rank-1 lattice
//!   sequences, and
//! * the recycling variant that reuses the coarse iterates produced by the
//!   Full Multigrid solver as additional coarse-level samples.
//!
//! Variances are always estimated from the spread across independent random
//! shifts (or independent sample groups in the Monte Carlo case), which keeps
//! the variance estimate valid under sample recycling. The adaptive driver
//! doubles sample counts where the variance-to-cost ratio is largest and adds
//! levels until both the variance and bias targets are met.
//!
//! Everything is deterministic: samples, shifts and Monte Carlo draws are
//! pure functions of `(seed, level, shift, sample)` indices, so results do
//! not depend on thread counts or scheduling.

pub mod error;
pub mod estimator;
pub mod field;
pub mod lattice;
pub mod normal;
pub mod problem;
pub mod rates;
pub mod solver;
pub mod streams;

pub use error::{Error, Result};
