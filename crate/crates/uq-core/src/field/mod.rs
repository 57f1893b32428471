//! Gaussian random fields with Matérn covariance, represented by a truncated
//! Karhunen–Loève expansion discretized with the Nyström method.

pub mod bessel;
pub mod jacobi;
pub mod kl;
pub mod matern;
pub mod quadrature;

pub use kl::{build_kl, KLExpansion};
pub use matern::{CovarianceKernel, MaternParams};
pub use quadrature::{build_quadrature, QuadratureGrid};
