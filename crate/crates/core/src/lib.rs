//! Numerical verification of closed-form identities for the fractional
//! Laplacian, antisymmetric barriers, Poisson kernels, Bochner lifting,
//! moving-plane geometry and fractional perimeters.

pub mod bochner;
pub mod counterexamples;
pub mod error;
pub mod fraclap;
pub mod geometry;
pub mod perimeter;
pub mod poisson;
pub mod quadrature;
pub mod report;
pub mod specfun;
pub mod suites;

pub use error::{Error, Result};
pub use specfun::FracParams;
