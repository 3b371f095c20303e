//! Hypergeometric functions for root systems.
//!
//! The crate evaluates the spherical function `phi_lambda` at every spectral
//! parameter, including the non-generic ones where the Harish-Chandra
//! expansion degenerates, and provides the c-function, boundedness
//! classification, sharp-estimate checks and a small hypergeometric Fourier
//! transform.

pub mod cfunc;
pub mod cli;
pub mod hyper;
pub mod linalg;
pub mod oracles;
pub mod rootsys;
pub mod series;
pub mod transform;

pub use num_complex::Complex64;
