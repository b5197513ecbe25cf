//! Self-affine iterated function systems `{Mv - u, Mv + u}`: spectral
//! classification of the set of uniqueness, determinant criteria for
//! interior and connectivity, attractor rendering and per-address
//! uniqueness certification.

pub mod attractor;
pub mod classifier;
pub mod constants;
pub mod error;
pub mod linalg;
pub mod scalar;
pub mod spectral;
pub mod uniqueness;

pub use error::{Error, Result};
pub use scalar::{ArithmeticMode, Rational, Scalar};
