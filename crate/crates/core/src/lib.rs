//! Numerical spectral analysis of the radial operators obtained by Fourier
//! decomposition of the linearized Oseen vortex.
//!
//! The crate is organised bottom-up: scalar special functions, a staggered
//! radial grid, operator assembly, a dense linear-algebra layer, the derived
//! bounds (spectral abscissa, pseudospectral gap, numerical range) and a
//! registry of executable identity/inequality checks.

pub mod analysis;
pub mod discretization;
pub mod error;
pub mod operators;
pub mod solver;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
