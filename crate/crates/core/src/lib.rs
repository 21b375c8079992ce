//! Spectral operators on the flat torus T^n = R^n / 2πZ^n.
//!
//! Functions are represented by their Fourier coefficients on a symmetric
//! frequency box. On that side the Laplacian, its resolvent
//! T = (Δ + 1)^{-1} and the finite-rank truncations T_N are all diagonal,
//! which makes their norms, spectra and the H¹ ↪ L² compactness estimate
//! exactly checkable.
//!
//! - [`lattice`]: the integer frequency lattice, Euclidean balls, level multiplicities
//! - [`transform`]: grid ↔ coefficient transforms (FFT and direct-sum oracle)
//! - [`operators`]: Fourier multipliers and Sobolev norms
//! - [`spectral`]: spectra, truncation error, power-iteration norm estimates
//! - [`embedding`]: tail bounds and Cauchy-subsequence extraction
//! - [`solver`]: (Δ + 1)u = f by multiplier and by conjugate gradient

pub mod embedding;
pub mod error;
pub mod lattice;
pub mod operators;
pub mod sampling;
pub mod solver;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
pub use lattice::{Frequency, LatticeBall};
pub use num_complex::Complex64;
pub use operators::{MultiplierSymbol, SobolevOrder};
pub use transform::{FourierTransform, GridField, SpectralField, TorusGrid};
