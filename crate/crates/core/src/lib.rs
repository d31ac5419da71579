//! Spectral tools for rotating-slipping solutions of the binormal flow in
//! Euclidean space and in the Minkowski model of hyperbolic space.

pub mod continuation;
pub mod error;
pub mod evolve;
pub mod fourier;
pub mod kida;
pub mod operator;
pub mod reconstruct;
pub mod spectral;

pub use error::{Error, ErrorKind, Result};
pub use fourier::{FourierProfile, GridValues};
pub use operator::{Geometry, ProblemParams};
pub use spectral::RootBranch;
