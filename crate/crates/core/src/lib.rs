//! Matrix-free FFT solvers for the indefinite Helmholtz equation on boxes and
//! Krylov eigenanalysis of the discrete Dirichlet-to-Neumann map.

pub mod bench;
pub mod dense;
pub mod dft;
pub mod error;
pub mod extension;
pub mod grid;
pub mod helmholtz;
pub mod krylov;
pub mod operators;

pub use error::{Error, Result};
pub use grid::{AxisBc, Boundary, Field, Grid};
pub use num_complex::Complex64;
