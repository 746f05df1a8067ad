//! Truncated saddle-free Newton optimization, classical and simulated-quantum.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense symmetric eigensolver, SVD, absolute pseudo-inverse with
//!   magnitude truncation, optimal low-rank inverse.
//! - [`rmt`]: Wishart sampling and the Marchenko–Pastur law, used to split a
//!   spectrum into zero modes, a noise bulk and informative outliers.
//! - [`objectives`]: test functions with exact gradients and Hessians.
//! - [`optimizer`]: gradient descent, Newton, saddle-free Newton and the
//!   truncated saddle-free Newton iteration.
//! - [`qsim`]: exact desk-scale simulation of the quantum step pipeline
//!   (density-matrix preparation, density-matrix exponentiation, phase
//!   estimation, conditional inversion, signed readout).
//! - [`rsvd`]: column-sampling approximate SVD and its error bounds.
//! - [`dataio`]: CSV ingestion, explained-variance PCA and the
//!   outlier-vs-PCA report.

pub mod dataio;
pub mod linalg;
pub mod objectives;
pub mod optimizer;
pub mod qsim;
pub mod rmt;
pub mod rng;
pub mod rsvd;

pub use linalg::{EigenDecomposition, LinalgError, Matrix, SymmetricMatrix, TruncatedSpectrum};
