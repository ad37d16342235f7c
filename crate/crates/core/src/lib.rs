//! Frequency spectra of data-encoding strategies for parametrized quantum
//! circuits, the generalized trigonometric polynomial (GTP) hypothesis class
//! they induce, and complexity / generalization bounds over that class.
//!
//! Module map:
//!
//! - [`operators`]: Hermitian operators, spectra, eigenvalue-difference sets.
//! - [`encoding`]: encoding strategies, Minkowski sumsets, cardinality bounds.
//! - [`gtp`]: the GTP model, coefficient conversions, norms.
//! - [`complexity`]: Rademacher complexity, covering nets, Dudley integral.
//! - [`genbounds`]: generalization bounds, sample-size inversion, reports.
//! - [`qsim`]: small statevector simulator and Fourier extraction.
//! - [`learn`]: risks, norm-constrained regression, structural risk minimization.

pub mod complexity;
pub mod encoding;
pub mod error;
pub mod genbounds;
pub mod gtp;
pub mod learn;
pub mod linalg;
pub mod operators;
pub mod qsim;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
