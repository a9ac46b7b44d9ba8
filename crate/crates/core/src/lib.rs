//! Combinatorial and spectral analysis of nonnegative matrices.
//!
//! The crate computes edge expansion, spectral gaps, mixing times, Schur
//! complements and capacities of irreducible nonnegative matrices, builds the
//! classical families of slowly expanding doubly stochastic matrices, and
//! checks the inequalities that tie these quantities together.
//!
//! Modules follow the data flow: [`core`] holds the matrix carrier and the
//! Perron eigenpair, [`spectra`] the eigen and singular values, [`expansion`]
//! the cut quantities, [`constructions`] the matrix families, [`mixing`] the
//! mixing-time measurements and bounds, [`capacity`] the Laplacian toolkit and
//! [`tensor`] the nonlinear tensor walks.

pub mod capacity;
pub mod constructions;
pub mod core;
pub mod error;
pub mod expansion;
pub mod io;
pub mod linalg;
pub mod mixing;
pub mod random;
pub mod spectra;
pub mod tensor;
pub mod verify;

pub use crate::core::{Matrix, PerronData, Precision, PrecisionConfig};
pub use error::{Error, Result};
