//! Solvable crypto-Hermitian chain models near a quantum catastrophe.
//!
//! The crate builds the N×N chain Hamiltonians whose spectrum degenerates at an
//! N-fold exceptional point, constructs their left eigenvectors in closed form
//! as homogeneous polynomials, assembles the hermitizing metric as a matrix
//! polynomial in `z = sqrt(1 - lambda)`, solves for admissible observables and
//! provides an independent dense eigensolver to check all of it.

pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod metric;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod polyring;
pub mod scalar;
pub mod tolerance;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, Matrix, RealMatrix};
pub use tolerance::Tolerances;
