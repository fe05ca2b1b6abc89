//! One-level overlapping Schwarz preconditioning (SORAS / ORAS) for degree-`p`
//! Lagrange finite-element discretisations of the heterogeneous Helmholtz
//! equation with absorption on the unit square.
//!
//! The pipeline is
//! [`mesh`] → [`fespace`] → [`decomposition`] → [`preconditioner`] → [`krylov`],
//! with [`analysis`] providing norm and field-of-values diagnostics of the
//! preconditioned matrix.

pub mod analysis;
pub mod coefficients;
pub mod decomposition;
pub mod error;
pub mod fespace;
pub mod krylov;
pub mod linalg;
pub mod mesh;
pub mod preconditioner;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
