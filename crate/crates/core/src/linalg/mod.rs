//! Complex sparse and dense linear algebra.

mod csr;
mod dense;
mod multifrontal;
pub mod ordering;

pub use csr::{CsrMatrix, TripletBuilder};
pub use dense::{spd_sqrt, DenseMatrix, HERMITIAN_TOL};
pub use multifrontal::{factorize, FactorKind, Ordering, SparseFactorization};

use num_complex::Complex64 as C64;

/// Euclidean inner product `y^* x`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
