use std::ops::{Index, IndexMut};

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use super::csr::CsrMatrix;
use crate::{Error, Result};

/// Relative tolerance on `max |H_ij - conj(H_ji)|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            values: vec![C64::new(0.0, 0.0); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(
            n,
            n,
            |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) },
        )
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut values = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                values.push(f(i, j));
            }
        }
        Self {
            nrows,
            ncols,
            values,
        }
    }

    pub fn from_row_major(nrows: usize, ncols: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != nrows * ncols {
            return Err(Error::DimensionMismatch {
                expected: nrows * ncols,
                got: values.len(),
            });
        }
        Ok(Self {
            nrows,
            ncols,
            values,
        })
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(nrows: usize, columns: &[Vec<C64>]) -> Result<Self> {
        let mut m = Self::zeros(nrows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != nrows {
                return Err(Error::DimensionMismatch {
                    expected: nrows,
                    got: col.len(),
                });
            }
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                got: x.len(),
            });
        }
        Ok((0..self.nrows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.ncols != rhs.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                got: rhs.nrows,
            });
        }
        let prod = self.to_faer() * rhs.to_faer();
        Ok(Self::from_faer(prod.as_ref()))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    /// `(X + X^*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert_eq!(self.nrows, self.ncols);
        Self::from_fn(self.nrows, self.ncols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows.min(self.ncols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `max |H_ij - conj(H_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            for j in i..self.ncols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and
    /// the matrix whose columns are the matching orthonormal eigenvectors.
    pub fn hermitian_eig(&self) -> Result<(Vec<f64>, DenseMatrix)> {
        self.check_hermitian()?;
        let a = self.to_faer();
        let eig = a
            .as_ref()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let s = eig.S().column_vector();
        let vals: Vec<f64> = (0..self.nrows).map(|i| s[i].re).collect();
        Ok((vals, Self::from_faer(eig.U())))
    }

    /// Ascending eigenvalues of a Hermitian matrix.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        self.check_hermitian()?;
        let vals = self
            .to_faer()
            .as_ref()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        Ok(vals)
    }

    /// Eigenvalues of a general square matrix (unordered).
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        assert_eq!(self.nrows, self.ncols);
        self.to_faer()
            .as_ref()
            .eigenvalues()
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))
    }

    fn check_hermitian(&self) -> Result<()> {
        if self.nrows != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                got: self.ncols,
            });
        }
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(())
    }

    pub(crate) fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.nrows, self.ncols, |i, j| self[(i, j)])
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.values[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.values[i * self.ncols + j]
    }
}

/// Square root and inverse square root of a real symmetric positive definite
/// sparse matrix, returned densely as `(D^{1/2}, D^{-1/2})`.
pub fn spd_sqrt(d: &CsrMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let dense = d.to_dense();
    if dense.as_slice().iter().any(|v| v.im != 0.0) {
        return Err(Error::InvalidParameter(
            "spd_sqrt expects a real symmetric matrix".into(),
        ));
    }
    let (vals, vecs) = dense.hermitian_eig()?;
    if let Some(&bad) = vals.iter().find(|&&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite { eigenvalue: bad });
    }
    let n = vals.len();
    let u = vecs.to_faer();
    let scaled = |f: &dyn Fn(f64) -> f64| {
        let us = Mat::from_fn(n, n, |i, j| u[(i, j)] * f(vals[j]));
        DenseMatrix::from_faer((us * u.adjoint()).as_ref())
    };
    Ok((scaled(&f64::sqrt), scaled(&|l: f64| 1.0 / l.sqrt())))
}
