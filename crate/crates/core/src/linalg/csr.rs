use num_complex::Complex64 as C64;

use super::dense::DenseMatrix;
use crate::{Error, Result};

/// Complex sparse matrix in compressed sparse row storage.
///
/// Column indices are strictly increasing within each row; duplicate
/// entries are summed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<C64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::DimensionMismatch {
                expected: nrows + 1,
                got: row_offsets.len(),
            });
        }
        if row_offsets[0] != 0 || row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter(
                "row offsets must start at 0 and be nondecreasing".into(),
            ));
        }
        let nnz = row_offsets[nrows];
        if col_indices.len() != nnz || values.len() != nnz {
            return Err(Error::DimensionMismatch {
                expected: nnz,
                got: values.len().min(col_indices.len()),
            });
        }
        for i in 0..nrows {
            let cols = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.last().is_some_and(|&c| c >= ncols) {
                return Err(Error::InvalidParameter(format!(
                    "row {i}: column indices must be strictly increasing and < {ncols}"
                )));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Assembles a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut builder = TripletBuilder::with_capacity(nrows, ncols, triplets.len());
        for &(i, j, v) in triplets {
            builder.push(i, j, v);
        }
        builder.build()
    }

    /// Densifies a (small) dense matrix, dropping exact zeros.
    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut b = TripletBuilder::new(a.nrows(), a.ncols());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let v = a[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    b.push(i, j, v);
                }
            }
        }
        b.build()
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[C64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                got: x.len(),
            });
        }
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` into a preallocated buffer. Panics on length mismatch.
    pub fn spmv_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = C64::new(0.0, 0.0);
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    /// `y = A^* x` (conjugate transpose) into a preallocated buffer.
    pub fn adjoint_spmv_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.fill(C64::new(0.0, 0.0));
        for (i, &xi) in x.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v.conj() * xi;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![C64::new(0.0, 0.0); self.nnz()];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &val) in c.iter().zip(v) {
                let slot = next[j];
                cols[slot] = i;
                vals[slot] = val;
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices: cols,
            values: vals,
        }
    }

    /// Largest `|A_ij - A_ji|` over the stored pattern (plain transpose, no conjugation).
    pub fn max_asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).norm());
            }
        }
        worst
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `Σ_t c_t · A_t` for matrices of identical shape.
    pub fn linear_combination(terms: &[(C64, &CsrMatrix)]) -> Result<Self> {
        let (nrows, ncols) = match terms.first() {
            Some((_, m)) => (m.nrows, m.ncols),
            None => return Err(Error::InvalidParameter("empty linear combination".into())),
        };
        let total: usize = terms.iter().map(|(_, m)| m.nnz()).sum();
        let mut b = TripletBuilder::with_capacity(nrows, ncols, total);
        for (c, m) in terms {
            if m.nrows != nrows || m.ncols != ncols {
                return Err(Error::DimensionMismatch {
                    expected: nrows,
                    got: m.nrows,
                });
            }
            for i in 0..nrows {
                let (cols, vals) = m.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    b.push(i, j, *c * v);
                }
            }
        }
        Ok(b.build())
    }

    /// Principal submatrix on the sorted index list `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.ncols];
        for (l, &g) in idx.iter().enumerate() {
            map[g] = l;
        }
        let mut b = TripletBuilder::new(idx.len(), idx.len());
        for (li, &gi) in idx.iter().enumerate() {
            let (cols, vals) = self.row(gi);
            for (&gj, &v) in cols.iter().zip(vals) {
                let lj = map[gj];
                if lj != usize::MAX {
                    b.push(li, lj, v);
                }
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] += v;
            }
        }
        d
    }
}

/// Accumulates coordinate-format entries and compresses them into CSR.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    rows: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self::with_capacity(nrows, ncols, 0)
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        assert!(nrows <= u32::MAX as usize && ncols <= u32::MAX as usize);
        Self {
            nrows,
            ncols,
            rows: Vec::with_capacity(cap),
            cols: Vec::with_capacity(cap),
            vals: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: C64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.rows.push(i as u32);
        self.cols.push(j as u32);
        self.vals.push(v);
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Compresses into CSR. Duplicates are summed in insertion order, so two
    /// entries fed by the same contributions in the same order compare equal.
    pub fn build(self) -> CsrMatrix {
        let n = self.nrows;
        let mut offsets = vec![0usize; n + 1];
        for &r in &self.rows {
            offsets[r as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        // bucket by row, stable
        let mut next = offsets.clone();
        let mut order = vec![0u32; self.vals.len()];
        for (t, &r) in self.rows.iter().enumerate() {
            order[next[r as usize]] = t as u32;
            next[r as usize] += 1;
        }
        drop(next);

        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::with_capacity(self.vals.len() / 2);
        let mut values = Vec::with_capacity(self.vals.len() / 2);
        let mut scratch: Vec<(u32, u32)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend(
                order[offsets[i]..offsets[i + 1]]
                    .iter()
                    .map(|&t| (self.cols[t as usize], t)),
            );
            // stable on insertion index, so summation order is deterministic
            scratch.sort_unstable();
            let mut k = 0;
            while k < scratch.len() {
                let col = scratch[k].0;
                let mut acc = C64::new(0.0, 0.0);
                while k < scratch.len() && scratch[k].0 == col {
                    acc += self.vals[scratch[k].1 as usize];
                    k += 1;
                }
                col_indices.push(col as usize);
                values.push(acc);
            }
            row_offsets.push(col_indices.len());
        }
        CsrMatrix {
            nrows: n,
            ncols: self.ncols,
            row_offsets,
            col_indices,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_spmv() {
        let x = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        assert_eq!(CsrMatrix::identity(3).spmv(&x).unwrap(), x);
    }

    #[test]
    fn zero_matrix_spmv() {
        let x = vec![c(3.0, -2.0), c(0.5, 1.0)];
        let y = CsrMatrix::zeros(4, 2).spmv(&x).unwrap();
        assert_eq!(y, vec![c(0.0, 0.0); 4]);
    }

    #[test]
    fn spmv_rejects_wrong_length() {
        let err = CsrMatrix::identity(3).spmv(&[c(1.0, 0.0)]).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                got: 1
            }
        ));
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            &[
                (0, 1, c(1.0, 0.0)),
                (0, 1, c(0.0, 2.0)),
                (1, 0, c(3.0, 0.0)),
            ],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), c(1.0, 2.0));
        assert_eq!(m.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn new_validates_structure() {
        assert!(CsrMatrix::new(2, 2, vec![0, 1, 2], vec![1, 0], vec![c(1.0, 0.0); 2]).is_ok());
        assert!(CsrMatrix::new(2, 2, vec![0, 2, 2], vec![1, 0], vec![c(1.0, 0.0); 2]).is_err());
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![2], vec![c(1.0, 0.0)]).is_err());
        assert!(CsrMatrix::new(2, 2, vec![0, 1], vec![0], vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn transpose_twice_is_identity() {
        let m = CsrMatrix::from_triplets(
            3,
            2,
            &[
                (0, 1, c(1.0, 1.0)),
                (2, 0, c(-2.0, 0.5)),
                (1, 1, c(0.0, 3.0)),
            ],
        );
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose().get(1, 0), c(1.0, 1.0));
    }
}
