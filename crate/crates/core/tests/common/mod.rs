#![allow(dead_code)]

use helmholtz_dd::coefficients::ProblemParameters;
use helmholtz_dd::fespace::FeSpace;
use helmholtz_dd::linalg::{CsrMatrix, DenseMatrix};
use helmholtz_dd::mesh::{CoarseMesh, FineMesh};
use helmholtz_dd::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn space(m: usize, r: usize, p: usize) -> FeSpace {
    let mesh = FineMesh::with_factor(&CoarseMesh::fixed(m).unwrap(), r).unwrap();
    FeSpace::new(mesh, p).unwrap()
}

pub fn homogeneous(k: f64, eps: f64) -> ProblemParameters {
    ProblemParameters::homogeneous(k, eps).unwrap()
}

/// Row-major dense copy as plain vectors.
pub fn dense_rows(a: &CsrMatrix) -> Vec<Vec<C64>> {
    let mut out = vec![vec![C64::new(0.0, 0.0); a.ncols()]; a.nrows()];
    for (i, row) in out.iter_mut().enumerate() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            row[j] += v;
        }
    }
    out
}

pub fn dense_from_rows(rows: &[Vec<C64>]) -> DenseMatrix {
    DenseMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

/// Gaussian elimination with partial pivoting on a copy of `a`.
pub fn gauss_solve(a: &[Vec<C64>], b: &[C64]) -> Vec<C64> {
    let n = b.len();
    let mut m: Vec<Vec<C64>> = a.to_vec();
    let mut x = b.to_vec();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| m[i][c].norm().total_cmp(&m[j][c].norm()))
            .unwrap();
        m.swap(c, piv);
        x.swap(c, piv);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in c..n {
                let t = m[c][j];
                m[i][j] -= f * t;
            }
            let t = x[c];
            x[i] -= f * t;
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= m[i][j] * x[j];
        }
        x[i] = acc / m[i][i];
    }
    x
}

/// Dense inverse by solving for each unit vector.
pub fn gauss_inverse(a: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        cols.push(gauss_solve(a, &e));
    }
    (0..n)
        .map(|i| (0..n).map(|j| cols[j][i]).collect())
        .collect()
}

pub fn matvec(a: &[Vec<C64>], x: &[C64]) -> Vec<C64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn max_diff(x: &[C64], y: &[C64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

pub fn max_norm(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm()).fold(0.0, f64::max)
}

/// `y^* x`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// `y^T x` without conjugation.
pub fn bilinear(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
