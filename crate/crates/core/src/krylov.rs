//! Full GMRES with a Euclidean or energy-weighted inner product.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{axpy, dot, CsrMatrix};
use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Inner product used by the Arnoldi process.
#[derive(Debug, Clone, Copy)]
pub enum InnerProduct<'a> {
    /// `<v, w> = w^* v`.
    Euclidean,
    /// `<v, w> = w^* D v` with `D` symmetric positive definite.
    Weighted(&'a CsrMatrix),
}

impl InnerProduct<'_> {
    /// `D v`, or `None` for the Euclidean product.
    fn weight(&self, v: &[C64]) -> Option<Vec<C64>> {
        match self {
            InnerProduct::Euclidean => None,
            InnerProduct::Weighted(d) => {
                let mut out = vec![ZERO; v.len()];
                d.spmv_into(v, &mut out);
                Some(out)
            }
        }
    }

    /// `<v, w>`.
    pub fn inner(&self, v: &[C64], w: &[C64]) -> C64 {
        match self.weight(v) {
            Some(dv) => dot(&dv, w),
            None => dot(v, w),
        }
    }

    pub fn norm(&self, v: &[C64]) -> f64 {
        self.inner(v, v).re.max(0.0).sqrt()
    }
}

/// Where the preconditioner enters the Krylov operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    /// GMRES on `B^{-1} A x = B^{-1} f`; the residual is preconditioned.
    #[default]
    Left,
    /// GMRES on `A B^{-1} z = f - A x0` from `z = 0`, then
    /// `x = x0 + B^{-1} z`; the residual is the unpreconditioned one.
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            _ => Err(Error::InvalidParameter(format!(
                "unknown preconditioning side '{s}' (expected left or right)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresResult {
    pub iterations: usize,
    /// Relative residual norms in the run's inner product; entry `n` is the
    /// value after `n` iterations, so entry 0 is 1.
    pub residual_history: Vec<f64>,
    pub solution: Vec<C64>,
    pub converged: bool,
}

/// Entries `exp(i theta_j)` with `theta_j` uniform on `[0, 2 pi)`.
pub fn random_initial_guess(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| C64::from_polar(1.0, rng.gen_range(0.0..TAU)))
        .collect()
}

/// Solves `op(x) = rhs` from `x0` by unrestarted GMRES.
///
/// Stops once `||r_n|| / ||r_0|| <= tol` in the norm of `ip`, or after
/// `maxit` iterations.
pub fn gmres<F>(
    op: F,
    rhs: &[C64],
    x0: &[C64],
    ip: InnerProduct<'_>,
    tol: f64,
    maxit: usize,
) -> Result<GmresResult>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    gmres_with_basis(op, rhs, x0, ip, tol, maxit).map(|(res, _)| res)
}

/// As [`gmres`], also returning the Arnoldi basis.
pub fn gmres_with_basis<F>(
    mut op: F,
    rhs: &[C64],
    x0: &[C64],
    ip: InnerProduct<'_>,
    tol: f64,
    maxit: usize,
) -> Result<(GmresResult, Vec<Vec<C64>>)>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    let n = rhs.len();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let mut r = op(x0)?;
    if r.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r.len(),
        });
    }
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = bi - *ri;
    }
    let mut dr = ip.weight(&r);
    let beta = dot(dr.as_deref().unwrap_or(&r), &r).re.max(0.0).sqrt();
    let mut history = vec![1.0];
    if beta == 0.0 {
        let res = GmresResult {
            iterations: 0,
            residual_history: history,
            solution: x0.to_vec(),
            converged: true,
        };
        return Ok((res, Vec::new()));
    }

    // basis vectors and, for a weighted product, their images D v_i
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut weighted: Vec<Vec<C64>> = Vec::new();
    for x in r.iter_mut().chain(dr.iter_mut().flatten()) {
        *x /= beta;
    }
    basis.push(r);
    weighted.extend(dr);

    // Hessenberg columns after rotation, rotations, and rotated rhs
    let mut hess: Vec<Vec<C64>> = Vec::new();
    let mut rot: Vec<(f64, C64)> = Vec::new();
    let mut g = vec![C64::new(beta, 0.0)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < maxit {
        let j = iterations;
        let mut w = op(&basis[j])?;
        let mut h = vec![ZERO; j + 2];
        // modified Gram-Schmidt, twice
        for _ in 0..2 {
            for i in 0..=j {
                let c = dot(&w, weighted.get(i).unwrap_or(&basis[i]));
                h[i] += c;
                axpy(-c, &basis[i], &mut w);
            }
        }
        let dw = ip.weight(&w);
        let hn = dot(dw.as_deref().unwrap_or(&w), &w).re.max(0.0).sqrt();
        h[j + 1] = C64::new(hn, 0.0);
        let column_norm = h.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();

        for (i, &(c, s)) in rot.iter().enumerate() {
            let (a, b) = (h[i], h[i + 1]);
            h[i] = a * c + s * b;
            h[i + 1] = -s.conj() * a + b * c;
        }
        let (c, s, rr) = givens(h[j], h[j + 1]);
        h[j] = rr;
        h[j + 1] = ZERO;
        rot.push((c, s));
        let gj = g[j];
        g[j] = gj * c;
        g.push(-s.conj() * gj);
        hess.push(h);
        iterations += 1;

        let rel = g[j + 1].norm() / beta;
        history.push(rel);
        if rel <= tol {
            converged = true;
            break;
        }
        if hn <= 4.0 * f64::EPSILON * column_norm {
            // invariant subspace: the least-squares solution is exact
            converged = true;
            break;
        }
        basis.push(w.into_iter().map(|x| x / hn).collect());
        weighted.extend(dw.map(|d| d.into_iter().map(|x| x / hn).collect::<Vec<_>>()));
    }

    // back substitution on the triangular factor
    let m = iterations;
    let mut y = vec![ZERO; m];
    for i in (0..m).rev() {
        let mut acc = g[i];
        for k in i + 1..m {
            acc -= hess[k][i] * y[k];
        }
        y[i] = acc / hess[i][i];
    }
    let mut solution = x0.to_vec();
    for (yi, v) in y.iter().zip(&basis) {
        axpy(*yi, v, &mut solution);
    }
    let res = GmresResult {
        iterations,
        residual_history: history,
        solution,
        converged,
    };
    Ok((res, basis))
}

/// Solves `A x = f` by GMRES preconditioned with `prec` (applying `B^{-1}`)
/// on the given side.
#[allow(clippy::too_many_arguments)]
pub fn preconditioned_gmres<A, P>(
    a: A,
    prec: P,
    f: &[C64],
    x0: &[C64],
    side: Side,
    ip: InnerProduct<'_>,
    tol: f64,
    maxit: usize,
) -> Result<GmresResult>
where
    A: Fn(&[C64]) -> Result<Vec<C64>>,
    P: Fn(&[C64]) -> Result<Vec<C64>>,
{
    match side {
        Side::Left => {
            let rhs = prec(f)?;
            gmres(|v| prec(&a(v)?), &rhs, x0, ip, tol, maxit)
        }
        Side::Right => {
            let ax0 = a(x0)?;
            if ax0.len() != f.len() {
                return Err(Error::DimensionMismatch {
                    expected: f.len(),
                    got: ax0.len(),
                });
            }
            let r0: Vec<C64> = f.iter().zip(&ax0).map(|(b, y)| b - y).collect();
            let z0 = vec![ZERO; f.len()];
            let mut res = gmres(|v| a(&prec(v)?), &r0, &z0, ip, tol, maxit)?;
            let mut x = prec(&res.solution)?;
            for (xi, x0i) in x.iter_mut().zip(x0) {
                *xi += x0i;
            }
            res.solution = x;
            Ok(res)
        }
    }
}

/// Rotation `(c, s)` with `[c, s; -conj(s), c] [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, ZERO, a);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb, C64::new(nb, 0.0));
    }
    let t = na.hypot(nb);
    let phase = a / na;
    let c = na / t;
    let s = phase * b.conj() / t;
    (c, s, phase * t)
}
