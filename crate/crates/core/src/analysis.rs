//! Norm and field-of-values diagnostics of the preconditioned matrix in the
//! energy inner product `<v, w>_D = w^* D v`.
//!
//! Small problems are analysed densely through the similarity transform
//! `D^{1/2} T D^{-1/2}` of `T = B^{-1} A`. Larger ones use Lanczos iterations
//! on operators that are self-adjoint in the `D` inner product, so only
//! products with `T`, `T^*`, `D` and solves with `D` are needed.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::linalg::{axpy, dot, spd_sqrt, CsrMatrix, DenseMatrix, SparseFactorization};
use crate::preconditioner::{densify_preconditioned, Preconditioner};
use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Sampled boundary of the field of values.
#[derive(Debug, Clone)]
pub struct FovBoundary {
    pub thetas: Vec<f64>,
    pub points: Vec<C64>,
    /// `max_z Re(e^{i theta} z)` over the field of values at each angle.
    pub support: Vec<f64>,
    /// Lower bound on the distance from the origin; 0 when no sampled
    /// supporting line separates the origin.
    pub lower_bound: f64,
}

impl FovBoundary {
    fn from_samples(thetas: Vec<f64>, points: Vec<C64>, support: Vec<f64>) -> Self {
        let lower_bound = support.iter().fold(0.0f64, |acc, &h| acc.max(-h));
        Self {
            thetas,
            points,
            support,
            lower_bound,
        }
    }

    /// CSV rows `theta,re,im` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,re,im\n");
        for (t, z) in self.thetas.iter().zip(&self.points) {
            out.push_str(&format!("{t},{},{}\n", z.re, z.im));
        }
        out
    }
}

/// Smallest eigenvalue of the Hermitian part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FovLowerBound {
    /// `max(raw, 0)`: certified distance of the field of values from 0.
    pub certified: f64,
    pub raw: f64,
}

impl FovLowerBound {
    fn new(raw: f64) -> Self {
        Self {
            certified: raw.max(0.0),
            raw,
        }
    }
}

fn angle(m: usize, n_angles: usize) -> f64 {
    TAU * m as f64 / n_angles as f64
}

fn check_angles(n_angles: usize) -> Result<()> {
    if n_angles < 8 {
        return Err(Error::InvalidParameter(format!(
            "field-of-values boundary needs at least 8 angles, got {n_angles}"
        )));
    }
    Ok(())
}

/// Cowen-Harel boundary of the field of values of a dense matrix: for each
/// angle, the top eigenvector of the Hermitian part of `e^{i theta} X` gives
/// a boundary point through its Rayleigh quotient.
pub fn fov_boundary(x: &DenseMatrix, n_angles: usize) -> Result<FovBoundary> {
    check_angles(n_angles)?;
    let samples = (0..n_angles)
        .into_par_iter()
        .map(|m| {
            let rot = C64::from_polar(1.0, angle(m, n_angles));
            let (vals, vecs) = x.scaled(rot).hermitian_part().hermitian_eig()?;
            let top = vals.len() - 1;
            let v = vecs.column(top);
            let xv = x.matvec(&v)?;
            Ok((dot(&xv, &v) / dot(&v, &v), vals[top]))
        })
        .collect::<Result<Vec<_>>>()?;
    let thetas = (0..n_angles).map(|m| angle(m, n_angles)).collect();
    let (points, support) = samples.into_iter().unzip();
    Ok(FovBoundary::from_samples(thetas, points, support))
}

/// `D^{1/2} (B^{-1} A) D^{-1/2}`, densely.
pub fn weighted_transform(
    prec: &Preconditioner,
    a_eps: &CsrMatrix,
    d_k: &CsrMatrix,
    cap: usize,
) -> Result<DenseMatrix> {
    let t = densify_preconditioned(prec, a_eps, cap)?;
    let (half, inv_half) = spd_sqrt(d_k)?;
    half.matmul(&t)?.matmul(&inv_half)
}

/// Smallest eigenvalue of `(Xw + Xw^*) / 2`.
pub fn fov_lower_bound(xw: &DenseMatrix) -> Result<FovLowerBound> {
    let vals = xw.hermitian_part().hermitian_eigenvalues()?;
    Ok(FovLowerBound::new(vals[0]))
}

/// Spectral norm of a dense matrix.
pub fn spectral_norm(x: &DenseMatrix) -> Result<f64> {
    let gram = x.adjoint().matmul(x)?.hermitian_part();
    let vals = gram.hermitian_eigenvalues()?;
    Ok(vals.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// `||B^{-1} A||_D`, densely.
pub fn dk_norm(
    prec: &Preconditioner,
    a_eps: &CsrMatrix,
    d_k: &CsrMatrix,
    cap: usize,
) -> Result<f64> {
    spectral_norm(&weighted_transform(prec, a_eps, d_k, cap)?)
}

/// Iterations after which the Elman estimate
/// `||r_n|| / ||r_0|| <= (1 - (lower / norm)^2)^{n/2}` falls below `tol`.
/// `None` when the lower bound is not positive.
pub fn elman_iterations(lower: f64, norm: f64, tol: f64) -> Option<usize> {
    if !(lower > 0.0) || !(norm > 0.0) {
        return None;
    }
    let ratio = (lower / norm).min(1.0);
    let rate = 1.0 - ratio * ratio;
    if rate <= 0.0 {
        return Some(1);
    }
    Some((2.0 * tol.ln() / rate.ln()).ceil().max(1.0) as usize)
}

/// A square operator with its adjoint.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[C64]) -> Result<Vec<C64>>;
    fn apply_adjoint(&self, v: &[C64]) -> Result<Vec<C64>>;
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.matvec(v)
    }

    fn apply_adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.adjoint().matvec(v)
    }
}

/// `T = B^{-1} A` applied without forming it.
pub struct PreconditionedOperator<'a> {
    pub prec: &'a Preconditioner,
    pub a: &'a CsrMatrix,
}

impl LinearOperator for PreconditionedOperator<'_> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.prec.apply(&self.a.spmv(v)?)
    }

    fn apply_adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        let w = self.prec.apply_adjoint(v)?;
        let mut out = vec![ZERO; w.len()];
        self.a.adjoint_spmv_into(&w, &mut out);
        Ok(out)
    }
}

/// The `D` inner product with a factorization of `D` for solves.
pub struct EnergyProduct<'a> {
    d: &'a CsrMatrix,
    factor: SparseFactorization,
}

impl<'a> EnergyProduct<'a> {
    pub fn new(d: &'a CsrMatrix) -> Result<Self> {
        Ok(Self {
            d,
            factor: crate::linalg::factorize(d)?,
        })
    }

    fn mul(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        self.d.spmv_into(v, &mut out);
        out
    }

    fn solve(&self, v: &[C64]) -> Vec<C64> {
        let mut x = v.to_vec();
        self.factor.solve_in_place(&mut x);
        x
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Stop once the residual estimate of the wanted Ritz pair is below
    /// `tol` times the largest Ritz value magnitude.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 1e-4,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: f64,
    /// `D`-normalised Ritz vector.
    pub vector: Vec<C64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Smallest,
    Largest,
}

/// Lanczos with full reorthogonalisation for an operator self-adjoint in the
/// `D` inner product.
fn lanczos<F>(
    mut op: F,
    ip: &EnergyProduct<'_>,
    start: Vec<C64>,
    end: End,
    opts: LanczosOptions,
) -> Result<RitzPair>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    let mut q = start;
    let mut dq = ip.mul(&q);
    let nrm = dot(&dq, &q).re.sqrt();
    if !(nrm > 0.0) {
        return Err(Error::InvalidParameter(
            "Lanczos start vector is zero".into(),
        ));
    }
    q.iter_mut().chain(dq.iter_mut()).for_each(|x| *x /= nrm);
    let mut basis = vec![q];
    let mut weighted = vec![dq];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut best: Option<(f64, Vec<C64>, f64)> = None;

    for j in 0..opts.max_iter {
        let mut w = op(&basis[j])?;
        let a = dot(&w, &weighted[j]).re;
        alpha.push(a);
        for _ in 0..2 {
            for (v, dv) in basis.iter().zip(&weighted) {
                let c = dot(&w, dv);
                axpy(-c, v, &mut w);
            }
        }
        let dw = ip.mul(&w);
        let b = dot(&dw, &w).re.max(0.0).sqrt();

        let m = alpha.len();
        let check = m.is_multiple_of(5) || j + 1 == opts.max_iter || b == 0.0;
        if check {
            let t = DenseMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    C64::new(alpha[r], 0.0)
                } else if r + 1 == c {
                    C64::new(beta[r], 0.0)
                } else if c + 1 == r {
                    C64::new(beta[c], 0.0)
                } else {
                    ZERO
                }
            });
            let (vals, vecs) = t.hermitian_eig()?;
            let idx = match end {
                End::Smallest => 0,
                End::Largest => m - 1,
            };
            let s = vecs.column(idx);
            let residual = b * s[m - 1].norm();
            let scale = vals[0].abs().max(vals[m - 1].abs()).max(f64::MIN_POSITIVE);
            best = Some((vals[idx], s, residual));
            if residual <= opts.tol * scale || b <= 1e-14 * scale {
                let (value, s, residual) = best.take().unwrap();
                return Ok(ritz(value, &s, &basis, residual, m, true));
            }
        }
        if b == 0.0 {
            break;
        }
        beta.push(b);
        basis.push(w.into_iter().map(|x| x / b).collect());
        weighted.push(dw.into_iter().map(|x| x / b).collect());
    }
    let (value, s, residual) = best.expect("at least one Lanczos check runs");
    let m = s.len();
    Ok(ritz(value, &s, &basis, residual, m, false))
}

fn ritz(
    value: f64,
    s: &[C64],
    basis: &[Vec<C64>],
    residual: f64,
    m: usize,
    converged: bool,
) -> RitzPair {
    let mut vector = vec![ZERO; basis[0].len()];
    for (c, v) in s.iter().zip(basis) {
        axpy(*c, v, &mut vector);
    }
    RitzPair {
        value,
        vector,
        residual,
        iterations: m,
        converged,
    }
}

fn random_start(n: usize, seed: u64) -> Vec<C64> {
    crate::krylov::random_initial_guess(n, seed)
}

/// `||T||_D` as the square root of the top eigenvalue of `D^{-1} T^* D T`.
pub fn dk_norm_lanczos(
    op: &dyn LinearOperator,
    ip: &EnergyProduct<'_>,
    opts: LanczosOptions,
) -> Result<RitzPair> {
    let apply = |v: &[C64]| -> Result<Vec<C64>> {
        let tv = op.apply(v)?;
        let dtv = ip.mul(&tv);
        Ok(ip.solve(&op.apply_adjoint(&dtv)?))
    };
    let mut pair = lanczos(
        apply,
        ip,
        random_start(op.dim(), opts.seed),
        End::Largest,
        opts,
    )?;
    pair.value = pair.value.max(0.0).sqrt();
    Ok(pair)
}

/// Hermitian part of `e^{i theta} T` in the `D` inner product.
fn rotated_hermitian_part<'b>(
    op: &'b dyn LinearOperator,
    ip: &'b EnergyProduct<'_>,
    rot: C64,
) -> impl FnMut(&[C64]) -> Result<Vec<C64>> + 'b {
    move |v: &[C64]| {
        let tv = op.apply(v)?;
        let back = ip.solve(&op.apply_adjoint(&ip.mul(v))?);
        Ok(tv
            .iter()
            .zip(&back)
            .map(|(a, b)| 0.5 * (rot * a + rot.conj() * b))
            .collect())
    }
}

/// Smallest eigenvalue of the `D`-Hermitian part of `T`.
pub fn fov_lower_bound_lanczos(
    op: &dyn LinearOperator,
    ip: &EnergyProduct<'_>,
    opts: LanczosOptions,
) -> Result<(FovLowerBound, RitzPair)> {
    let apply = rotated_hermitian_part(op, ip, C64::new(1.0, 0.0));
    let pair = lanczos(
        apply,
        ip,
        random_start(op.dim(), opts.seed),
        End::Smallest,
        opts,
    )?;
    Ok((FovLowerBound::new(pair.value), pair))
}

/// Cowen-Harel boundary in the `D` inner product by Lanczos, one angle at a
/// time, each started from the previous angle's eigenvector.
pub fn fov_boundary_lanczos(
    op: &dyn LinearOperator,
    ip: &EnergyProduct<'_>,
    n_angles: usize,
    opts: LanczosOptions,
) -> Result<FovBoundary> {
    check_angles(n_angles)?;
    let mut start = random_start(op.dim(), opts.seed);
    let (mut thetas, mut points, mut support) = (Vec::new(), Vec::new(), Vec::new());
    for m in 0..n_angles {
        let theta = angle(m, n_angles);
        let rot = C64::from_polar(1.0, theta);
        let apply = rotated_hermitian_part(op, ip, rot);
        let pair = lanczos(apply, ip, start, End::Largest, opts)?;
        let tv = op.apply(&pair.vector)?;
        let dv = ip.mul(&pair.vector);
        points.push(dot(&tv, &dv) / dot(&pair.vector, &dv));
        support.push(pair.value);
        thetas.push(theta);
        start = pair.vector;
    }
    Ok(FovBoundary::from_samples(thetas, points, support))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_boundary() {
        let b = fov_boundary(&DenseMatrix::identity(4), 16).unwrap();
        for z in &b.points {
            assert!((z - c(1.0, 0.0)).norm() < 1e-12);
        }
        assert!((b.lower_bound - 1.0).abs() < 1e-12);
        assert_eq!(fov_lower_bound(&DenseMatrix::identity(3)).unwrap().raw, 1.0);
    }

    #[test]
    fn too_few_angles() {
        assert!(fov_boundary(&DenseMatrix::identity(2), 4).is_err());
    }

    #[test]
    fn elman_rule() {
        assert_eq!(elman_iterations(0.0, 1.0, 1e-6), None);
        // rate sqrt(0.75) per step
        let n = elman_iterations(0.5, 1.0, 1e-6).unwrap();
        assert!(0.75f64.powf(n as f64 / 2.0) <= 1e-6);
        assert!(0.75f64.powf((n - 1) as f64 / 2.0) > 1e-6);
    }

    #[test]
    fn lanczos_matches_dense_on_diagonal() {
        let diag: Vec<C64> = (1..=30)
            .map(|i| c(i as f64 / 10.0, (i % 7) as f64 / 10.0))
            .collect();
        let x = DenseMatrix::from_diagonal(&diag);
        let d = CsrMatrix::identity(30);
        let ip = EnergyProduct::new(&d).unwrap();
        let opts = LanczosOptions {
            max_iter: 40,
            tol: 1e-10,
            seed: 1,
        };
        let norm = dk_norm_lanczos(&x, &ip, opts).unwrap();
        let exact = diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((norm.value - exact).abs() < 1e-8);
        let (lb, _) = fov_lower_bound_lanczos(&x, &ip, opts).unwrap();
        assert!((lb.raw - 0.1).abs() < 1e-8);
    }
}
