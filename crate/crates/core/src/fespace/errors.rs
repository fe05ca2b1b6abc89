//! Plane-wave exact solution and discretisation error norms.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;

use super::quadrature::triangle_rule;
use super::FeSpace;
use crate::coefficients::ProblemParameters;
use crate::{Error, Result};

/// Propagation direction of the incident plane wave.
pub const DIRECTION: [f64; 2] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];

/// `exp(i k d·x)`.
pub fn plane_wave(k: f64, x: [f64; 2]) -> C64 {
    C64::from_polar(1.0, k * (DIRECTION[0] * x[0] + DIRECTION[1] * x[1]))
}

pub fn plane_wave_gradient(k: f64, x: [f64; 2]) -> [C64; 2] {
    let u = plane_wave(k, x) * C64::new(0.0, k);
    [u * DIRECTION[0], u * DIRECTION[1]]
}

/// Nodal interpolant of `f`.
pub fn interpolate(space: &FeSpace, f: impl Fn([f64; 2]) -> C64) -> Vec<C64> {
    (0..space.ndofs()).map(|q| f(space.node(q))).collect()
}

/// Relative errors `(e0, e1)` of `u_h` against the plane wave:
/// `e0 = ||u - u_h|| / ||u||`, `e1 = ||∇(u - u_h)|| / ||∇u||`.
///
/// The rule is exact to degree `2p + 2` and has at least ten points per
/// wavelength along each element direction.
pub fn errors_vs_planewave(
    space: &FeSpace,
    params: &ProblemParameters,
    u_h: &[C64],
) -> Result<(f64, f64)> {
    if !params.is_homogeneous() {
        return Err(Error::InvalidParameter(
            "plane-wave errors need unit coefficients".into(),
        ));
    }
    if u_h.len() != space.ndofs() {
        return Err(Error::DimensionMismatch {
            expected: space.ndofs(),
            got: u_h.len(),
        });
    }
    let k = params.k;
    let p = space.degree();
    let h = space.mesh().h();
    let per_direction = (10.0 * h * k / (2.0 * PI)).ceil() as usize;
    let degree = (2 * p + 2).max(2 * per_direction);
    let rule = triangle_rule(degree);
    let basis = space.basis();
    let nloc = basis.len();
    let mut phi = vec![0.0; rule.len() * nloc];
    let mut grad = vec![[0.0; 2]; rule.len() * nloc];
    for (q, &lam) in rule.points.iter().enumerate() {
        basis.eval(lam, &mut phi[q * nloc..(q + 1) * nloc]);
        basis.eval_grad(lam, &mut grad[q * nloc..(q + 1) * nloc]);
    }

    let (mut e0, mut e1, mut n0, mut n1) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..space.mesh().triangles().len() {
        let [v0, v1, v2] = space.mesh().triangle_points(t);
        let j = [
            [v1[0] - v0[0], v2[0] - v0[0]],
            [v1[1] - v0[1], v2[1] - v0[1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let it = [
            [j[1][1] / det, -j[1][0] / det],
            [-j[0][1] / det, j[0][0] / det],
        ];
        let dofs = space.element_dofs(t);
        for (q, (&lam, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let x = [
                lam[0] * v0[0] + lam[1] * v1[0] + lam[2] * v2[0],
                lam[0] * v0[1] + lam[1] * v1[1] + lam[2] * v2[1],
            ];
            let mut uh = C64::new(0.0, 0.0);
            let mut guh = [C64::new(0.0, 0.0); 2];
            for a in 0..nloc {
                let c = u_h[dofs[a]];
                let r = grad[q * nloc + a];
                uh += c * phi[q * nloc + a];
                guh[0] += c * (it[0][0] * r[0] + it[0][1] * r[1]);
                guh[1] += c * (it[1][0] * r[0] + it[1][1] * r[1]);
            }
            let u = plane_wave(k, x);
            let gu = plane_wave_gradient(k, x);
            let wq = w * det.abs();
            e0 += wq * (u - uh).norm_sqr();
            n0 += wq * u.norm_sqr();
            e1 += wq * ((gu[0] - guh[0]).norm_sqr() + (gu[1] - guh[1]).norm_sqr());
            n1 += wq * (gu[0].norm_sqr() + gu[1].norm_sqr());
        }
    }
    Ok(((e0 / n0).sqrt(), (e1 / n1).sqrt()))
}
