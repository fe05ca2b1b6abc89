//! Gauss rules on the interval and collapsed Gauss rules on the triangle.

use faer::{Mat, Side};

/// Quadrature rule on the reference triangle `{x, y >= 0, x + y <= 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Barycentric coordinates `(1 - x - y, x, y)` of each point.
    pub points: Vec<[f64; 3]>,
    /// Weights summing to the reference area 1/2.
    pub weights: Vec<f64>,
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Conical product rule exact for total degree `degree`: Gauss-Jacobi
/// (weight `1 - s`) in the collapsed direction, Gauss-Legendre in the other.
pub fn triangle_rule(degree: usize) -> QuadratureRule {
    let n = degree / 2 + 1;
    let (js, jw) = gauss_jacobi(n, 1, 0);
    let (ls, lw) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&u, &wu) in js.iter().zip(&jw) {
        let s = 0.5 * (1.0 + u);
        for (&t, &wt) in ls.iter().zip(&lw) {
            let x = s;
            let y = (1.0 - s) * t;
            points.push([1.0 - x - y, x, y]);
            // Jacobi weights integrate (1 - u) on [-1, 1]; rescale to (1 - s) on [0, 1]
            weights.push(0.25 * wu * wt);
        }
    }
    QuadratureRule {
        points,
        weights,
        degree: 2 * n - 1,
    }
}

/// `n`-point Gauss-Legendre rule on `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_jacobi(n, 0, 0);
    (
        x.iter().map(|&u| 0.5 * (1.0 + u)).collect(),
        w.iter().map(|&v| 0.5 * v).collect(),
    )
}

/// `n`-point Gauss-Jacobi rule on `[-1, 1]` for the weight
/// `(1 - u)^alpha (1 + u)^beta`, by the Golub-Welsch algorithm.
pub fn gauss_jacobi(n: usize, alpha: u32, beta: u32) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let (a, b) = (alpha as f64, beta as f64);
    let ab = a + b;
    let mut jac = Mat::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        jac[(k, k)] = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        if k + 1 < n {
            let j = kf + 1.0;
            let num = 4.0 * j * (j + a) * (j + b) * (j + ab);
            let s = 2.0 * j + ab;
            let off = (num / (s * s * (s + 1.0) * (s - 1.0))).sqrt();
            jac[(k + 1, k)] = off;
            jac[(k, k + 1)] = off;
        }
    }
    let fact = |m: u32| (1..=m).map(f64::from).product::<f64>();
    let mu0 = 2f64.powf(ab + 1.0) * fact(alpha) * fact(beta) / fact(alpha + beta + 1);
    let eig = jac
        .as_ref()
        .self_adjoint_eigen(Side::Lower)
        .expect("symmetric tridiagonal eigenproblem");
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (s[i], mu0 * u[(0, i)] * u[(0, i)]))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `∫_T x^a y^b = a! b! / (a + b + 2)!`.
    fn monomial_integral(a: u32, b: u32) -> f64 {
        let f = |m: u32| (1..=m).map(f64::from).product::<f64>();
        f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn degree_zero_is_centroid() {
        let q = triangle_rule(0);
        assert_eq!(q.len(), 1);
        for c in q.points[0] {
            assert!((c - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((q.weights[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exact_for_monomials() {
        for degree in 0..=12 {
            let q = triangle_rule(degree);
            assert!(q.degree >= degree);
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let approx: f64 = q
                        .points
                        .iter()
                        .zip(&q.weights)
                        .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                        .sum();
                    let exact = monomial_integral(a, b);
                    assert!((approx - exact).abs() < 1e-14, "deg {degree}: x^{a} y^{b}");
                }
            }
        }
    }

    #[test]
    fn legendre_exactness() {
        let (x, w) = gauss_legendre(4);
        for d in 0..8 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d)).sum();
            assert!((s - 1.0 / (d as f64 + 1.0)).abs() < 1e-14);
        }
    }
}
