//! Equispaced nodal Lagrange basis on triangles.

/// Degree-`p` Lagrange basis. Node `a` sits at barycentric coordinates
/// `nodes[a] / p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagrangeBasis {
    p: usize,
    nodes: Vec<[usize; 3]>,
}

impl LagrangeBasis {
    pub fn new(p: usize) -> Self {
        assert!(p >= 1);
        let mut nodes = Vec::with_capacity((p + 1) * (p + 2) / 2);
        for l2 in 0..=p {
            for l1 in 0..=p - l2 {
                nodes.push([p - l1 - l2, l1, l2]);
            }
        }
        Self { p, nodes }
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Barycentric multi-indices of the nodes.
    pub fn nodes(&self) -> &[[usize; 3]] {
        &self.nodes
    }

    /// Local nodes on edge `e` (opposite vertex `e`), ordered from vertex
    /// `(e+1) % 3` to vertex `(e+2) % 3`.
    pub fn edge_nodes(&self, e: usize) -> Vec<usize> {
        let (a, b) = ((e + 1) % 3, (e + 2) % 3);
        let mut on: Vec<usize> = (0..self.len()).filter(|&i| self.nodes[i][e] == 0).collect();
        on.sort_by_key(|&i| (self.nodes[i][b], std::cmp::Reverse(self.nodes[i][a])));
        on
    }

    /// Values of every basis function at barycentric point `lam`.
    pub fn eval(&self, lam: [f64; 3], out: &mut [f64]) {
        let p = self.p as f64;
        for (o, alpha) in out.iter_mut().zip(&self.nodes) {
            let mut v = 1.0;
            for m in 0..3 {
                for s in 0..alpha[m] {
                    v *= (p * lam[m] - s as f64) / (s as f64 + 1.0);
                }
            }
            *o = v;
        }
    }

    /// Gradients with respect to the reference coordinates `(x, y)`, where
    /// `lam = (1 - x - y, x, y)`.
    pub fn eval_grad(&self, lam: [f64; 3], out: &mut [[f64; 2]]) {
        let p = self.p as f64;
        for (o, alpha) in out.iter_mut().zip(&self.nodes) {
            let mut f = [1.0; 3];
            let mut df = [0.0; 3];
            for m in 0..3 {
                // product rule over the factors of the m-th univariate polynomial
                let (mut val, mut der) = (1.0, 0.0);
                for s in 0..alpha[m] {
                    let c = 1.0 / (s as f64 + 1.0);
                    let factor = (p * lam[m] - s as f64) * c;
                    der = der * factor + val * p * c;
                    val *= factor;
                }
                f[m] = val;
                df[m] = der;
            }
            let d = [
                df[0] * f[1] * f[2],
                f[0] * df[1] * f[2],
                f[0] * f[1] * df[2],
            ];
            *o = [d[1] - d[0], d[2] - d[0]];
        }
    }
}
