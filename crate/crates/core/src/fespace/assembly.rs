//! Assembly of the stiffness, mass, boundary-mass and load terms.

use num_complex::Complex64 as C64;

use super::errors::plane_wave;
use super::quadrature::{gauss_legendre, triangle_rule, QuadratureRule};
use super::FeSpace;
use crate::coefficients::ProblemParameters;
use crate::linalg::CsrMatrix;
use crate::{Error, Result};

/// Global discrete system `A_eps = S - (k^2 + i eps) M - i eta N` with the
/// energy-norm matrix `D_k` and the load vector.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub s: CsrMatrix,
    pub m: CsrMatrix,
    pub n: CsrMatrix,
    pub a_eps: CsrMatrix,
    /// Stiffness plus `k^2` times mass, both with unit coefficients.
    pub d_k: CsrMatrix,
    pub f: Vec<C64>,
}

/// Element-integral rule degree used by default: `2p - 2`.
pub fn default_quadrature_degree(p: usize) -> usize {
    2 * p - 2
}

/// Assembles with the default element quadrature.
pub fn assemble(space: &FeSpace, params: &ProblemParameters) -> Result<AssembledSystem> {
    assemble_with_degree(space, params, default_quadrature_degree(space.degree()))
}

/// Assembles with element quadrature exact to total degree `degree`.
pub fn assemble_with_degree(
    space: &FeSpace,
    params: &ProblemParameters,
    degree: usize,
) -> Result<AssembledSystem> {
    let ndofs = space.ndofs();
    let ntri = space.mesh().triangles().len();
    let triangles: Vec<usize> = (0..ntri).collect();
    let edges: Vec<LocalBoundaryEdge> = space
        .mesh()
        .boundary_edges()
        .iter()
        .map(|e| LocalBoundaryEdge {
            triangle: e.triangle,
            local_edge: e.local_edge,
        })
        .collect();
    let identity = |g: usize| g;
    let parts = accumulate(
        space, params, &triangles, &identity, ndofs, &edges, degree, true,
    );

    let pattern = &parts.pattern;
    let k2 = params.k * params.k;
    let shift = C64::new(k2, params.eps);
    let iota_eta = C64::new(0.0, 1.0) * params.eta;
    let real = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();

    let a_vals: Vec<C64> = (0..pattern.cols.len())
        .map(|q| C64::new(parts.s[q], 0.0) - shift * parts.m[q] - iota_eta * parts.bd[q])
        .collect();
    let s1 = parts.s1.as_deref().unwrap_or(&parts.s);
    let m1 = parts.m1.as_deref().unwrap_or(&parts.m);
    let d_vals: Vec<C64> = s1
        .iter()
        .zip(m1)
        .map(|(&s, &m)| C64::new(s + k2 * m, 0.0))
        .collect();

    let mk = |vals: Vec<C64>| {
        CsrMatrix::new(
            ndofs,
            ndofs,
            pattern.offsets.clone(),
            pattern.cols.clone(),
            vals,
        )
    };
    let n = boundary_only(&parts.pattern, &parts.bd, ndofs)?;
    Ok(AssembledSystem {
        s: mk(real(&parts.s))?,
        m: mk(real(&parts.m))?,
        n,
        a_eps: mk(a_vals)?,
        d_k: mk(d_vals)?,
        f: parts.load,
    })
}

/// An edge of a triangle set not shared by two of its triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LocalBoundaryEdge {
    pub triangle: usize,
    /// Edge opposite local vertex `local_edge`.
    pub local_edge: usize,
}

/// Boundary edges of the region covered by `triangles`, sorted.
pub fn subdomain_boundary(space: &FeSpace, triangles: &[usize]) -> Vec<LocalBoundaryEdge> {
    let tris = space.mesh().triangles();
    let mut keys: Vec<(u64, usize, usize)> = Vec::with_capacity(3 * triangles.len());
    for &t in triangles {
        let v = tris[t];
        for e in 0..3 {
            let (a, b) = (v[(e + 1) % 3], v[(e + 2) % 3]);
            let key = ((a.min(b) as u64) << 32) | a.max(b) as u64;
            keys.push((key, t, e));
        }
    }
    keys.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let mut j = i + 1;
        while j < keys.len() && keys[j].0 == keys[i].0 {
            j += 1;
        }
        if j - i == 1 {
            out.push(LocalBoundaryEdge {
                triangle: keys[i].1,
                local_edge: keys[i].2,
            });
        }
        i = j;
    }
    out.sort_unstable();
    out
}

/// Local impedance matrix on the region covered by `triangles`: stiffness,
/// shifted mass, and the impedance term on every boundary edge of the
/// region. `dofs` lists the region's global dofs in increasing order; row
/// `i` of the result corresponds to `dofs[i]`.
pub fn assemble_local(
    space: &FeSpace,
    params: &ProblemParameters,
    triangles: &[usize],
    dofs: &[usize],
    degree: usize,
) -> Result<CsrMatrix> {
    if dofs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "subdomain dofs must be strictly increasing".into(),
        ));
    }
    let local_of = |g: usize| dofs.binary_search(&g).unwrap_or(usize::MAX);
    for &t in triangles {
        if space
            .element_dofs(t)
            .iter()
            .any(|&g| local_of(g) == usize::MAX)
        {
            return Err(Error::InvalidParameter(format!(
                "triangle {t} has dofs outside the subdomain dof list"
            )));
        }
    }
    let edges = subdomain_boundary(space, triangles);
    let parts = accumulate(
        space,
        params,
        triangles,
        &local_of,
        dofs.len(),
        &edges,
        degree,
        false,
    );
    let shift = C64::new(params.k * params.k, params.eps);
    let iota_eta = C64::new(0.0, 1.0) * params.eta;
    let vals: Vec<C64> = (0..parts.pattern.cols.len())
        .map(|q| C64::new(parts.s[q], 0.0) - shift * parts.m[q] - iota_eta * parts.bd[q])
        .collect();
    CsrMatrix::new(
        dofs.len(),
        dofs.len(),
        parts.pattern.offsets,
        parts.pattern.cols,
        vals,
    )
}

fn boundary_only(pattern: &Pattern, bd: &[f64], n: usize) -> Result<CsrMatrix> {
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for i in 0..n {
        for q in pattern.offsets[i]..pattern.offsets[i + 1] {
            if bd[q] != 0.0 {
                cols.push(pattern.cols[q]);
                vals.push(C64::new(bd[q], 0.0));
            }
        }
        offsets.push(cols.len());
    }
    CsrMatrix::new(n, n, offsets, cols, vals)
}

struct Pattern {
    offsets: Vec<usize>,
    cols: Vec<usize>,
}

impl Pattern {
    fn build(n: usize, nloc: usize, conn: &[usize]) -> Self {
        let nel = conn.len() / nloc;
        let mut count = vec![0usize; n + 1];
        for &d in conn {
            count[d + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut incident = vec![0usize; conn.len()];
        for e in 0..nel {
            for &d in &conn[e * nloc..(e + 1) * nloc] {
                incident[next[d]] = e;
                next[d] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut cols = Vec::new();
        let mut row = Vec::new();
        for d in 0..n {
            row.clear();
            for &e in &incident[count[d]..count[d + 1]] {
                row.extend_from_slice(&conn[e * nloc..(e + 1) * nloc]);
            }
            row.sort_unstable();
            row.dedup();
            cols.extend_from_slice(&row);
            offsets.push(cols.len());
        }
        Self { offsets, cols }
    }

    #[inline]
    fn find(&self, i: usize, j: usize) -> usize {
        let lo = self.offsets[i];
        lo + self.cols[lo..self.offsets[i + 1]]
            .binary_search(&j)
            .expect("entry outside element pattern")
    }
}

struct Parts {
    pattern: Pattern,
    s: Vec<f64>,
    m: Vec<f64>,
    /// Unit-coefficient stiffness and mass, present when they differ from `s`, `m`.
    s1: Option<Vec<f64>>,
    m1: Option<Vec<f64>>,
    bd: Vec<f64>,
    load: Vec<C64>,
}

#[allow(clippy::too_many_arguments)]
fn accumulate(
    space: &FeSpace,
    params: &ProblemParameters,
    triangles: &[usize],
    local_of: &dyn Fn(usize) -> usize,
    n: usize,
    edges: &[LocalBoundaryEdge],
    degree: usize,
    with_energy: bool,
) -> Parts {
    let kernel = ElementKernel::new(space, degree);
    let nloc = kernel.nloc;
    let mut conn = Vec::with_capacity(triangles.len() * nloc);
    for &t in triangles {
        conn.extend(space.element_dofs(t).iter().map(|&g| local_of(g)));
    }
    let pattern = Pattern::build(n, nloc, &conn);
    let nnz = pattern.cols.len();

    let need_s1 = with_energy && !params.a.is_constant_one();
    let need_m1 = with_energy && !params.n.is_constant_one();
    let mut s = vec![0.0; nnz];
    let mut m = vec![0.0; nnz];
    let mut s1 = need_s1.then(|| vec![0.0; nnz]);
    let mut m1 = need_m1.then(|| vec![0.0; nnz]);
    let mut bd = vec![0.0; nnz];
    let mut load = vec![C64::new(0.0, 0.0); if with_energy { n } else { 0 }];

    let mut blocks = ElementBlocks::new(nloc);
    let mut slots = vec![0usize; nloc * nloc];
    for (e, &t) in triangles.iter().enumerate() {
        let dofs = &conn[e * nloc..(e + 1) * nloc];
        for a in 0..nloc {
            for b in 0..nloc {
                slots[a * nloc + b] = pattern.find(dofs[a], dofs[b]);
            }
        }
        kernel.volume(t, params, need_s1, need_m1, &mut blocks);
        for (ab, &q) in slots.iter().enumerate() {
            s[q] += blocks.s[ab];
            m[q] += blocks.m[ab];
        }
        if let Some(s1) = s1.as_mut() {
            for (ab, &q) in slots.iter().enumerate() {
                s1[q] += blocks.s1[ab];
            }
        }
        if let Some(m1) = m1.as_mut() {
            for (ab, &q) in slots.iter().enumerate() {
                m1[q] += blocks.m1[ab];
            }
        }
    }

    let mut edge_block = vec![0.0; nloc * nloc];
    let mut edge_load = vec![C64::new(0.0, 0.0); nloc];
    for edge in edges {
        let dofs: Vec<usize> = space
            .element_dofs(edge.triangle)
            .iter()
            .map(|&g| local_of(g))
            .collect();
        kernel.edge_mass(edge.triangle, edge.local_edge, params, &mut edge_block);
        for &a in &kernel.edge_nodes[edge.local_edge] {
            for &b in &kernel.edge_nodes[edge.local_edge] {
                bd[pattern.find(dofs[a], dofs[b])] += edge_block[a * nloc + b];
            }
        }
        if with_energy {
            kernel.edge_load(edge.triangle, edge.local_edge, params.k, &mut edge_load);
            for &a in &kernel.edge_nodes[edge.local_edge] {
                load[dofs[a]] += edge_load[a];
            }
        }
    }

    Parts {
        pattern,
        s,
        m,
        s1,
        m1,
        bd,
        load,
    }
}

struct ElementBlocks {
    s: Vec<f64>,
    m: Vec<f64>,
    s1: Vec<f64>,
    m1: Vec<f64>,
}

impl ElementBlocks {
    fn new(nloc: usize) -> Self {
        let z = vec![0.0; nloc * nloc];
        Self {
            s: z.clone(),
            m: z.clone(),
            s1: z.clone(),
            m1: z,
        }
    }
}

/// Basis data tabulated at the reference quadrature points.
struct ElementKernel<'a> {
    space: &'a FeSpace,
    nloc: usize,
    rule: QuadratureRule,
    /// `nq x nloc` basis values.
    phi: Vec<f64>,
    /// `nq x nloc` reference gradients.
    grad: Vec<[f64; 2]>,
    edge_t: Vec<f64>,
    edge_w: Vec<f64>,
    /// Per local edge: `nqe x nloc` basis values along the edge.
    edge_phi: [Vec<f64>; 3],
    edge_nodes: [Vec<usize>; 3],
}

impl<'a> ElementKernel<'a> {
    fn new(space: &'a FeSpace, degree: usize) -> Self {
        let basis = space.basis();
        let nloc = basis.len();
        let rule = triangle_rule(degree);
        let mut phi = vec![0.0; rule.len() * nloc];
        let mut grad = vec![[0.0; 2]; rule.len() * nloc];
        for (q, &lam) in rule.points.iter().enumerate() {
            basis.eval(lam, &mut phi[q * nloc..(q + 1) * nloc]);
            basis.eval_grad(lam, &mut grad[q * nloc..(q + 1) * nloc]);
        }
        let (edge_t, edge_w) = gauss_legendre(basis.degree() + 2);
        let edge_phi = std::array::from_fn(|e| {
            let mut v = vec![0.0; edge_t.len() * nloc];
            for (q, &t) in edge_t.iter().enumerate() {
                let mut lam = [0.0; 3];
                lam[(e + 1) % 3] = 1.0 - t;
                lam[(e + 2) % 3] = t;
                basis.eval(lam, &mut v[q * nloc..(q + 1) * nloc]);
            }
            v
        });
        let edge_nodes = std::array::from_fn(|e| basis.edge_nodes(e));
        Self {
            space,
            nloc,
            rule,
            phi,
            grad,
            edge_t,
            edge_w,
            edge_phi,
            edge_nodes,
        }
    }

    fn volume(
        &self,
        t: usize,
        params: &ProblemParameters,
        s1: bool,
        m1: bool,
        out: &mut ElementBlocks,
    ) {
        let nloc = self.nloc;
        let [v0, v1, v2] = self.space.mesh().triangle_points(t);
        let j = [
            [v1[0] - v0[0], v2[0] - v0[0]],
            [v1[1] - v0[1], v2[1] - v0[1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        // inverse transpose of the Jacobian
        let it = [
            [j[1][1] / det, -j[1][0] / det],
            [-j[0][1] / det, j[0][0] / det],
        ];
        let area = det.abs();
        out.s.fill(0.0);
        out.m.fill(0.0);
        if s1 {
            out.s1.fill(0.0);
        }
        if m1 {
            out.m1.fill(0.0);
        }
        let mut g = vec![[0.0; 2]; nloc];
        for (q, (&lam, &w)) in self.rule.points.iter().zip(&self.rule.weights).enumerate() {
            let x = [
                lam[0] * v0[0] + lam[1] * v1[0] + lam[2] * v2[0],
                lam[0] * v0[1] + lam[1] * v1[1] + lam[2] * v2[1],
            ];
            let wq = w * area;
            let wa = wq * params.a.eval(x);
            let wn = wq * params.n.eval(x);
            let phi = &self.phi[q * nloc..(q + 1) * nloc];
            for (ga, r) in g.iter_mut().zip(&self.grad[q * nloc..(q + 1) * nloc]) {
                *ga = [
                    it[0][0] * r[0] + it[0][1] * r[1],
                    it[1][0] * r[0] + it[1][1] * r[1],
                ];
            }
            for a in 0..nloc {
                for b in 0..nloc {
                    let gg = g[a][0] * g[b][0] + g[a][1] * g[b][1];
                    let pp = phi[a] * phi[b];
                    let ab = a * nloc + b;
                    out.s[ab] += wa * gg;
                    out.m[ab] += wn * pp;
                    if s1 {
                        out.s1[ab] += wq * gg;
                    }
                    if m1 {
                        out.m1[ab] += wq * pp;
                    }
                }
            }
        }
    }

    fn edge_geometry(&self, t: usize, e: usize) -> ([f64; 2], [f64; 2], f64) {
        let v = self.space.mesh().triangle_points(t);
        let (a, b) = (v[(e + 1) % 3], v[(e + 2) % 3]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        (a, b, len)
    }

    /// `∫_e sqrt(n) phi_a phi_b`.
    fn edge_mass(&self, t: usize, e: usize, params: &ProblemParameters, out: &mut [f64]) {
        let nloc = self.nloc;
        let (a, b, len) = self.edge_geometry(t, e);
        out.fill(0.0);
        for (q, (&s, &w)) in self.edge_t.iter().zip(&self.edge_w).enumerate() {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let wq = w * len * params.n.eval(x).sqrt();
            let phi = &self.edge_phi[e][q * nloc..(q + 1) * nloc];
            for &i in &self.edge_nodes[e] {
                for &j in &self.edge_nodes[e] {
                    out[i * nloc + j] += wq * phi[i] * phi[j];
                }
            }
        }
    }

    /// `∫_e g phi_a` with `g = i k (d·n - 1) exp(i k d·x)`.
    fn edge_load(&self, t: usize, e: usize, k: f64, out: &mut [C64]) {
        let nloc = self.nloc;
        let (a, b, len) = self.edge_geometry(t, e);
        // outward normal of a counterclockwise triangle edge
        let normal = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
        let dn = super::DIRECTION[0] * normal[0] + super::DIRECTION[1] * normal[1];
        out.fill(C64::new(0.0, 0.0));
        for (q, (&s, &w)) in self.edge_t.iter().zip(&self.edge_w).enumerate() {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let g = C64::new(0.0, k * (dn - 1.0)) * plane_wave(k, x);
            let phi = &self.edge_phi[e][q * nloc..(q + 1) * nloc];
            for &i in &self.edge_nodes[e] {
                out[i] += g * (w * len * phi[i]);
            }
        }
    }
}
