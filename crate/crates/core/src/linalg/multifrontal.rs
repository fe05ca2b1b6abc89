//! Multifrontal sparse direct factorization.
//!
//! The elimination order comes from a nested-dissection supernode tree. Each
//! supernode is factored as a dense front; pivoting is restricted to the
//! front's fully-summed block. Complex-symmetric matrices use `L D L^T`,
//! anything else uses `L U`.

use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::{Accum, MatMut, MatRef, Par};
use num_complex::Complex64 as C64;

use super::csr::CsrMatrix;
use super::ordering::{geometric_nested_dissection, graph_nested_dissection, SupernodeTree};
use crate::{Error, Result};

const LEAF_SIZE: usize = 64;
const PANEL: usize = 32;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Variable ordering used for the factorization.
#[derive(Debug, Clone, Copy)]
pub enum Ordering<'a> {
    /// Graph nested dissection on the symmetrised pattern.
    Graph,
    /// Geometric dissection along lattice lines; see
    /// [`geometric_nested_dissection`]. Falls back to graph dissection if the
    /// pattern couples variables across a cut.
    Lattice { coords: &'a [[i64; 2]], stride: i64 },
    /// No reordering: one dense front.
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    SymmetricLdlt,
    Lu,
}

#[derive(Debug, Clone)]
struct Front {
    /// Original indices of the front rows: pivots first (in elimination
    /// order), then the update rows.
    rows: Vec<usize>,
    /// LU only: original indices of the pivot columns.
    cols: Vec<usize>,
    npiv: usize,
    /// LDLT: packed columns, column `j` holding rows `j..m` with `D_jj`
    /// first and unit-lower `L` below it.
    /// LU: `m x npiv` column-major, unit-lower `L` below the diagonal and
    /// `U11` on and above it.
    lower: Vec<C64>,
    /// LU only: `npiv x (m - npiv)` row-major block `U12`.
    upper: Vec<C64>,
}

/// Factorization of a square sparse matrix supporting repeated solves.
#[derive(Debug, Clone)]
pub struct SparseFactorization {
    n: usize,
    kind: FactorKind,
    fronts: Vec<Front>,
    max_front: usize,
}

/// Factorizes `a` with graph nested dissection.
pub fn factorize(a: &CsrMatrix) -> Result<SparseFactorization> {
    SparseFactorization::new(a, Ordering::Graph)
}

impl SparseFactorization {
    pub fn new(a: &CsrMatrix, ordering: Ordering<'_>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let n = a.nrows();
        let kind = if a.max_asymmetry() == 0.0 {
            FactorKind::SymmetricLdlt
        } else {
            FactorKind::Lu
        };
        let at = (kind == FactorKind::Lu).then(|| a.transpose());

        let symbolic = match ordering {
            Ordering::Dense => Symbolic::build(a, at.as_ref(), SupernodeTree::single(n)),
            Ordering::Graph => {
                Symbolic::build(a, at.as_ref(), graph_nested_dissection(a, LEAF_SIZE))
            }
            Ordering::Lattice { coords, stride } => {
                if coords.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: coords.len(),
                    });
                }
                Symbolic::build(
                    a,
                    at.as_ref(),
                    geometric_nested_dissection(coords, stride, LEAF_SIZE),
                )
                .or_else(|| Symbolic::build(a, at.as_ref(), graph_nested_dissection(a, LEAF_SIZE)))
            }
        }
        .ok_or_else(|| Error::InvalidParameter("inconsistent elimination tree".into()))?;

        let tol = a.max_abs() * f64::EPSILON * 16.0;
        numeric(a, at.as_ref(), kind, symbolic, tol)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    /// Stored factor entries.
    pub fn factor_entries(&self) -> usize {
        self.fronts
            .iter()
            .map(|f| f.lower.len() + f.upper.len())
            .sum()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.check_len(b.len())?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Solves `A^* x = b` (conjugate transpose).
    pub fn solve_adjoint(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.check_len(b.len())?;
        let mut x: Vec<C64> = b.iter().map(|v| v.conj()).collect();
        self.solve_transpose_in_place(&mut x);
        for v in &mut x {
            *v = v.conj();
        }
        Ok(x)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    /// Overwrites `x` (holding `b`) with `A^{-1} b`. Panics on length mismatch.
    pub fn solve_in_place(&self, x: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        let mut buf = vec![ZERO; self.max_front];
        match self.kind {
            FactorKind::SymmetricLdlt => self.ldlt_solve(x, &mut buf),
            FactorKind::Lu => self.lu_solve(x, &mut buf),
        }
    }

    /// Overwrites `x` (holding `b`) with `A^{-T} b`.
    pub fn solve_transpose_in_place(&self, x: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        let mut buf = vec![ZERO; self.max_front];
        match self.kind {
            FactorKind::SymmetricLdlt => self.ldlt_solve(x, &mut buf),
            FactorKind::Lu => self.lu_transpose_solve(x, &mut buf),
        }
    }

    fn ldlt_solve(&self, x: &mut [C64], buf: &mut [C64]) {
        for f in &self.fronts {
            let m = f.rows.len();
            let y = &mut buf[..m];
            for (yi, &r) in y.iter_mut().zip(&f.rows) {
                *yi = x[r];
            }
            for j in 0..f.npiv {
                let yj = y[j];
                let col = &f.lower[packed_offset(m, j)..packed_offset(m, j + 1)];
                for (yi, l) in y[j + 1..].iter_mut().zip(&col[1..]) {
                    *yi -= l * yj;
                }
            }
            for j in 0..f.npiv {
                y[j] /= f.lower[packed_offset(m, j)];
            }
            for (yi, &r) in y.iter().zip(&f.rows) {
                x[r] = *yi;
            }
        }
        for f in self.fronts.iter().rev() {
            let m = f.rows.len();
            let y = &mut buf[..m];
            for (yi, &r) in y.iter_mut().zip(&f.rows) {
                *yi = x[r];
            }
            for j in (0..f.npiv).rev() {
                let col = &f.lower[packed_offset(m, j)..packed_offset(m, j + 1)];
                let mut acc = y[j];
                for (l, yi) in col[1..].iter().zip(&y[j + 1..]) {
                    acc -= l * yi;
                }
                y[j] = acc;
            }
            for (yi, &r) in y[..f.npiv].iter().zip(&f.rows) {
                x[r] = *yi;
            }
        }
    }

    fn lu_solve(&self, x: &mut [C64], buf: &mut [C64]) {
        for f in &self.fronts {
            let m = f.rows.len();
            let y = &mut buf[..m];
            for (yi, &r) in y.iter_mut().zip(&f.rows) {
                *yi = x[r];
            }
            for j in 0..f.npiv {
                let yj = y[j];
                let col = &f.lower[j * m..(j + 1) * m];
                for i in j + 1..m {
                    y[i] -= col[i] * yj;
                }
            }
            // forward values now live on the pivot columns
            for (yi, &c) in y[..f.npiv].iter().zip(&f.cols) {
                x[c] = *yi;
            }
            for (yi, &r) in y[f.npiv..].iter().zip(&f.rows[f.npiv..]) {
                x[r] = *yi;
            }
        }
        for f in self.fronts.iter().rev() {
            let m = f.rows.len();
            let np = f.npiv;
            let y = &mut buf[..m];
            for (yi, &c) in y[..np].iter_mut().zip(&f.cols) {
                *yi = x[c];
            }
            for (yi, &r) in y[np..].iter_mut().zip(&f.rows[np..]) {
                *yi = x[r];
            }
            for j in (0..np).rev() {
                let mut acc = y[j];
                let u12 = &f.upper[j * (m - np)..(j + 1) * (m - np)];
                for (u, v) in u12.iter().zip(&y[np..]) {
                    acc -= u * v;
                }
                for t in j + 1..np {
                    acc -= f.lower[t * m + j] * y[t];
                }
                y[j] = acc / f.lower[j * m + j];
            }
            for (yi, &c) in y[..np].iter().zip(&f.cols) {
                x[c] = *yi;
            }
        }
    }

    fn lu_transpose_solve(&self, x: &mut [C64], buf: &mut [C64]) {
        // A^T = U^T L^T P: forward with U^T, backward with L^T
        for f in &self.fronts {
            let m = f.rows.len();
            let np = f.npiv;
            let y = &mut buf[..m];
            for (yi, &c) in y[..np].iter_mut().zip(&f.cols) {
                *yi = x[c];
            }
            for (yi, &r) in y[np..].iter_mut().zip(&f.rows[np..]) {
                *yi = x[r];
            }
            for j in 0..np {
                let mut acc = y[j];
                for t in 0..j {
                    acc -= f.lower[j * m + t] * y[t];
                }
                y[j] = acc / f.lower[j * m + j];
            }
            for j in 0..np {
                let yj = y[j];
                let u12 = &f.upper[j * (m - np)..(j + 1) * (m - np)];
                for (yi, u) in y[np..].iter_mut().zip(u12) {
                    *yi -= u * yj;
                }
            }
            for (yi, &c) in y[..np].iter().zip(&f.cols) {
                x[c] = *yi;
            }
            for (yi, &r) in y[np..].iter().zip(&f.rows[np..]) {
                x[r] = *yi;
            }
        }
        for f in self.fronts.iter().rev() {
            let m = f.rows.len();
            let np = f.npiv;
            let y = &mut buf[..m];
            for (yi, &c) in y[..np].iter_mut().zip(&f.cols) {
                *yi = x[c];
            }
            for (yi, &r) in y[np..].iter_mut().zip(&f.rows[np..]) {
                *yi = x[r];
            }
            for j in (0..np).rev() {
                let col = &f.lower[j * m..(j + 1) * m];
                let mut acc = y[j];
                for i in j + 1..m {
                    acc -= col[i] * y[i];
                }
                y[j] = acc;
            }
            for (yi, &r) in y[..np].iter().zip(&f.rows) {
                x[r] = *yi;
            }
        }
    }
}

/// Supernode tree with each node's update-row structure.
struct Symbolic {
    tree: SupernodeTree,
    /// Original indices of each node's update rows, sorted by elimination position.
    structure: Vec<Vec<usize>>,
}

impl Symbolic {
    /// Returns `None` when the tree does not separate the pattern.
    fn build(a: &CsrMatrix, at: Option<&CsrMatrix>, tree: SupernodeTree) -> Option<Self> {
        let n = a.nrows();
        let nodes = tree.len();
        let mut pos = vec![0usize; n];
        let mut node_of = vec![usize::MAX; n];
        let mut first = vec![0usize; nodes + 1];
        let mut next = 0;
        for (s, vars) in tree.vars.iter().enumerate() {
            first[s] = next;
            for &v in vars {
                pos[v] = next;
                node_of[v] = s;
                next += 1;
            }
        }
        first[nodes] = next;
        if next != n || node_of.contains(&usize::MAX) {
            return None;
        }
        // lowest node index in each subtree, for ancestor tests
        let mut lowest: Vec<usize> = (0..nodes).collect();
        for s in 0..nodes {
            if let Some(p) = tree.parent[s] {
                lowest[p] = lowest[p].min(lowest[s]);
            }
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for s in 0..nodes {
            if let Some(p) = tree.parent[s] {
                children[p].push(s);
            }
        }

        let mut mark = vec![usize::MAX; n];
        let mut structure: Vec<Vec<usize>> = Vec::with_capacity(nodes);
        for s in 0..nodes {
            let end = first[s + 1];
            let mut st: Vec<usize> = Vec::new();
            let mut add = |u: usize, st: &mut Vec<usize>| {
                if pos[u] >= end && mark[u] != s {
                    mark[u] = s;
                    st.push(u);
                }
            };
            for &v in &tree.vars[s] {
                for &u in a.row(v).0 {
                    add(u, &mut st);
                }
                if let Some(at) = at {
                    for &u in at.row(v).0 {
                        add(u, &mut st);
                    }
                }
            }
            for &c in &children[s] {
                for &u in &structure[c] {
                    add(u, &mut st);
                }
            }
            for &u in &st {
                let t = node_of[u];
                if !(lowest[t] <= s && s < t) {
                    return None;
                }
            }
            st.sort_unstable_by_key(|&u| pos[u]);
            structure.push(st);
        }
        Some(Self { tree, structure })
    }
}

struct ContributionBlock {
    rows: Vec<usize>,
    /// LDLT: packed lower columns. LU: column-major square block.
    data: Vec<C64>,
}

fn numeric(
    a: &CsrMatrix,
    at: Option<&CsrMatrix>,
    kind: FactorKind,
    symbolic: Symbolic,
    tol: f64,
) -> Result<SparseFactorization> {
    let n = a.nrows();
    let Symbolic { tree, structure } = symbolic;
    let nodes = tree.len();
    let mut nchildren = vec![0usize; nodes];
    for s in 0..nodes {
        if let Some(p) = tree.parent[s] {
            if !structure[s].is_empty() {
                nchildren[p] += 1;
            }
        }
    }

    let mut fmap = vec![usize::MAX; n];
    let mut stack: Vec<ContributionBlock> = Vec::new();
    let mut fronts = Vec::with_capacity(nodes);
    let mut max_front = 0;

    for (s, st) in structure.into_iter().enumerate() {
        let own = &tree.vars[s];
        let npiv = own.len();
        let mut rows = Vec::with_capacity(npiv + st.len());
        rows.extend_from_slice(own);
        rows.extend_from_slice(&st);
        let m = rows.len();
        max_front = max_front.max(m);
        for (l, &g) in rows.iter().enumerate() {
            fmap[g] = l;
        }

        let mut f = vec![ZERO; m * m];
        for (lv, &v) in own.iter().enumerate() {
            let (cols, vals) = a.row(v);
            for (&u, &val) in cols.iter().zip(vals) {
                let lu = fmap[u];
                if lu == usize::MAX {
                    continue;
                }
                match kind {
                    // row v of a symmetric matrix is also column v
                    FactorKind::SymmetricLdlt => {
                        if lu >= lv {
                            f[lv * m + lu] += val;
                        }
                    }
                    // entry (v, u): row v, column u
                    FactorKind::Lu => f[lu * m + lv] += val,
                }
            }
            if let Some(at) = at {
                // column v of A: entries (u, v) with u outside the pivot block
                let (rws, vals) = at.row(v);
                for (&u, &val) in rws.iter().zip(vals) {
                    let lu = fmap[u];
                    if lu != usize::MAX && lu >= npiv {
                        f[lv * m + lu] += val;
                    }
                }
            }
        }

        for _ in 0..nchildren[s] {
            let cb = stack.pop().expect("contribution block stack underflow");
            let mc = cb.rows.len();
            for (cj, &gj) in cb.rows.iter().enumerate() {
                let fj = fmap[gj];
                match kind {
                    FactorKind::SymmetricLdlt => {
                        let col = &cb.data[packed_offset(mc, cj)..packed_offset(mc, cj + 1)];
                        for (&gi, &v) in cb.rows[cj..].iter().zip(col) {
                            let fi = fmap[gi];
                            let (r, c) = if fi >= fj { (fi, fj) } else { (fj, fi) };
                            f[c * m + r] += v;
                        }
                    }
                    FactorKind::Lu => {
                        for (ci, &gi) in cb.rows.iter().enumerate() {
                            f[fj * m + fmap[gi]] += cb.data[cj * mc + ci];
                        }
                    }
                }
            }
        }

        let front = match kind {
            FactorKind::SymmetricLdlt => factor_ldlt_front(&mut f, m, npiv, rows, tol)?,
            FactorKind::Lu => factor_lu_front(&mut f, m, npiv, rows, tol)?,
        };
        for &g in &front.rows {
            fmap[g] = usize::MAX;
        }
        if m > npiv {
            let mc = m - npiv;
            let data = match kind {
                FactorKind::SymmetricLdlt => {
                    let mut data = Vec::with_capacity(packed_offset(mc, mc));
                    for j in npiv..m {
                        data.extend_from_slice(&f[j * m + j..(j + 1) * m]);
                    }
                    data
                }
                FactorKind::Lu => {
                    let mut data = Vec::with_capacity(mc * mc);
                    for j in npiv..m {
                        data.extend_from_slice(&f[j * m + npiv..(j + 1) * m]);
                    }
                    data
                }
            };
            drop(f);
            stack.push(ContributionBlock {
                rows: front.rows[npiv..].to_vec(),
                data,
            });
        }
        fronts.push(front);
    }

    Ok(SparseFactorization {
        n,
        kind,
        fronts,
        max_front,
    })
}

/// Start of packed lower column `j` in an order-`m` matrix.
fn packed_offset(m: usize, j: usize) -> usize {
    j * m - j * j.saturating_sub(1) / 2
}

/// Swaps symmetric indices `a < b` in a lower-stored column-major matrix.
fn symmetric_swap(f: &mut [C64], m: usize, a: usize, b: usize) {
    debug_assert!(a < b);
    f.swap(a * m + a, b * m + b);
    for k in 0..a {
        f.swap(k * m + a, k * m + b);
    }
    for k in a + 1..b {
        f.swap(a * m + k, k * m + b);
    }
    for k in b + 1..m {
        f.swap(a * m + k, b * m + k);
    }
}

fn factor_ldlt_front(
    f: &mut [C64],
    m: usize,
    npiv: usize,
    mut rows: Vec<usize>,
    tol: f64,
) -> Result<Front> {
    let mut w = vec![ZERO; m * PANEL];
    let mut p0 = 0;
    while p0 < npiv {
        let p1 = (p0 + PANEL).min(npiv);
        let nb = p1 - p0;
        for j in p0..p1 {
            // diagonal pivot search over the remaining fully-summed block
            let mut best = j;
            let mut best_abs = -1.0;
            for i in j..npiv {
                let mut d = f[i * m + i];
                for t in p0..j {
                    d -= f[t * m + i] * w[(t - p0) * m + i];
                }
                if d.norm() > best_abs {
                    best_abs = d.norm();
                    best = i;
                }
            }
            if best_abs <= tol {
                return Err(Error::SingularMatrix { row: rows[best] });
            }
            if best != j {
                symmetric_swap(f, m, j, best);
                for t in 0..j - p0 {
                    w.swap(t * m + j, t * m + best);
                }
                rows.swap(j, best);
            }
            for t in p0..j {
                let wj = w[(t - p0) * m + j];
                let (head, tail) = f.split_at_mut(j * m);
                let lt = &head[t * m..(t + 1) * m];
                let cj = &mut tail[..m];
                for i in j..m {
                    cj[i] -= lt[i] * wj;
                }
            }
            let dj = f[j * m + j];
            let inv = dj.inv();
            let wc = &mut w[(j - p0) * m..(j - p0 + 1) * m];
            wc[j] = dj;
            for i in j + 1..m {
                let c = f[j * m + i];
                wc[i] = c;
                f[j * m + i] = c * inv;
            }
        }
        if p1 < m {
            let (left, right) = f.split_at_mut(p1 * m);
            let lpanel =
                MatRef::from_column_major_slice(&left[p0 * m..], m, nb).subrows(p1, m - p1);
            let wpanel = MatRef::from_column_major_slice(&w[..nb * m], m, nb).subrows(p1, m - p1);
            let trail =
                MatMut::from_column_major_slice_mut(right, m, m - p1).subrows_mut(p1, m - p1);
            triangular::matmul(
                trail,
                BlockStructure::TriangularLower,
                Accum::Add,
                lpanel,
                BlockStructure::Rectangular,
                wpanel.transpose(),
                BlockStructure::Rectangular,
                C64::new(-1.0, 0.0),
                Par::Seq,
            );
        }
        p0 = p1;
    }
    let mut lower = Vec::with_capacity(packed_offset(m, npiv));
    for j in 0..npiv {
        lower.extend_from_slice(&f[j * m + j..(j + 1) * m]);
    }
    Ok(Front {
        rows,
        cols: Vec::new(),
        npiv,
        lower,
        upper: Vec::new(),
    })
}

fn factor_lu_front(
    f: &mut [C64],
    m: usize,
    npiv: usize,
    mut rows: Vec<usize>,
    tol: f64,
) -> Result<Front> {
    let cols = rows[..npiv].to_vec();
    for j in 0..npiv {
        let mut best = j;
        let mut best_abs = -1.0;
        for i in j..npiv {
            let v = f[j * m + i].norm();
            if v > best_abs {
                best_abs = v;
                best = i;
            }
        }
        if best_abs <= tol {
            return Err(Error::SingularMatrix { row: cols[j] });
        }
        if best != j {
            for c in 0..m {
                f.swap(c * m + j, c * m + best);
            }
            rows.swap(j, best);
        }
        let inv = f[j * m + j].inv();
        for i in j + 1..m {
            f[j * m + i] *= inv;
        }
        let (head, tail) = f.split_at_mut((j + 1) * m);
        let lcol = &head[j * m..];
        for c in 0..m - j - 1 {
            let col = &mut tail[c * m..(c + 1) * m];
            let ujc = col[j];
            if ujc == ZERO {
                continue;
            }
            for i in j + 1..m {
                col[i] -= lcol[i] * ujc;
            }
        }
    }
    let mc = m - npiv;
    let mut upper = vec![ZERO; npiv * mc];
    for j in 0..npiv {
        for c in 0..mc {
            upper[j * mc + c] = f[(npiv + c) * m + j];
        }
    }
    Ok(Front {
        rows,
        cols,
        npiv,
        lower: f[..npiv * m].to_vec(),
        upper,
    })
}
