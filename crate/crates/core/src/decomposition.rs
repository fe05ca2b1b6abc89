//! Overlapping subdomains with partition-of-unity weights.

use num_complex::Complex64 as C64;

use crate::fespace::{subdomain_boundary, FeSpace, LocalBoundaryEdge};
use crate::{Error, Result};

/// How the subdomains were built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// One subdomain per coarse vertex: the support of its bilinear hat.
    VertexPatches,
    /// One subdomain per coarse square, grown by `layers` fine-cell rings.
    ExtendedSquares { layers: usize },
    /// A single subdomain covering the whole domain.
    WholeDomain,
}

/// One overlapping subdomain: a box of fine cells of the structured mesh.
#[derive(Debug, Clone)]
pub struct Subdomain {
    pub id: usize,
    /// Global dofs of the closed subdomain, increasing.
    pub dofs: Vec<usize>,
    /// Partition-of-unity weight at each listed dof.
    pub chi: Vec<f64>,
    /// Triangles composing the subdomain, increasing.
    pub triangles: Vec<usize>,
    /// Every boundary edge of the subdomain; all carry the impedance condition.
    pub boundary: Vec<LocalBoundaryEdge>,
    /// Fine-cell box `[i0, i1) x [j0, j1)`.
    pub cells: [usize; 4],
}

impl Subdomain {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    subdomains: Vec<Subdomain>,
    ndofs: usize,
    strategy: Strategy,
    /// Largest number of subdomains with positive weight at one dof.
    pub overlap_count: usize,
    /// Coarse square side.
    pub coarse_h: f64,
    /// Overlap width.
    pub delta: f64,
}

/// Number of fine-cell layers realising overlap `delta` on a mesh of width `h`.
pub fn layers_for_overlap(delta: f64, h: f64) -> usize {
    ((delta / h).round() as usize).max(1)
}

impl Decomposition {
    /// Strategy 1: subdomain `l` is the union of the coarse squares touching
    /// coarse vertex `l`; its weight is the bilinear hat of that vertex.
    pub fn strategy1(space: &FeSpace) -> Result<Self> {
        let mesh = space.mesh();
        let m = mesh.coarse().m();
        if m < 2 {
            return Err(Error::InvalidParameter("vertex patches need M >= 2".into()));
        }
        let r = mesh.refinement();
        let big_h = mesh.coarse().h();
        let mut boxes = Vec::with_capacity((m + 1) * (m + 1));
        let mut weights: Vec<Box<dyn Fn([f64; 2]) -> f64>> = Vec::new();
        for jv in 0..=m {
            for iv in 0..=m {
                let cells = [
                    iv.saturating_sub(1) * r,
                    (iv + 1).min(m) * r,
                    jv.saturating_sub(1) * r,
                    (jv + 1).min(m) * r,
                ];
                boxes.push(cells);
                let (cx, cy) = (iv as f64, jv as f64);
                weights.push(Box::new(move |x: [f64; 2]| {
                    let hx = (1.0 - (x[0] / big_h - cx).abs()).max(0.0);
                    let hy = (1.0 - (x[1] / big_h - cy).abs()).max(0.0);
                    hx * hy
                }));
            }
        }
        let subdomains = build(space, &boxes, |l, x| weights[l](x), false);
        Ok(Self::finish(
            space,
            subdomains,
            Strategy::VertexPatches,
            big_h,
            big_h,
        ))
    }

    /// Strategy 2: subdomain `l` is coarse square `l` grown by `layers` rings
    /// of fine cells. The raw weight is 1 on the closed coarse square and
    /// decays linearly in L-infinity distance to 0 at the grown boundary;
    /// weights are then normalised to sum to one.
    pub fn strategy2(space: &FeSpace, layers: usize) -> Result<Self> {
        let mesh = space.mesh();
        let m = mesh.coarse().m();
        if m < 2 {
            return Err(Error::InvalidParameter(
                "extended squares need M >= 2".into(),
            ));
        }
        if layers == 0 {
            return Err(Error::InvalidParameter(
                "overlap needs at least one layer".into(),
            ));
        }
        let r = mesh.refinement();
        let n = mesh.cells_per_side();
        let h = mesh.h();
        let big_h = mesh.coarse().h();
        let mut boxes = Vec::with_capacity(m * m);
        for jc in 0..m {
            for ic in 0..m {
                let cells = [
                    (ic * r).saturating_sub(layers),
                    ((ic + 1) * r + layers).min(n),
                    (jc * r).saturating_sub(layers),
                    ((jc + 1) * r + layers).min(n),
                ];
                if cells == [0, n, 0, n] {
                    return Err(Error::InvalidParameter(format!(
                        "{layers} overlap layers make subdomain {} cover the whole domain",
                        jc * m + ic
                    )));
                }
                boxes.push(cells);
            }
        }
        let ramp = layers as f64 * h;
        let raw = |l: usize, x: [f64; 2]| {
            let (ic, jc) = ((l % m) as f64, (l / m) as f64);
            let dx = (ic * big_h - x[0]).max(x[0] - (ic + 1.0) * big_h).max(0.0);
            let dy = (jc * big_h - x[1]).max(x[1] - (jc + 1.0) * big_h).max(0.0);
            (1.0 - dx.max(dy) / ramp).max(0.0)
        };
        let subdomains = build(space, &boxes, raw, true);
        Ok(Self::finish(
            space,
            subdomains,
            Strategy::ExtendedSquares { layers },
            big_h,
            ramp,
        ))
    }

    /// One subdomain equal to the whole domain with unit weight.
    pub fn whole_domain(space: &FeSpace) -> Self {
        let n = space.mesh().cells_per_side();
        let subdomains = build(space, &[[0, n, 0, n]], |_, _| 1.0, false);
        Self::finish(space, subdomains, Strategy::WholeDomain, 1.0, 0.0)
    }

    fn finish(
        space: &FeSpace,
        subdomains: Vec<Subdomain>,
        strategy: Strategy,
        coarse_h: f64,
        delta: f64,
    ) -> Self {
        let mut count = vec![0usize; space.ndofs()];
        for s in &subdomains {
            for (&g, &c) in s.dofs.iter().zip(&s.chi) {
                if c > 0.0 {
                    count[g] += 1;
                }
            }
        }
        Self {
            subdomains,
            ndofs: space.ndofs(),
            strategy,
            overlap_count: count.into_iter().max().unwrap_or(0),
            coarse_h,
            delta,
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomains
    }

    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    /// `Σ_l χ_l` at every global dof.
    pub fn weight_sum(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.ndofs];
        for s in &self.subdomains {
            for (&g, &c) in s.dofs.iter().zip(&s.chi) {
                sum[g] += c;
            }
        }
        sum
    }

    /// `χ_l ⊙ v` on the dofs of subdomain `l`.
    pub fn restrict_weighted(&self, l: usize, v: &[C64]) -> Result<Vec<C64>> {
        self.check_len(v.len())?;
        let s = &self.subdomains[l];
        Ok(s.dofs.iter().zip(&s.chi).map(|(&g, &c)| v[g] * c).collect())
    }

    /// `v` on the dofs of subdomain `l`.
    pub fn restrict_chop(&self, l: usize, v: &[C64]) -> Result<Vec<C64>> {
        self.check_len(v.len())?;
        Ok(self.subdomains[l].dofs.iter().map(|&g| v[g]).collect())
    }

    /// `out += R̃_l^T w`: weights the local vector and adds it into the global one.
    pub fn prolong_add(&self, l: usize, w: &[C64], out: &mut [C64]) -> Result<()> {
        let s = &self.subdomains[l];
        if w.len() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                got: w.len(),
            });
        }
        self.check_len(out.len())?;
        for ((&g, &c), &x) in s.dofs.iter().zip(&s.chi).zip(w) {
            out[g] += x * c;
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.ndofs {
            return Err(Error::DimensionMismatch {
                expected: self.ndofs,
                got: len,
            });
        }
        Ok(())
    }
}

/// Builds the subdomains for the given cell boxes. With `normalise`, the raw
/// weights are divided by their sum over all subdomains.
fn build(
    space: &FeSpace,
    boxes: &[[usize; 4]],
    weight: impl Fn(usize, [f64; 2]) -> f64,
    normalise: bool,
) -> Vec<Subdomain> {
    let p = space.degree();
    let side = space.lattice_side();
    let mesh = space.mesh();
    let mut subdomains: Vec<Subdomain> = boxes
        .iter()
        .enumerate()
        .map(|(id, &cells)| {
            let [i0, i1, j0, j1] = cells;
            let mut dofs = Vec::with_capacity((p * (i1 - i0) + 1) * (p * (j1 - j0) + 1));
            for y in p * j0..=p * j1 {
                for x in p * i0..=p * i1 {
                    dofs.push(y * side + x);
                }
            }
            let chi = dofs.iter().map(|&g| weight(id, space.node(g))).collect();
            let mut triangles = Vec::with_capacity(2 * (i1 - i0) * (j1 - j0));
            for j in j0..j1 {
                for i in i0..i1 {
                    triangles.extend(mesh.cell_triangles(i, j));
                }
            }
            let boundary = subdomain_boundary(space, &triangles);
            Subdomain {
                id,
                dofs,
                chi,
                triangles,
                boundary,
                cells,
            }
        })
        .collect();
    if normalise {
        let mut sum = vec![0.0; space.ndofs()];
        for s in &subdomains {
            for (&g, &c) in s.dofs.iter().zip(&s.chi) {
                sum[g] += c;
            }
        }
        for s in &mut subdomains {
            for (&g, c) in s.dofs.iter().zip(s.chi.iter_mut()) {
                *c /= sum[g];
            }
        }
    }
    subdomains
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{CoarseMesh, FineMesh};

    fn space(m: usize, r: usize, p: usize) -> FeSpace {
        let mesh = FineMesh::with_factor(&CoarseMesh::fixed(m).unwrap(), r).unwrap();
        FeSpace::new(mesh, p).unwrap()
    }

    #[test]
    fn strategy1_counts() {
        let sp = space(2, 3, 1);
        let d = Decomposition::strategy1(&sp).unwrap();
        assert_eq!(d.len(), 9);
        // corner patch is a single coarse square
        assert_eq!(d.subdomains()[0].triangles.len(), 2 * 9);
        assert_eq!(d.subdomains()[4].triangles.len(), 2 * 36);
        let sp3 = space(3, 2, 2);
        assert_eq!(Decomposition::strategy1(&sp3).unwrap().overlap_count, 4);
    }

    #[test]
    fn strategy2_interior_weights() {
        let sp = space(2, 6, 1);
        let d = Decomposition::strategy2(&sp, 1).unwrap();
        assert_eq!(d.len(), 4);
        // node (1/12, 1/12) is deep inside square 0
        let g = sp.lattice_side() + 1;
        for s in d.subdomains() {
            match s.dofs.binary_search(&g) {
                Ok(q) => assert_eq!(s.chi[q], if s.id == 0 { 1.0 } else { 0.0 }),
                Err(_) => assert_ne!(s.id, 0),
            }
        }
    }

    #[test]
    fn rejects_degenerate_configs() {
        let sp = space(2, 2, 1);
        assert!(Decomposition::strategy2(&sp, 4).is_err());
        assert!(Decomposition::strategy2(&sp, 0).is_err());
        let single = space(1, 4, 1);
        assert!(Decomposition::strategy1(&single).is_err());
        assert!(Decomposition::strategy2(&single, 1).is_err());
    }

    #[test]
    fn whole_domain_restriction_is_identity() {
        let sp = space(2, 2, 2);
        let d = Decomposition::whole_domain(&sp);
        let v: Vec<C64> = (0..sp.ndofs()).map(|i| C64::new(i as f64, 1.0)).collect();
        assert_eq!(d.restrict_weighted(0, &v).unwrap(), v);
        assert_eq!(d.restrict_chop(0, &v).unwrap(), v);
    }

    #[test]
    fn layer_rule() {
        assert_eq!(layers_for_overlap(0.25 / 4.0, 1.0 / 76.0), 5);
        assert_eq!(layers_for_overlap(1e-6, 0.1), 1);
    }
}
