//! Continuous degree-`p` Lagrange finite elements on the structured fine mesh.
//!
//! Nodes form the `(N p + 1) x (N p + 1)` lattice of the unit square, where
//! `N` is the number of fine squares per side. Node `(X, Y)` sits at
//! `(X, Y) / (N p)` and has dof index `Y (N p + 1) + X`.

mod assembly;
mod basis;
mod errors;
mod quadrature;

pub use assembly::{
    assemble, assemble_local, assemble_with_degree, default_quadrature_degree, subdomain_boundary,
    AssembledSystem, LocalBoundaryEdge,
};
pub use basis::LagrangeBasis;
pub use errors::{errors_vs_planewave, interpolate, plane_wave, plane_wave_gradient, DIRECTION};
pub use quadrature::{gauss_jacobi, gauss_legendre, triangle_rule, QuadratureRule};

use crate::mesh::FineMesh;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: FineMesh,
    basis: LagrangeBasis,
    side: usize,
    /// `ntri x nloc` element-to-dof map.
    connectivity: Vec<usize>,
}

impl FeSpace {
    pub fn new(mesh: FineMesh, p: usize) -> Result<Self> {
        if !(1..=4).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "degree must be 1..=4, got {p}"
            )));
        }
        let basis = LagrangeBasis::new(p);
        let n = mesh.cells_per_side();
        let side = n * p + 1;
        let nloc = basis.len();
        let ntri = mesh.triangles().len();
        let mut connectivity = Vec::with_capacity(ntri * nloc);
        for t in 0..ntri {
            let (i, j) = mesh.cell_of_triangle(t);
            let (x0, y0) = (p * i, p * j);
            for node in basis.nodes() {
                let [_, l1, l2] = *node;
                let (x, y) = if mesh.is_upper(t) {
                    (x0 + l1, y0 + l1 + l2)
                } else {
                    (x0 + l1 + l2, y0 + l2)
                };
                connectivity.push(y * side + x);
            }
        }
        Ok(Self {
            mesh,
            basis,
            side,
            connectivity,
        })
    }

    pub fn mesh(&self) -> &FineMesh {
        &self.mesh
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn ndofs(&self) -> usize {
        self.side * self.side
    }

    /// Nodes per side of the dof lattice.
    pub fn lattice_side(&self) -> usize {
        self.side
    }

    /// Dofs of triangle `t` in local basis order.
    pub fn element_dofs(&self, t: usize) -> &[usize] {
        let nloc = self.basis.len();
        &self.connectivity[t * nloc..(t + 1) * nloc]
    }

    /// Integer lattice coordinates `(X, Y)` of a dof.
    pub fn lattice_coords(&self, dof: usize) -> [i64; 2] {
        [(dof % self.side) as i64, (dof / self.side) as i64]
    }

    pub fn node(&self, dof: usize) -> [f64; 2] {
        let s = (self.side - 1) as f64;
        let [x, y] = self.lattice_coords(dof);
        [x as f64 / s, y as f64 / s]
    }

    /// Dofs along a boundary edge of triangle `t`, ordered along the edge.
    pub fn edge_dofs(&self, t: usize, local_edge: usize) -> Vec<usize> {
        let dofs = self.element_dofs(t);
        self.basis
            .edge_nodes(local_edge)
            .into_iter()
            .map(|a| dofs[a])
            .collect()
    }

    /// Sorted dofs lying on the outer boundary.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        let s = self.side;
        (0..self.ndofs())
            .filter(|&q| {
                let (x, y) = (q % s, q / s);
                x == 0 || y == 0 || x == s - 1 || y == s - 1
            })
            .collect()
    }
}
