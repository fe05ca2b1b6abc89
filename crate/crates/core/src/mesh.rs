//! Structured coarse and fine meshes of the unit square.

use std::io::{self, Write};

use crate::{Error, Result};

/// Default cap on fine-mesh vertices.
pub const DEFAULT_MAX_VERTICES: usize = 4_000_000;

/// Uniform mesh of `M x M` coarse squares of side `H = 1/M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoarseMesh {
    m: usize,
}

impl CoarseMesh {
    /// `M = floor(k^alpha)`, at least 2.
    pub fn from_wavenumber(k: f64, alpha: f64) -> Result<Self> {
        if !(k >= 1.0) || !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "coarse mesh needs k >= 1 and alpha in (0, 1], got k = {k}, alpha = {alpha}"
            )));
        }
        // a tiny slack keeps exact integer powers from flooring down
        let m = ((k.powf(alpha) * (1.0 + 1e-12)).floor() as usize).max(2);
        Ok(Self { m })
    }

    /// Coarse mesh with `M` given directly. `M = 1` is accepted for
    /// whole-domain runs; the decompositions themselves need `M >= 2`.
    pub fn fixed(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("coarse mesh needs M >= 1".into()));
        }
        Ok(Self { m })
    }

    /// Squares per side.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }
}

/// Fine-mesh width target `k^{-1-1/(2p)}`.
pub fn target_fine_width(k: f64, p: usize) -> f64 {
    k.powf(-1.0 - 1.0 / (2.0 * p as f64))
}

/// Smallest `r` with `H / r <= k^{-1-1/(2p)}`.
pub fn refinement_factor(coarse: &CoarseMesh, k: f64, p: usize) -> usize {
    let ratio = coarse.h() / target_fine_width(k, p);
    let nearest = ratio.round();
    // guard against rounding turning an exact integer ratio into the next one
    let r = if (ratio - nearest).abs() <= 1e-9 * ratio {
        nearest
    } else {
        ratio.ceil()
    };
    (r as usize).max(1)
}

/// One edge on the outer boundary, oriented counterclockwise around the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub triangle: usize,
    /// Local edge index within `triangle` (edge `e` is opposite vertex `e`).
    pub local_edge: usize,
    pub normal: [f64; 2],
}

/// Uniform refinement of a coarse mesh: each coarse square holds `r x r` fine
/// squares, each split into two triangles along its lower-left to
/// upper-right diagonal.
///
/// Vertex `(i, j)` of the `(n+1) x (n+1)` lattice has index `j (n+1) + i`.
/// Fine square `(i, j)` owns triangles `2 (j n + i)` (below the diagonal)
/// and `2 (j n + i) + 1` (above it).
#[derive(Debug, Clone)]
pub struct FineMesh {
    coarse: CoarseMesh,
    r: usize,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    parent: Vec<usize>,
}

impl FineMesh {
    /// Refines by the pollution rule for wavenumber `k` and degree `p`.
    pub fn refine(coarse: &CoarseMesh, k: f64, p: usize) -> Result<Self> {
        Self::refine_capped(coarse, k, p, DEFAULT_MAX_VERTICES)
    }

    pub fn refine_capped(
        coarse: &CoarseMesh,
        k: f64,
        p: usize,
        max_vertices: usize,
    ) -> Result<Self> {
        if !(1..=4).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "degree must be 1..=4, got {p}"
            )));
        }
        let r = refinement_factor(coarse, k, p);
        Self::with_factor_capped(coarse, r, max_vertices)
    }

    /// Refines each coarse square into `r x r` fine squares.
    pub fn with_factor(coarse: &CoarseMesh, r: usize) -> Result<Self> {
        Self::with_factor_capped(coarse, r, DEFAULT_MAX_VERTICES)
    }

    pub fn with_factor_capped(coarse: &CoarseMesh, r: usize, max_vertices: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter(
                "refinement factor must be >= 1".into(),
            ));
        }
        let n = coarse.m() * r;
        let nv = (n + 1) * (n + 1);
        if nv > max_vertices {
            return Err(Error::SizeCap {
                what: "fine mesh vertices",
                size: nv,
                cap: max_vertices,
            });
        }
        let h = 1.0 / n as f64;
        let vid = |i: usize, j: usize| j * (n + 1) + i;

        let mut vertices = Vec::with_capacity(nv);
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        let mut parent = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let c = (j / r) * coarse.m() + i / r;
                triangles.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
                triangles.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
                parent.extend([c, c]);
            }
        }

        let tri = |i: usize, j: usize, upper: bool| 2 * (j * n + i) + upper as usize;
        let mut boundary = Vec::with_capacity(4 * n);
        for i in 0..n {
            // bottom: edge v0-v1 of the lower triangle
            boundary.push(BoundaryEdge {
                vertices: [vid(i, 0), vid(i + 1, 0)],
                triangle: tri(i, 0, false),
                local_edge: 2,
                normal: [0.0, -1.0],
            });
        }
        for j in 0..n {
            // right: edge v1-v2 of the lower triangle
            boundary.push(BoundaryEdge {
                vertices: [vid(n, j), vid(n, j + 1)],
                triangle: tri(n - 1, j, false),
                local_edge: 0,
                normal: [1.0, 0.0],
            });
        }
        for i in (0..n).rev() {
            // top: edge v1-v2 of the upper triangle
            boundary.push(BoundaryEdge {
                vertices: [vid(i + 1, n), vid(i, n)],
                triangle: tri(i, n - 1, true),
                local_edge: 0,
                normal: [0.0, 1.0],
            });
        }
        for j in (0..n).rev() {
            // left: edge v2-v0 of the upper triangle
            boundary.push(BoundaryEdge {
                vertices: [vid(0, j + 1), vid(0, j)],
                triangle: tri(0, j, true),
                local_edge: 1,
                normal: [-1.0, 0.0],
            });
        }

        Ok(Self {
            coarse: *coarse,
            r,
            vertices,
            triangles,
            boundary,
            parent,
        })
    }

    pub fn coarse(&self) -> &CoarseMesh {
        &self.coarse
    }

    /// Fine squares per coarse square side.
    pub fn refinement(&self) -> usize {
        self.r
    }

    /// Fine squares per domain side.
    pub fn cells_per_side(&self) -> usize {
        self.coarse.m() * self.r
    }

    /// Fine square side length.
    pub fn h(&self) -> f64 {
        1.0 / self.cells_per_side() as f64
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Coarse square index (`row * M + col`) owning each triangle.
    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    /// Fine square `(i, j)` containing triangle `t`.
    pub fn cell_of_triangle(&self, t: usize) -> (usize, usize) {
        let n = self.cells_per_side();
        let s = t / 2;
        (s % n, s / n)
    }

    /// Triangle ids `[lower, upper]` of fine square `(i, j)`.
    pub fn cell_triangles(&self, i: usize, j: usize) -> [usize; 2] {
        let s = 2 * (j * self.cells_per_side() + i);
        [s, s + 1]
    }

    /// Whether `t` lies above the diagonal of its fine square.
    pub fn is_upper(&self, t: usize) -> bool {
        t % 2 == 1
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    /// Plain-text dump: one `x y` line per vertex, then one `i j k` line per triangle.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "{} {}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}
