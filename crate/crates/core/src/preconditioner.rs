//! One-level restricted additive Schwarz preconditioners with local impedance solves.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::coefficients::ProblemParameters;
use crate::decomposition::Decomposition;
use crate::fespace::{assemble_local, FeSpace};
use crate::linalg::{CsrMatrix, DenseMatrix, Ordering, SparseFactorization};
use crate::{Error, Result};

/// Default cap on the dof count for densified analysis.
pub const DEFAULT_ANALYSIS_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Weighted restriction on both sides.
    Soras,
    /// Chopping restriction before the local solve, weighted after.
    Oras,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Soras => "soras",
            Variant::Oras => "oras",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soras" => Ok(Variant::Soras),
            "oras" => Ok(Variant::Oras),
            _ => Err(Error::InvalidParameter(format!(
                "unknown preconditioner '{s}' (expected soras or oras)"
            ))),
        }
    }
}

/// Factorized local impedance problem of one subdomain.
#[derive(Debug)]
pub struct LocalProblem {
    pub id: usize,
    factor: SparseFactorization,
}

impl LocalProblem {
    pub fn factor(&self) -> &SparseFactorization {
        &self.factor
    }
}

#[derive(Debug)]
pub struct Preconditioner {
    decomposition: Decomposition,
    locals: Vec<LocalProblem>,
    variant: Variant,
}

/// Assembles the local impedance matrix of subdomain `l`.
pub fn local_matrix(
    dec: &Decomposition,
    l: usize,
    space: &FeSpace,
    params: &ProblemParameters,
    quadrature_degree: usize,
) -> Result<CsrMatrix> {
    let s = &dec.subdomains()[l];
    assemble_local(space, params, &s.triangles, &s.dofs, quadrature_degree)
}

impl Preconditioner {
    /// Assembles and factorizes every local problem.
    pub fn build(
        dec: Decomposition,
        space: &FeSpace,
        params: &ProblemParameters,
        variant: Variant,
        quadrature_degree: usize,
    ) -> Result<Self> {
        if dec.ndofs() != space.ndofs() {
            return Err(Error::DimensionMismatch {
                expected: space.ndofs(),
                got: dec.ndofs(),
            });
        }
        let stride = space.degree() as i64;
        let locals = (0..dec.len())
            .into_par_iter()
            .map(|l| {
                let a = local_matrix(&dec, l, space, params, quadrature_degree)?;
                let coords: Vec<[i64; 2]> = dec.subdomains()[l]
                    .dofs
                    .iter()
                    .map(|&g| space.lattice_coords(g))
                    .collect();
                let factor = SparseFactorization::new(
                    &a,
                    Ordering::Lattice {
                        coords: &coords,
                        stride,
                    },
                )
                .map_err(|e| match e {
                    Error::SingularMatrix { row } => Error::SingularSubdomain { subdomain: l, row },
                    other => other,
                })?;
                Ok(LocalProblem { id: l, factor })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            decomposition: dec,
            locals,
            variant,
        })
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    pub fn locals(&self) -> &[LocalProblem] {
        &self.locals
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn ndofs(&self) -> usize {
        self.decomposition.ndofs()
    }

    /// Total stored entries over all local factors.
    pub fn factor_entries(&self) -> usize {
        self.locals.iter().map(|l| l.factor.factor_entries()).sum()
    }

    /// `B^{-1} v`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.sum_local(v, false)
    }

    /// `B^{-*} v`.
    pub fn apply_adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.sum_local(v, true)
    }

    fn sum_local(&self, v: &[C64], adjoint: bool) -> Result<Vec<C64>> {
        let dec = &self.decomposition;
        if v.len() != dec.ndofs() {
            return Err(Error::DimensionMismatch {
                expected: dec.ndofs(),
                got: v.len(),
            });
        }
        // restriction applied before the local solve, and whether the
        // prolongation afterwards is weighted
        let (weighted_in, weighted_out) = match (self.variant, adjoint) {
            (Variant::Soras, _) => (true, true),
            (Variant::Oras, false) => (false, true),
            (Variant::Oras, true) => (true, false),
        };
        let local: Vec<Vec<C64>> = self
            .locals
            .par_iter()
            .map(|lp| {
                let s = &dec.subdomains()[lp.id];
                let mut w: Vec<C64> = if weighted_in {
                    s.dofs.iter().zip(&s.chi).map(|(&g, &c)| v[g] * c).collect()
                } else {
                    s.dofs.iter().map(|&g| v[g]).collect()
                };
                if adjoint {
                    for x in &mut w {
                        *x = x.conj();
                    }
                    lp.factor.solve_transpose_in_place(&mut w);
                    for x in &mut w {
                        *x = x.conj();
                    }
                } else {
                    lp.factor.solve_in_place(&mut w);
                }
                w
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); dec.ndofs()];
        for (lp, w) in self.locals.iter().zip(&local) {
            let s = &dec.subdomains()[lp.id];
            if weighted_out {
                for ((&g, &c), &x) in s.dofs.iter().zip(&s.chi).zip(w) {
                    out[g] += x * c;
                }
            } else {
                for (&g, &x) in s.dofs.iter().zip(w) {
                    out[g] += x;
                }
            }
        }
        Ok(out)
    }
}

/// Dense `B^{-1} A`, column by column.
pub fn densify_preconditioned(
    prec: &Preconditioner,
    a_eps: &CsrMatrix,
    cap: usize,
) -> Result<DenseMatrix> {
    let n = prec.ndofs();
    if n > cap {
        return Err(Error::SizeCap {
            what: "dofs for dense analysis",
            size: n,
            cap,
        });
    }
    if a_eps.nrows() != n || a_eps.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a_eps.nrows(),
        });
    }
    let mut out = DenseMatrix::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut ae = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        a_eps.spmv_into(&e, &mut ae);
        e[j] = C64::new(0.0, 0.0);
        for (i, x) in prec.apply(&ae)?.into_iter().enumerate() {
            out[(i, j)] = x;
        }
    }
    Ok(out)
}
