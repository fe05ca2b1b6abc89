//! The single-run pipeline: mesh, space, assembly, decomposition,
//! preconditioner, GMRES, then optional diagnostics.

use std::time::Instant;

use helmholtz_dd::analysis::{
    dk_norm_lanczos, elman_iterations, fov_boundary, fov_boundary_lanczos, fov_lower_bound,
    fov_lower_bound_lanczos, spectral_norm, weighted_transform, EnergyProduct, FovBoundary,
    LanczosOptions, PreconditionedOperator,
};
use helmholtz_dd::coefficients::{eta_default, ProblemParameters};
use helmholtz_dd::decomposition::{layers_for_overlap, Decomposition};
use helmholtz_dd::fespace::{
    assemble_with_degree, default_quadrature_degree, errors_vs_planewave, AssembledSystem, FeSpace,
};
use helmholtz_dd::krylov::{
    preconditioned_gmres, random_initial_guess, GmresResult, InnerProduct, Side,
};
use helmholtz_dd::linalg::CsrMatrix;
use helmholtz_dd::mesh::{refinement_factor, CoarseMesh, FineMesh};
use helmholtz_dd::preconditioner::Preconditioner;
use helmholtz_dd::C64;
use serde::{Deserialize, Serialize};

use crate::config::{CoarseRule, InnerProductKind, RunConfig};
use crate::RunError;

/// Largest system the runner builds unless `HELMHOLTZ_DD_MAX_DOFS` says
/// otherwise. The k = 80, p = 1 systems (515k dofs) are the largest that
/// fit in 5 GB.
pub const DEFAULT_MAX_DOFS: usize = 600_000;

/// Diagnostics switch from dense eigensolvers to Lanczos above this size.
pub const DENSE_ANALYSIS_DOFS: usize = 4_000;

pub const MAX_DOFS_ENV: &str = "HELMHOLTZ_DD_MAX_DOFS";

/// The dof cap in effect.
pub fn max_dofs() -> usize {
    std::env::var(MAX_DOFS_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_DOFS)
}

/// Quantities the config's rules resolve to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub eps: f64,
    pub eta: [f64; 2],
    pub coarse_squares: usize,
    pub coarse_h: f64,
    pub refinement: usize,
    pub fine_h: f64,
    /// Overlap width of Strategy 2.
    pub delta: Option<f64>,
    pub overlap_layers: Option<usize>,
    pub quad_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    /// `dense` or `lanczos`.
    pub method: String,
    /// `max(lambda_min, 0)` of the energy-weighted Hermitian part.
    pub fov_lower_bound: f64,
    pub fov_lower_bound_raw: f64,
    pub dk_norm: f64,
    pub elman_iterations: Option<usize>,
    pub converged: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub assembly: f64,
    pub factorization: f64,
    pub solve: f64,
    pub analysis: f64,
}

/// Self-describing result of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub derived: Derived,
    pub ndofs: usize,
    pub subdomains: usize,
    pub iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    pub e0: Option<f64>,
    pub e1: Option<f64>,
    pub bounds: Option<Bounds>,
    pub fov_csv: Option<String>,
    pub timings: Timings,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serialises")
    }
}

/// A record together with the FoV boundary, when requested.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub fov: Option<FovBoundary>,
}

fn failed(phase: &'static str) -> impl FnOnce(helmholtz_dd::Error) -> RunError {
    move |e| match e {
        helmholtz_dd::Error::InvalidParameter(msg) => RunError::Config(format!("{phase}: {msg}")),
        source => RunError::Failed { phase, source },
    }
}

fn seconds(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Assembled and preconditioned system, ready for solves and diagnostics.
pub struct Problem {
    pub config: RunConfig,
    pub derived: Derived,
    pub timings: Timings,
    space: FeSpace,
    params: ProblemParameters,
    a_eps: CsrMatrix,
    d_k: CsrMatrix,
    f: Vec<C64>,
    prec: Preconditioner,
}

impl Problem {
    /// Builds everything up to the factorized preconditioner, refusing
    /// systems above `max_dofs` before allocating them.
    pub fn build(config: &RunConfig, max_dofs: usize) -> Result<Self, RunError> {
        config.validate()?;
        let k = config.k;
        let p = config.p;
        let eps = config.eps.eval(k);
        let eta = eta_default(k, eps, config.eta);
        let params = ProblemParameters::new(k, eps, eta, config.a.field()?, config.n.field()?)
            .map_err(failed("parameters"))?;

        let t = Instant::now();
        let coarse = match config.coarse {
            CoarseRule::Pow(alpha) => CoarseMesh::from_wavenumber(k, alpha),
            CoarseRule::Fixed(m) => CoarseMesh::fixed(m),
        }
        .map_err(failed("mesh"))?;
        let r = refinement_factor(&coarse, k, p);
        let side = coarse.m() * r * p + 1;
        let ndofs = side * side;
        if ndofs > max_dofs {
            return Err(RunError::SizeCap {
                ndofs,
                cap: max_dofs,
            });
        }
        let mesh = FineMesh::with_factor(&coarse, r).map_err(failed("mesh"))?;
        let space = FeSpace::new(mesh, p).map_err(failed("space"))?;
        let quad_degree = config
            .quad_degree
            .unwrap_or_else(|| default_quadrature_degree(p));
        let AssembledSystem { a_eps, d_k, f, .. } =
            assemble_with_degree(&space, &params, quad_degree).map_err(failed("assembly"))?;
        let assembly = seconds(t);

        let t = Instant::now();
        let fine_h = space.mesh().h();
        let (dec, delta, layers) = if coarse.m() == 1 {
            (Decomposition::whole_domain(&space), None, None)
        } else if config.strategy == 1 {
            (
                Decomposition::strategy1(&space).map_err(failed("decomposition"))?,
                None,
                None,
            )
        } else {
            let delta = config.overlap.eval(k, coarse.h(), fine_h);
            let layers = layers_for_overlap(delta, fine_h);
            let dec = Decomposition::strategy2(&space, layers).map_err(failed("decomposition"))?;
            (dec, Some(delta), Some(layers))
        };
        let prec = Preconditioner::build(dec, &space, &params, config.precond, quad_degree)
            .map_err(failed("factorization"))?;
        let factorization = seconds(t);

        let derived = Derived {
            eps,
            eta: [eta.re, eta.im],
            coarse_squares: coarse.m(),
            coarse_h: coarse.h(),
            refinement: r,
            fine_h,
            delta,
            overlap_layers: layers,
            quad_degree,
        };
        Ok(Self {
            config: config.clone(),
            derived,
            timings: Timings {
                assembly,
                factorization,
                ..Timings::default()
            },
            space,
            params,
            a_eps,
            d_k,
            f,
            prec,
        })
    }

    pub fn ndofs(&self) -> usize {
        self.space.ndofs()
    }

    pub fn subdomains(&self) -> usize {
        self.prec.decomposition().len()
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn preconditioner(&self) -> &Preconditioner {
        &self.prec
    }

    pub fn a_eps(&self) -> &CsrMatrix {
        &self.a_eps
    }

    pub fn d_k(&self) -> &CsrMatrix {
        &self.d_k
    }

    /// GMRES from the seeded random initial guess.
    pub fn solve(&mut self, side: Side) -> Result<GmresResult, RunError> {
        let t = Instant::now();
        let ip = match self.config.ip {
            InnerProductKind::Euclidean => InnerProduct::Euclidean,
            InnerProductKind::Weighted => InnerProduct::Weighted(&self.d_k),
        };
        let x0 = random_initial_guess(self.ndofs(), self.config.seed);
        let a = &self.a_eps;
        let prec = &self.prec;
        let res = preconditioned_gmres(
            |v| a.spmv(v),
            |v| prec.apply(v),
            &self.f,
            &x0,
            side,
            ip,
            self.config.tol,
            self.config.maxit,
        )
        .map_err(failed("solve"))?;
        self.timings.solve += seconds(t);
        Ok(res)
    }

    /// `(e0, e1)` against the plane wave, for unit coefficients only.
    pub fn errors(&self, u_h: &[C64]) -> Result<Option<(f64, f64)>, RunError> {
        if !self.params.is_homogeneous() {
            return Ok(None);
        }
        errors_vs_planewave(&self.space, &self.params, u_h)
            .map(Some)
            .map_err(failed("errors"))
    }

    /// Norm and FoV bounds of `B^{-1} A` in the energy inner product, and
    /// the FoV boundary with `angles` samples when asked for.
    pub fn analyse(
        &mut self,
        bounds: bool,
        fov_angles: Option<usize>,
    ) -> Result<(Option<Bounds>, Option<FovBoundary>), RunError> {
        if !bounds && fov_angles.is_none() {
            return Ok((None, None));
        }
        let t = Instant::now();
        let tol = self.config.tol;
        let out = if self.ndofs() <= DENSE_ANALYSIS_DOFS {
            let xw = weighted_transform(&self.prec, &self.a_eps, &self.d_k, DENSE_ANALYSIS_DOFS)
                .map_err(failed("analysis"))?;
            let b = if bounds {
                let lower = fov_lower_bound(&xw).map_err(failed("analysis"))?;
                let norm = spectral_norm(&xw).map_err(failed("analysis"))?;
                Some(Bounds {
                    method: "dense".into(),
                    fov_lower_bound: lower.certified,
                    fov_lower_bound_raw: lower.raw,
                    dk_norm: norm,
                    elman_iterations: elman_iterations(lower.certified, norm, tol),
                    converged: true,
                })
            } else {
                None
            };
            let fov = fov_angles
                .map(|n| fov_boundary(&xw, n))
                .transpose()
                .map_err(failed("analysis"))?;
            (b, fov)
        } else {
            let op = PreconditionedOperator {
                prec: &self.prec,
                a: &self.a_eps,
            };
            let ip = EnergyProduct::new(&self.d_k).map_err(failed("analysis"))?;
            let opts = LanczosOptions::default();
            let b = if bounds {
                let norm = dk_norm_lanczos(&op, &ip, opts).map_err(failed("analysis"))?;
                let (lower, pair) =
                    fov_lower_bound_lanczos(&op, &ip, opts).map_err(failed("analysis"))?;
                Some(Bounds {
                    method: "lanczos".into(),
                    fov_lower_bound: lower.certified,
                    fov_lower_bound_raw: lower.raw,
                    dk_norm: norm.value,
                    elman_iterations: elman_iterations(lower.certified, norm.value, tol),
                    converged: norm.converged && pair.converged,
                })
            } else {
                None
            };
            let fov = fov_angles
                .map(|n| fov_boundary_lanczos(&op, &ip, n, opts))
                .transpose()
                .map_err(failed("analysis"))?;
            (b, fov)
        };
        self.timings.analysis += seconds(t);
        Ok(out)
    }
}

/// Runs one configuration end to end.
pub fn run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    run_capped(config, max_dofs())
}

pub fn run_capped(config: &RunConfig, max_dofs: usize) -> Result<RunOutcome, RunError> {
    let mut problem = Problem::build(config, max_dofs)?;
    let res = problem.solve(config.side)?;
    let errors = problem.errors(&res.solution)?;
    let (bounds, fov) = problem.analyse(config.bounds, config.fov.then_some(config.angles))?;
    let record = RunRecord {
        config: config.clone(),
        derived: problem.derived.clone(),
        ndofs: problem.ndofs(),
        subdomains: problem.subdomains(),
        iterations: res.iterations,
        converged: res.converged,
        residual_history: res.residual_history,
        e0: errors.map(|e| e.0),
        e1: errors.map(|e| e.1),
        bounds,
        fov_csv: None,
        timings: problem.timings.clone(),
    };
    Ok(RunOutcome { record, fov })
}
