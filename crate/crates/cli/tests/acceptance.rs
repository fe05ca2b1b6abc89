//! Acceptance checks against the reference experiments.
//!
//! Prints one `PASS` or `FAIL` line per criterion, plus `INFO` lines with
//! the measurements behind it. The process exits 0 either way so the
//! report is always complete; read the lines, not the status.

use std::time::Instant;

use helmholtz_dd::analysis::fov_boundary;
use helmholtz_dd::coefficients::{
    eta_default, CoefficientField, EtaMode, FieldKind, ProblemParameters, Profile, Shape,
};
use helmholtz_dd::decomposition::Decomposition;
use helmholtz_dd::fespace::{assemble, default_quadrature_degree, FeSpace};
use helmholtz_dd::krylov::{gmres, InnerProduct, Side};
use helmholtz_dd::linalg::{dot, CsrMatrix, DenseMatrix};
use helmholtz_dd::mesh::{CoarseMesh, FineMesh};
use helmholtz_dd::preconditioner::{densify_preconditioned, local_matrix, Preconditioner, Variant};
use helmholtz_dd::C64;
use helmholtz_dd_cli::config::{CoarseRule, EpsRule, OverlapRule, ProfileConfig, RunConfig};
use helmholtz_dd_cli::run::{Bounds, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

struct Report {
    failed: usize,
}

impl Report {
    fn verdict(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!(
            "{} [{id}] {name}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

fn info(msg: String) {
    println!("INFO {msg}");
}

fn build(config: &RunConfig) -> Problem {
    Problem::build(config, usize::MAX).unwrap_or_else(|e| panic!("building {config:?}: {e}"))
}

fn table_config(k: f64, p: usize, eps: EpsRule) -> RunConfig {
    RunConfig {
        k,
        p,
        eps,
        ..RunConfig::default()
    }
}

fn extended_config(p: usize, eps: EpsRule) -> RunConfig {
    RunConfig {
        strategy: 2,
        coarse: CoarseRule::Pow(0.4),
        overlap: OverlapRule::HFrac(4.0),
        ..table_config(40.0, p, eps)
    }
}

fn in_range(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    max - min
}

/// Left-preconditioned count, with the right-preconditioned one reported.
fn iterations(problem: &mut Problem, label: &str) -> usize {
    let left = problem.solve(Side::Left).unwrap();
    let right = problem.solve(Side::Right).unwrap();
    info(format!(
        "{label}: ndofs {} left {}{} right {}{}",
        problem.ndofs(),
        left.iterations,
        if left.converged { "" } else { " (maxit)" },
        right.iterations,
        if right.converged { "" } else { " (maxit)" },
    ));
    left.iterations
}

struct Solved {
    k: f64,
    p: usize,
    iterations: usize,
    errors: Option<(f64, f64)>,
    bounds: Option<Bounds>,
    seconds: f64,
}

fn table_runs(eps: EpsRule, with_bounds: bool) -> Vec<Solved> {
    let mut out = Vec::new();
    for k in [40.0, 80.0] {
        for p in 1..=3 {
            let t = Instant::now();
            let mut problem = build(&table_config(k, p, eps));
            let left = problem.solve(Side::Left).unwrap();
            let seconds = t.elapsed().as_secs_f64();
            let right = problem.solve(Side::Right).unwrap();
            info(format!(
                "eps={eps} k={k} p={p}: ndofs {} left {} right {} ({seconds:.1} s)",
                problem.ndofs(),
                left.iterations,
                right.iterations
            ));
            let errors = if k == 40.0 {
                problem.errors(&left.solution).unwrap()
            } else {
                None
            };
            let bounds = if with_bounds && k == 40.0 {
                problem.analyse(true, None).unwrap().0
            } else {
                None
            };
            out.push(Solved {
                k,
                p,
                iterations: left.iterations,
                errors,
                bounds,
                seconds,
            });
        }
    }
    out
}

fn table_one(report: &mut Report, runs: &[Solved]) {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [40.0, 80.0] {
        let its: Vec<f64> = runs
            .iter()
            .filter(|r| r.k == k)
            .map(|r| r.iterations as f64)
            .collect();
        ok &= its.iter().all(|&n| in_range(n, 9.0, 15.0)) && spread(&its) <= 2.0;
        parts.push(format!("k={k} {its:?}"));
    }
    let seconds: f64 = runs.iter().map(|r| r.seconds).sum();
    ok &= seconds <= 900.0;
    report.verdict(
        1,
        "absorbing, iterations in [9,15], spread <= 2, <= 15 min",
        ok,
        format!(
            "{} (reference 12 everywhere), {seconds:.0} s",
            parts.join(", ")
        ),
    );
}

fn table_two(report: &mut Report, runs: &[Solved]) {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in 1..=3 {
        let at = |k: f64| {
            runs.iter()
                .find(|r| r.k == k && r.p == p)
                .unwrap()
                .iterations
        };
        let (a, b) = (at(40.0), at(80.0));
        ok &= in_range(a as f64, 10.0, 20.0) && in_range(b as f64, 10.0, 20.0) && b <= a + 5;
        parts.push(format!("p={p}: {a} -> {b}"));
    }
    report.verdict(
        2,
        "no absorption, iterations in [10,20], growth <= 5",
        ok,
        format!("{} (reference 12-14)", parts.join(", ")),
    );
}

fn table_three(report: &mut Report, runs: &[Solved]) {
    let errs: Vec<(f64, f64)> = (1..=3)
        .map(|p| {
            runs.iter()
                .find(|r| r.k == 40.0 && r.p == p)
                .unwrap()
                .errors
                .unwrap()
        })
        .collect();
    let within = |got: f64, reference: f64| got <= 3.0 * reference && got >= reference / 3.0;
    let ok = within(errs[0].0, 5.73e-2)
        && within(errs[0].1, 9.09e-2)
        && within(errs[2].0, 6.76e-5)
        && within(errs[2].1, 6.49e-4)
        && errs.windows(2).all(|w| w[1].0 <= w[0].0 / 10.0);
    let shown: Vec<String> = errs
        .iter()
        .map(|(a, b)| format!("({a:.2e}, {b:.2e})"))
        .collect();
    report.verdict(
        3,
        "k=40 errors within 3x, e0 drops 10x per degree",
        ok,
        format!(
            "p=1..3 {} (reference (5.73e-2, 9.09e-2), (1.33e-3, 1.04e-2), (6.76e-5, 6.49e-4))",
            shown.join(" ")
        ),
    );
}

fn table_four(report: &mut Report, runs: &[Solved]) {
    let bounds: Vec<&Bounds> = runs.iter().filter_map(|r| r.bounds.as_ref()).collect();
    let lower: Vec<f64> = bounds.iter().map(|b| b.fov_lower_bound).collect();
    let norm: Vec<f64> = bounds.iter().map(|b| b.dk_norm).collect();
    let ok = bounds.len() == 3
        && bounds.iter().all(|b| b.converged)
        && lower.iter().all(|&x| in_range(x, 0.10, 0.30))
        && norm.iter().all(|&x| in_range(x, 1.00, 1.10))
        && spread(&lower) <= 0.02
        && spread(&norm) <= 0.02;
    let shown: Vec<String> = lower
        .iter()
        .zip(&norm)
        .map(|(a, b)| format!("({a:.3}, {b:.3})"))
        .collect();
    report.verdict(
        4,
        "k=40 lower bound in [0.10,0.30], energy norm in [1.00,1.10], p-spread <= 0.02",
        ok,
        format!(
            "p=1..3 {} (reference (0.175, 1.030) (0.176, 1.029) (0.176, 1.028))",
            shown.join(" ")
        ),
    );
}

fn field_of_values(report: &mut Report) -> (usize, Bounds) {
    let mut without = build(&extended_config(3, EpsRule::Zero));
    let closed = without.analyse(true, None).unwrap().0.unwrap();
    drop(without);
    let mut with = build(&extended_config(3, EpsRule::Pow(1.5)));
    let open = with.analyse(true, None).unwrap().0.unwrap();
    let its = iterations(&mut with, "extended squares eps=k^1.5 p=3");
    report.verdict(
        5,
        "extended squares k=40 p=3: origin inside without absorption, outside with it",
        closed.fov_lower_bound_raw < 0.0 && open.fov_lower_bound_raw > 0.05,
        format!(
            "raw lambda_min {:.4} (eps=0), {:.4} (eps=k^1.5)",
            closed.fov_lower_bound_raw, open.fov_lower_bound_raw
        ),
    );
    (its, open)
}

fn heterogeneity(report: &mut Report) {
    let field = ProfileConfig::new(
        FieldKind::Obstacle(Shape::Disk, Profile::Oscillating),
        0.02,
        50.0,
    );
    let run = |vary_a: bool| {
        let mut c = extended_config(3, EpsRule::Pow(1.5));
        if vary_a {
            c.a = field;
        } else {
            c.n = field;
        }
        iterations(
            &mut build(&c),
            if vary_a { "A varying" } else { "n varying" },
        )
    };
    let n_its = run(false);
    let a_its = run(true);
    report.verdict(
        6,
        "n varying in [9,16], A varying in [30,65]",
        in_range(n_its as f64, 9.0, 16.0) && in_range(a_its as f64, 30.0, 65.0),
        format!("n: {n_its} (reference 13), A: {a_its} (reference 47)"),
    );
}

fn elman(report: &mut Report, pairs: &[(String, usize, &Bounds)]) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, its, b) in pairs {
        if b.fov_lower_bound > 0.0 {
            let predicted = b.elman_iterations.unwrap();
            ok &= *its <= predicted;
            parts.push(format!("{label}: {its} <= {predicted}"));
        }
    }
    report.verdict(
        8,
        "observed iterations within the Elman prediction",
        ok && !parts.is_empty(),
        parts.join(", "),
    );
}

// ---- property suite ---------------------------------------------------------

struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        self.0.gen()
    }

    fn below(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }

    fn vector(&mut self, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(self.0.gen_range(-1.0..1.0), self.0.gen_range(-1.0..1.0)))
            .collect()
    }
}

fn space(m: usize, r: usize, p: usize) -> FeSpace {
    FeSpace::new(
        FineMesh::with_factor(&CoarseMesh::fixed(m).unwrap(), r).unwrap(),
        p,
    )
    .unwrap()
}

fn heterogeneous(k: f64, eps: f64) -> ProblemParameters {
    let field =
        |p, lo, hi| CoefficientField::new(FieldKind::Obstacle(Shape::Disk, p), lo, hi).unwrap();
    ProblemParameters::new(
        k,
        eps,
        eta_default(k, eps, EtaMode::ExperimentK),
        field(Profile::Oscillating, 0.5, 2.0),
        field(Profile::LinearDecrease, 0.25, 4.0),
    )
    .unwrap()
}

fn dense(a: &CsrMatrix) -> Vec<Vec<C64>> {
    let mut out = vec![vec![ZERO; a.ncols()]; a.nrows()];
    for (i, row) in out.iter_mut().enumerate() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            row[j] += v;
        }
    }
    out
}

/// Gaussian elimination with partial pivoting; the columns of `b` are solved for.
fn eliminate(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = a.len();
    let mut m: Vec<Vec<C64>> = a
        .iter()
        .zip(b)
        .map(|(r, s)| r.iter().chain(s).copied().collect())
        .collect();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| m[i][c].norm().total_cmp(&m[j][c].norm()))
            .unwrap();
        m.swap(c, piv);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            let (top, rest) = m.split_at_mut(i);
            for (x, y) in rest[0][c..].iter_mut().zip(&top[c][c..]) {
                *x -= f * y;
            }
        }
    }
    let width = b[0].len();
    let mut x = vec![vec![ZERO; width]; n];
    for i in (0..n).rev() {
        for col in 0..width {
            let mut acc = m[i][n + col];
            for j in i + 1..n {
                acc -= m[i][j] * x[j][col];
            }
            x[i][col] = acc / m[i][i];
        }
    }
    x
}

fn matvec(a: &[Vec<C64>], x: &[C64]) -> Vec<C64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn max_diff(x: &[C64], y: &[C64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

fn norm2(x: &[C64]) -> f64 {
    dot(x, x).re.sqrt()
}

fn partition_of_unity(s: &mut Stream) -> f64 {
    let mut worst = 0.0f64;
    for config in 0..10 {
        let (m, r, p) = (2 + s.below(3), 2 + s.below(3), 1 + s.below(3));
        let sp = space(m, r, p);
        for dec in [
            Decomposition::strategy1(&sp).unwrap(),
            Decomposition::strategy2(&sp, 1 + config % (r - 1)).unwrap(),
        ] {
            worst = dec
                .weight_sum()
                .iter()
                .fold(worst, |w, x| w.max((x - 1.0).abs()));
        }
    }
    worst
}

fn symmetry_and_coercivity(s: &mut Stream) -> (f64, f64) {
    let (mut asym, mut ratio) = (0.0f64, f64::INFINITY);
    for p in 1..=3 {
        let k = 4.0 + 8.0 * s.unit();
        for eps in [k, k.powf(1.5), k * k] {
            let prm = heterogeneous(k, eps);
            let sp = space(2, 2, p);
            let sys = assemble(&sp, &prm).unwrap();
            asym = asym.max(sys.a_eps.max_asymmetry() / sys.a_eps.max_abs());
            let c = 0.25 * prm.a.min_value().min(prm.n.min_value()) * eps / (k * k);
            for _ in 0..100 {
                let v = s.vector(sp.ndofs());
                let lhs = dot(&sys.a_eps.spmv(&v).unwrap(), &v).norm();
                let energy = dot(&sys.d_k.spmv(&v).unwrap(), &v).re;
                ratio = ratio.min(lhs / (c * energy));
            }
        }
    }
    (asym, ratio)
}

fn single_subdomain() -> f64 {
    let sp = space(2, 3, 3);
    let prm = heterogeneous(9.0, 0.0);
    let a = assemble(&sp, &prm).unwrap().a_eps;
    let prec = Preconditioner::build(
        Decomposition::whole_domain(&sp),
        &sp,
        &prm,
        Variant::Soras,
        4,
    )
    .unwrap();
    let x = densify_preconditioned(&prec, &a, 1000).unwrap();
    x.max_abs_diff(&DenseMatrix::identity(sp.ndofs()))
}

fn brute_force_apply(s: &mut Stream) -> f64 {
    let mut worst = 0.0f64;
    for (m, r, p, second, variant) in [
        (2, 2, 2, false, Variant::Soras),
        (2, 3, 1, true, Variant::Oras),
        (2, 2, 3, true, Variant::Soras),
        (3, 1, 2, false, Variant::Oras),
    ] {
        let sp = space(m, r, p);
        let n = sp.ndofs();
        assert!(n <= 200);
        let prm = heterogeneous(7.0, 7f64.powf(1.5));
        let q = default_quadrature_degree(p);
        let dec = if second {
            Decomposition::strategy2(&sp, 1).unwrap()
        } else {
            Decomposition::strategy1(&sp).unwrap()
        };
        let mut b = vec![vec![ZERO; n]; n];
        for (l, sub) in dec.subdomains().iter().enumerate() {
            let local = dense(&local_matrix(&dec, l, &sp, &prm, q).unwrap());
            let ident: Vec<Vec<C64>> = (0..sub.len())
                .map(|i| {
                    (0..sub.len())
                        .map(|j| C64::new(f64::from(u8::from(i == j)), 0.0))
                        .collect()
                })
                .collect();
            let inv = eliminate(&local, &ident);
            for (i, &gi) in sub.dofs.iter().enumerate() {
                for (j, &gj) in sub.dofs.iter().enumerate() {
                    let right = if variant == Variant::Soras {
                        sub.chi[j]
                    } else {
                        1.0
                    };
                    b[gi][gj] += inv[i][j] * sub.chi[i] * right;
                }
            }
        }
        let prec = Preconditioner::build(dec, &sp, &prm, variant, q).unwrap();
        for _ in 0..3 {
            let v = s.vector(n);
            let expected = matvec(&b, &v);
            let scale = expected.iter().map(|z| z.norm()).fold(0.0, f64::max);
            worst = worst.max(max_diff(&prec.apply(&v).unwrap(), &expected) / scale);
        }
    }
    worst
}

fn finite_termination(s: &mut Stream) -> (usize, f64) {
    let (mut most, mut worst) = (0, 0.0f64);
    for _ in 0..20 {
        let a: Vec<Vec<C64>> = (0..12).map(|_| s.vector(12)).collect();
        let b = s.vector(12);
        let res = gmres(
            |v| Ok(matvec(&a, v)),
            &b,
            &[ZERO; 12],
            InnerProduct::Euclidean,
            1e-12,
            50,
        )
        .unwrap();
        let exact: Vec<C64> = eliminate(&a, &b.iter().map(|&x| vec![x]).collect::<Vec<_>>())
            .into_iter()
            .map(|r| r[0])
            .collect();
        most = most.max(if res.converged {
            res.iterations
        } else {
            usize::MAX
        });
        let scale = exact.iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(max_diff(&res.solution, &exact) / scale);
    }
    (most, worst)
}

fn residual_domination(s: &mut Stream) -> f64 {
    let n = 16;
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, C64::new(3.0 + (i % 5) as f64, 0.0)));
        if i + 1 < n {
            t.push((i, i + 1, C64::new(-1.0, 0.0)));
            t.push((i + 1, i, C64::new(-1.0, 0.0)));
        }
    }
    let d = CsrMatrix::from_triplets(n, n, &t);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..5 {
        let mut a: Vec<Vec<C64>> = (0..n).map(|_| s.vector(n)).collect();
        for (i, row) in a.iter_mut().enumerate() {
            row.iter_mut().for_each(|x| *x *= 0.3);
            row[i] += C64::new(2.0, 0.0);
        }
        let b = s.vector(n);
        let x0 = s.vector(n);
        let residual = |x: &[C64]| {
            norm2(
                &matvec(&a, x)
                    .iter()
                    .zip(&b)
                    .map(|(y, b)| b - y)
                    .collect::<Vec<_>>(),
            )
        };
        let r0 = residual(&x0);
        for steps in 1..=n {
            let e = gmres(
                |v| Ok(matvec(&a, v)),
                &b,
                &x0,
                InnerProduct::Euclidean,
                1e-15,
                steps,
            )
            .unwrap();
            let w = gmres(
                |v| Ok(matvec(&a, v)),
                &b,
                &x0,
                InnerProduct::Weighted(&d),
                1e-15,
                steps,
            )
            .unwrap();
            worst = worst.max((residual(&e.solution) - residual(&w.solution)) / r0);
        }
    }
    worst
}

/// Largest excursion of sampled Rayleigh quotients beyond the supporting
/// lines, and beyond the polygon through finely sampled boundary points.
fn fov_containment(s: &mut Stream) -> (f64, f64) {
    let x = DenseMatrix::from_fn(6, 6, |_, _| {
        C64::new(2.0 * s.unit() - 1.0, 2.0 * s.unit() - 1.0)
    });
    let coarse = fov_boundary(&x, 256).unwrap();
    let fine = fov_boundary(&x, 4096).unwrap();
    let pts = &fine.points;
    let cross = |a: C64, b: C64| a.re * b.im - a.im * b.re;
    let area: f64 = (0..pts.len())
        .map(|i| cross(pts[i], pts[(i + 1) % pts.len()]))
        .sum();
    let outside = |z: C64| {
        let mut d = 0.0f64;
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            let len = (b - a).norm();
            if len > 0.0 {
                d = d.max(-area.signum() * cross(b - a, z - a) / len);
            }
        }
        d
    };
    let (mut lines, mut polygon) = (0.0f64, 0.0f64);
    for _ in 0..100_000 {
        let v = s.vector(6);
        let z = dot(&x.matvec(&v).unwrap(), &v) / dot(&v, &v);
        for (t, h) in coarse.thetas.iter().zip(&coarse.support) {
            lines = lines.max((C64::from_polar(1.0, *t) * z).re - h);
        }
        polygon = polygon.max(outside(z));
    }
    (lines, polygon)
}

fn property_suite(report: &mut Report) {
    let t = Instant::now();
    let mut s = Stream::new(2024);
    let pou = partition_of_unity(&mut s);
    let (asym, coercive) = symmetry_and_coercivity(&mut s);
    let identity = single_subdomain();
    let brute = brute_force_apply(&mut s);
    let (steps, direct) = finite_termination(&mut s);
    let dominated = residual_domination(&mut s);
    let (lines, polygon) = fov_containment(&mut s);
    let seconds = t.elapsed().as_secs_f64();
    let checks = [
        (pou <= 1e-12, format!("partition of unity {pou:.1e}")),
        (asym <= 1e-12, format!("asymmetry {asym:.1e}")),
        (coercive >= 1.0, format!("coercivity ratio {coercive:.3}")),
        (identity <= 1e-9, format!("single subdomain {identity:.1e}")),
        (brute <= 1e-10, format!("brute-force apply {brute:.1e}")),
        (
            steps <= 12 && direct <= 1e-8,
            format!("12x12 GMRES {steps} steps, {direct:.1e} off direct"),
        ),
        (
            dominated <= 1e-10,
            format!("residual domination {dominated:.1e}"),
        ),
        (
            lines <= 1e-6 && polygon <= 1e-6,
            format!("FoV containment {lines:.1e} / {polygon:.1e}"),
        ),
        (seconds <= 300.0, format!("{seconds:.0} s")),
    ];
    let ok = checks.iter().all(|c| c.0);
    let detail: Vec<String> = checks.into_iter().map(|c| c.1).collect();
    report.verdict(7, "property suite", ok, detail.join(", "));
}

fn main() {
    let mut report = Report { failed: 0 };
    let start = Instant::now();

    let absorbing = table_runs(EpsRule::Pow(1.5), true);
    table_one(&mut report, &absorbing);
    let plain = table_runs(EpsRule::Zero, false);
    table_two(&mut report, &plain);
    table_three(&mut report, &plain);
    table_four(&mut report, &absorbing);
    let (extended_its, extended_bounds) = field_of_values(&mut report);
    heterogeneity(&mut report);
    property_suite(&mut report);

    let mut pairs: Vec<(String, usize, &Bounds)> = absorbing
        .iter()
        .filter_map(|r| {
            r.bounds
                .as_ref()
                .map(|b| (format!("vertex patches p={}", r.p), r.iterations, b))
        })
        .collect();
    pairs.push((
        "extended squares p=3".into(),
        extended_its,
        &extended_bounds,
    ));
    elman(&mut report, &pairs);

    info(format!(
        "{} of 8 criteria failed, {:.0} s total; exit status is 0 regardless",
        report.failed,
        start.elapsed().as_secs_f64()
    ));
}
