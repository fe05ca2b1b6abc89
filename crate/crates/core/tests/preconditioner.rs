mod common;

use common::*;
use helmholtz_dd::coefficients::{
    eta_default, CoefficientField, EtaMode, FieldKind, ProblemParameters, Profile, Shape,
};
use helmholtz_dd::decomposition::Decomposition;
use helmholtz_dd::fespace::{assemble, default_quadrature_degree, FeSpace};
use helmholtz_dd::linalg::CsrMatrix;
use helmholtz_dd::preconditioner::{densify_preconditioned, local_matrix, Preconditioner, Variant};
use helmholtz_dd::C64;

fn layered(k: f64, eps: f64) -> ProblemParameters {
    let field =
        |p, lo, hi| CoefficientField::new(FieldKind::Obstacle(Shape::Square, p), lo, hi).unwrap();
    ProblemParameters::new(
        k,
        eps,
        eta_default(k, eps, EtaMode::ExperimentK),
        field(Profile::Oscillating, 0.5, 3.0),
        field(Profile::LinearIncrease, 0.25, 2.0),
    )
    .unwrap()
}

struct Case {
    space: FeSpace,
    params: ProblemParameters,
    a: CsrMatrix,
    prec: Preconditioner,
}

fn case(
    m: usize,
    r: usize,
    p: usize,
    layers: Option<usize>,
    params: ProblemParameters,
    variant: Variant,
) -> Case {
    let space = space(m, r, p);
    let a = assemble(&space, &params).unwrap().a_eps;
    let dec = match layers {
        None => Decomposition::strategy1(&space).unwrap(),
        Some(l) => Decomposition::strategy2(&space, l).unwrap(),
    };
    let prec =
        Preconditioner::build(dec, &space, &params, variant, default_quadrature_degree(p)).unwrap();
    Case {
        space,
        params,
        a,
        prec,
    }
}

/// `Σ_l R̃_l^T A_l^{-1} R_l^{(v)}` with inverted local blocks and explicit restrictions.
fn brute_force_inverse(c: &Case) -> Vec<Vec<C64>> {
    let n = c.space.ndofs();
    let zero = C64::new(0.0, 0.0);
    let mut b = vec![vec![zero; n]; n];
    let dec = c.prec.decomposition();
    let degree = default_quadrature_degree(c.space.degree());
    for (l, s) in dec.subdomains().iter().enumerate() {
        let local = gauss_inverse(&dense_rows(
            &local_matrix(dec, l, &c.space, &c.params, degree).unwrap(),
        ));
        for (i, &gi) in s.dofs.iter().enumerate() {
            for (j, &gj) in s.dofs.iter().enumerate() {
                let right = match c.prec.variant() {
                    Variant::Soras => s.chi[j],
                    Variant::Oras => 1.0,
                };
                b[gi][gj] += local[i][j] * s.chi[i] * right;
            }
        }
    }
    b
}

#[test]
fn apply_matches_brute_force() {
    let configs = [
        (2, 2, 2, None, Variant::Soras),
        (2, 3, 1, Some(1), Variant::Oras),
        (3, 1, 2, None, Variant::Oras),
        (2, 2, 3, Some(1), Variant::Soras),
    ];
    let mut rng = rng(11);
    for (m, r, p, layers, variant) in configs {
        let c = case(m, r, p, layers, layered(7.0, 7f64.powf(1.5)), variant);
        assert!(c.space.ndofs() <= 200);
        let b = brute_force_inverse(&c);
        for _ in 0..3 {
            let v = random_vec(&mut rng, c.space.ndofs());
            let expected = matvec(&b, &v);
            let got = c.prec.apply(&v).unwrap();
            assert!(max_diff(&got, &expected) <= 1e-10 * max_norm(&expected));
        }
    }
}

#[test]
fn local_rows_away_from_interfaces_equal_global_rows() {
    let c = case(3, 2, 2, Some(1), layered(6.0, 0.0), Variant::Soras);
    let dec = c.prec.decomposition();
    let on_outer = |d: usize| {
        let [x, y] = c.space.node(d);
        [x, y]
            .iter()
            .any(|&t| t.abs() < 1e-12 || (t - 1.0).abs() < 1e-12)
    };
    for (l, s) in dec.subdomains().iter().enumerate() {
        let local = local_matrix(dec, l, &c.space, &c.params, 2).unwrap();
        let mut interface = Vec::new();
        for e in &s.boundary {
            let dofs = c.space.edge_dofs(e.triangle, e.local_edge);
            if !dofs.iter().all(|&d| on_outer(d)) {
                interface.extend(dofs);
            }
        }
        let mut checked = 0;
        for (i, &g) in s.dofs.iter().enumerate() {
            if interface.contains(&g) {
                continue;
            }
            for (j, &h) in s.dofs.iter().enumerate() {
                assert!((local.get(i, j) - c.a.get(g, h)).norm() < 1e-12);
            }
            let (cols, _) = c.a.row(g);
            assert!(cols.iter().all(|h| s.dofs.contains(h)));
            checked += 1;
        }
        assert!(checked > 0);
    }
}

#[test]
fn single_subdomain_inverts_the_operator() {
    for variant in [Variant::Soras, Variant::Oras] {
        let space = space(2, 3, 3);
        let params = layered(9.0, 0.0);
        let a = assemble(&space, &params).unwrap().a_eps;
        let dec = Decomposition::whole_domain(&space);
        let prec = Preconditioner::build(dec, &space, &params, variant, 4).unwrap();
        let x = densify_preconditioned(&prec, &a, 1000).unwrap();
        let n = space.ndofs();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((x[(i, j)] - id).norm());
            }
        }
        assert!(worst < 1e-9, "{variant}: {worst}");
    }
}

#[test]
fn symmetric_variant_is_complex_symmetric() {
    let mut rng = rng(5);
    for layers in [None, Some(1)] {
        let c = case(3, 2, 2, layers, layered(8.0, 20.0), Variant::Soras);
        for _ in 0..5 {
            let v = random_vec(&mut rng, c.space.ndofs());
            let w = random_vec(&mut rng, c.space.ndofs());
            let lhs = bilinear(&w, &c.prec.apply(&v).unwrap());
            let rhs = bilinear(&v, &c.prec.apply(&w).unwrap());
            assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
        }
    }
}

#[test]
fn adjoint_apply_is_the_adjoint() {
    let mut rng = rng(6);
    for variant in [Variant::Soras, Variant::Oras] {
        let c = case(2, 3, 2, Some(2), layered(8.0, 0.0), variant);
        for _ in 0..5 {
            let v = random_vec(&mut rng, c.space.ndofs());
            let w = random_vec(&mut rng, c.space.ndofs());
            // <B^{-1} v, w> = <v, B^{-*} w>
            let lhs = inner(&c.prec.apply(&v).unwrap(), &w);
            let rhs = inner(&v, &c.prec.apply_adjoint(&w).unwrap());
            assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
        }
    }
}

#[test]
fn densified_columns_match_apply() {
    let c = case(2, 2, 2, None, layered(5.0, 5.0), Variant::Oras);
    let x = densify_preconditioned(&c.prec, &c.a, 1000).unwrap();
    let n = c.space.ndofs();
    let mut e = vec![C64::new(0.0, 0.0); n];
    e[7] = C64::new(1.0, 0.0);
    let col = c.prec.apply(&c.a.spmv(&e).unwrap()).unwrap();
    assert!(max_diff(&col, &x.column(7)) < 1e-13);
    assert!(densify_preconditioned(&c.prec, &c.a, n - 1).is_err());
    assert!(c.prec.apply(&e[1..]).is_err());
}
