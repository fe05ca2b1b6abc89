use helmholtz_dd::coefficients::{
    eta_default, CoefficientField, EtaMode, FieldKind, Profile, Shape,
};
use helmholtz_dd::mesh::{refinement_factor, target_fine_width, CoarseMesh, FineMesh};
use proptest::prelude::*;

#[test]
fn eta_rules() {
    for mode in [EtaMode::ExperimentK, EtaMode::SignEpsK, EtaMode::SqrtBranch] {
        let e = eta_default(40.0, 0.0, mode);
        assert_eq!((e.re, e.im), (40.0, 0.0));
    }
    assert_eq!(eta_default(40.0, -100.0, EtaMode::SignEpsK).re, -40.0);
    let z = eta_default(10.0, 100.0, EtaMode::SqrtBranch);
    assert!(z.re > 0.0 && z.im > 0.0);
    let sq = z * z;
    assert!((sq.re - 100.0).abs() < 1e-12 && (sq.im - 100.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn eta_sign_conditions(k in 1.0f64..200.0, eps in -1.0f64..1.0, which in 0usize..2) {
        let eps = eps * k * k;
        prop_assume!(eps != 0.0);
        let mode = [EtaMode::SignEpsK, EtaMode::SqrtBranch][which];
        let e = eta_default(k, eps, mode);
        prop_assert!(e.im >= 0.0);
        prop_assert!(eps.signum() * e.re > 0.0);
    }

    #[test]
    fn swapping_bounds_mirrors_linear_profiles(
        lo in 0.01f64..1.0, hi in 1.0f64..100.0, x in 0.0f64..1.0, y in 0.0f64..1.0, square: bool,
    ) {
        let shape = if square { Shape::Square } else { Shape::Disk };
        let dec = CoefficientField::new(FieldKind::Obstacle(shape, Profile::LinearDecrease), lo, hi).unwrap();
        // linear_increase(lo, hi) = linear_decrease with lo and hi exchanged
        let inc = CoefficientField::new(FieldKind::Obstacle(shape, Profile::LinearIncrease), lo, hi).unwrap();
        let swapped = CoefficientField { cmin: hi, cmax: lo, ..dec };
        prop_assert!((swapped.eval([x, y]) - inc.eval([x, y])).abs() < 1e-12 * hi);
    }

    #[test]
    fn fields_stay_within_bounds(i in 0usize..7, lo in 0.01f64..1.0, hi in 1.0f64..100.0, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let f = CoefficientField::new(FieldKind::ALL[i], lo, hi).unwrap();
        let v = f.eval([x, y]);
        prop_assert!(v >= f.min_value() - 1e-12 && v <= f.max_value() + 1e-12);
        let rho = (x - 0.5).hypot(y - 0.5);
        let rho_inf = (x - 0.5).abs().max((y - 0.5).abs());
        if rho_inf >= 0.25 || (rho >= 0.25 && matches!(f.kind, FieldKind::Obstacle(Shape::Disk, _))) {
            prop_assert_eq!(v, 1.0);
        }
    }
}

#[test]
fn profile_values_along_a_ray() {
    let kind = |s, p| FieldKind::Obstacle(s, p);
    let dec = CoefficientField::new(kind(Shape::Disk, Profile::LinearDecrease), 0.5, 4.0).unwrap();
    assert_eq!(dec.eval([0.5, 0.5]), 4.0);
    assert!((dec.eval([0.625, 0.5]) - 2.25).abs() < 1e-12);
    assert_eq!(dec.eval([0.8, 0.5]), 1.0);
    // seven layers of width 1/28 alternate from the maximum at the centre
    let osc = CoefficientField::new(kind(Shape::Square, Profile::Oscillating), 0.25, 4.0).unwrap();
    for layer in 0..7 {
        let r = (layer as f64 + 0.5) / 28.0;
        let expected = if layer % 2 == 0 { 4.0 } else { 0.25 };
        assert_eq!(osc.eval([0.5 + r, 0.5 - 0.3 * r]), expected);
    }
    let names: Vec<_> = FieldKind::ALL
        .iter()
        .map(|k| k.name().parse::<FieldKind>().unwrap())
        .collect();
    assert_eq!(names, FieldKind::ALL.to_vec());
}

#[test]
fn coarse_counts_follow_floor_rule() {
    let ms: Vec<usize> = [40.0, 80.0, 120.0, 160.0]
        .iter()
        .map(|&k| CoarseMesh::from_wavenumber(k, 0.4).unwrap().m())
        .collect();
    assert_eq!(ms, vec![4, 5, 6, 7]);
    assert_eq!(CoarseMesh::from_wavenumber(2.0, 0.3).unwrap().m(), 2);
}

proptest! {
    #[test]
    fn refinement_is_smallest_admissible(k in 5.0f64..200.0, p in 1usize..5, alpha in 0.2f64..0.7) {
        let coarse = CoarseMesh::from_wavenumber(k, alpha).unwrap();
        let r = refinement_factor(&coarse, k, p);
        let target = target_fine_width(k, p) * (1.0 + 1e-9);
        let brute = (1..).find(|&r| coarse.h() / r as f64 <= target).unwrap();
        prop_assert_eq!(r, brute);
    }
}

#[test]
fn fine_mesh_geometry() {
    let mesh = FineMesh::with_factor(&CoarseMesh::fixed(3).unwrap(), 2).unwrap();
    assert_eq!(mesh.cells_per_side(), 6);
    assert_eq!(mesh.vertices().len(), 49);
    assert_eq!(mesh.triangles().len(), 72);
    let area: f64 = (0..72).map(|t| mesh.signed_area(t)).sum();
    assert!((area - 1.0).abs() < 1e-14);
    assert!((0..72).all(|t| mesh.signed_area(t) > 0.0));
    assert_eq!(mesh.boundary_edges().len(), 24);
    let length: f64 = mesh
        .boundary_edges()
        .iter()
        .map(|e| {
            let [a, b] = e.vertices.map(|v| mesh.vertices()[v]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .sum();
    assert!((length - 4.0).abs() < 1e-14);
}
