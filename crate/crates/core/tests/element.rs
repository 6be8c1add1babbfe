mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use sbfem_seepage::geometry::Point2;
use sbfem_seepage::model::Material;
use sbfem_seepage::sbfem::{element_coefficients, Conductivity, SElementOperator, ScaledBoundaryGeometry};

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn pentagon() -> Vec<Point2> {
    vec![
        Point2::new(0.0, 0.0),
        Point2::new(2.0, 0.1),
        Point2::new(2.5, 1.5),
        Point2::new(0.7, 2.0),
        Point2::new(-0.4, 1.0),
    ]
}

#[test]
fn gauss_rule_integrates_polynomials() {
    let rule = gauss_legendre(64);
    let w: f64 = rule.iter().map(|r| r.1).sum();
    assert!((w - 2.0).abs() < 1e-13);
    let x6: f64 = rule.iter().map(|(x, w)| w * x.powi(6)).sum();
    assert!((x6 - 2.0 / 7.0).abs() < 1e-13);
}

#[test]
fn stiffness_and_mass_match_condensed_fem() {
    let cases = [
        (pentagon(), Material::new(2.0, 0.5, 0.3)),
        (
            vec![Point2::new(0.0, 0.0), Point2::new(3.0, 0.0), Point2::new(0.5, 1.0)],
            Material::new(1.0, 1.0, 1.0),
        ),
        (
            // quadtree cell with a hanging node on its top edge
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.5, 1.0),
                Point2::new(0.0, 1.0),
            ],
            Material::new(10.0, 0.1, 0.05),
        ),
    ];
    for (pts, mat) in cases {
        let op = SElementOperator::form(&pts, &mat).unwrap();
        let (k, m) = fem_condensed_extrapolated(&pts, mat.kx, mat.ky, mat.ss, 100);
        assert!(rel(&op.stiffness, &k) < 1e-7, "K: {:e}", rel(&op.stiffness, &k));
        assert!(rel(&op.mass, &m) < 1e-7, "M: {:e}", rel(&op.mass, &m));
    }
}

#[test]
fn scalar_reference_element() {
    // n = 1 Hamiltonian [[0, -1], [-1, 0]]: exponent 1, K = 1, M = M0 / 4.
    use sbfem_seepage::sbfem::{build_hamiltonian, mass_matrix, modal_decomposition, steady_stiffness, CoefficientMatrices};
    let c = CoefficientMatrices {
        e0: DMatrix::from_element(1, 1, 1.0),
        e1: DMatrix::zeros(1, 1),
        e2: DMatrix::from_element(1, 1, 1.0),
        m0: DMatrix::from_element(1, 1, 4.0),
    };
    let modal = modal_decomposition(&build_hamiltonian(&c).unwrap()).unwrap();
    let k = steady_stiffness(&modal).unwrap();
    let (m, _) = mass_matrix(&modal, &c, &k).unwrap();
    assert!((k[(0, 0)] - 1.0).abs() < 1e-14);
    assert!((m[(0, 0)] - 1.0).abs() < 1e-14);
}

#[test]
fn square_has_exponent_one_twice() {
    let pts = [
        Point2::new(-1.0, -1.0),
        Point2::new(1.0, -1.0),
        Point2::new(1.0, 1.0),
        Point2::new(-1.0, 1.0),
    ];
    let op = SElementOperator::form(&pts, &Material::isotropic(1.0, 0.0)).unwrap();
    let mut mu: Vec<f64> = op.modal.exponents.iter().map(|m| m.re).collect();
    mu.sort_by(f64::total_cmp);
    assert_eq!(mu[0], 0.0);
    assert!((mu[1] - 1.0).abs() < 1e-10 && (mu[2] - 1.0).abs() < 1e-10);
    assert!(mu[3] > 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn element_invariants_hold(e in star_convex_element()) {
        let op = SElementOperator::form(&e.points, &e.material()).unwrap();
        let inv = element_invariants(&op, &e);
        prop_assert!(inv.failures().is_empty(), "{:?}", inv.failures());
    }

    #[test]
    fn coefficients_match_high_order_quadrature(e in star_convex_element()) {
        let g = ScaledBoundaryGeometry::from_polygon(&e.points).unwrap();
        let c = element_coefficients(&g, Conductivity::diagonal(e.kx, e.ky), e.ss);
        let o = oracle_coefficients(&e.points, e.kx, e.ky, e.ss, 64);
        prop_assert!(rel(&c.e0, &o.e0) < 1e-10);
        prop_assert!(rel(&c.e1, &o.e1) < 1e-10);
        prop_assert!(rel(&c.e2, &o.e2) < 1e-10);
        if e.ss > 0.0 {
            prop_assert!(rel(&c.m0, &o.m0) < 1e-10);
        }
    }

    #[test]
    fn conductivity_scale_factors_out(e in star_convex_element(), s in -6.0..6.0f64) {
        let s = 10f64.powf(s);
        let a = SElementOperator::form(&e.points, &e.material()).unwrap();
        let b = SElementOperator::form(&e.points, &Material::new(e.kx * s, e.ky * s, e.ss)).unwrap();
        prop_assert!(rel(&b.stiffness, &(&a.stiffness * s)) < 1e-10);
        if e.ss > 0.0 {
            prop_assert!(rel(&b.mass, &a.mass) < 1e-10);
        }
    }

    #[test]
    fn rigid_motion_leaves_matrices_unchanged(e in star_convex_element(), dx in -10.0..10.0f64, dy in -10.0..10.0f64) {
        // Translation only: rotation would mix an anisotropic conductivity.
        let moved: Vec<Point2> = e.points.iter().map(|p| Point2::new(p.x + dx, p.y + dy)).collect();
        let a = SElementOperator::form(&e.points, &e.material()).unwrap();
        let b = SElementOperator::form(&moved, &e.material()).unwrap();
        prop_assert!(rel(&b.stiffness, &a.stiffness) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_elements_match_condensed_fem(e in star_convex_element()) {
        let op = SElementOperator::form(&e.points, &e.material()).unwrap();
        let (k, m) = fem_condensed_extrapolated(&e.points, e.kx, e.ky, e.ss, 100);
        prop_assert!(rel(&op.stiffness, &k) < 1e-7, "K {:e}", rel(&op.stiffness, &k));
        if e.ss > 0.0 {
            prop_assert!(rel(&op.mass, &m) < 1e-7, "M {:e}", rel(&op.mass, &m));
        }
    }
}
