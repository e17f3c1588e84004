use std::f64::consts::PI;

use hawking_core::ambient::{curvature_tensor_from_schouten, normal_coordinate_quadratic};
use hawking_core::moments::{
    c_moment, c_moment_quadrature, concentration_vectors, exact_monomial_integral, identity_suite,
    FrameData,
};
use hawking_core::tensor::{rotation, Mat3, ZERO3};
use hawking_core::{AffineK, LagrangianSpec, ManifoldModel, QuadratureGrid};
use proptest::prelude::*;

fn spec_k() -> AffineK {
    let mut k1 = ZERO3;
    k1[0][0][0] = 1.0;
    AffineK {
        k0: [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        k1,
    }
}

fn diag100() -> FrameData {
    FrameData::flat(
        Mat3::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        ZERO3,
    )
}

#[test]
fn c_moments_of_the_family() {
    let f = diag100();
    let grid = QuadratureGrid::new(8).unwrap();
    let cases = [
        (LagrangianSpec::new(1.0, 0.0, 0.0, 0.0), 4.0 * PI),
        (LagrangianSpec::new(0.0, 1.0, 0.0, 0.0), 4.0 * PI / 5.0),
        (LagrangianSpec::new(0.0, 0.0, 1.0, 0.0), 4.0 * PI / 3.0),
        // ∫(1 - ν₁²)² = 32π/15, so c(-¼P²) = -8π/15.
        (LagrangianSpec::hawking(), -8.0 * PI / 15.0),
    ];
    for (lag, want) in cases {
        assert!((c_moment(&lag, &f, &[]).unwrap() - want).abs() < 1e-14);
        assert!((c_moment_quadrature(&lag, &f, &[], &grid).unwrap() - want).abs() < 1e-12);
    }
    assert!(c_moment(&LagrangianSpec::hawking(), &f, &[0, 1, 2]).is_err());
}

#[test]
fn concentration_vector_examples() {
    let model = ManifoldModel::flat(2.0, spec_k()).unwrap();
    // ∂₁(3 trK² + |K|²) = ∂₁ 4(1 + x¹)² = 8 at the origin.
    let p2 =
        concentration_vectors(&LagrangianSpec::new(1.0, 1.0, -2.0, 0.0), &model, [0.0; 3]).unwrap();
    let h = concentration_vectors(&LagrangianSpec::hawking(), &model, [0.0; 3]).unwrap();
    let t2 =
        concentration_vectors(&LagrangianSpec::new(1.0, 0.0, 0.0, 0.0), &model, [0.0; 3]).unwrap();
    for (cv, want) in [(p2, 32.0 / 5.0), (h, -8.0 / 5.0), (t2, 12.0)] {
        assert!((cv.w[0] - want).abs() < 1e-12, "{:?}", cv.w);
        assert!(cv.w[1].abs() < 1e-12 && cv.w[2].abs() < 1e-12);
        assert!((cv.w_quadrature[0] - want).abs() < 1e-10);
        assert!(cv.v.iter().chain(&cv.v_quadrature).all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn identity_suite_passes_on_flat_and_curved_models() {
    let s = Mat3::new(0.4, 0.1, -0.2, 0.1, -0.3, 0.05, -0.2, 0.05, 0.2);
    let q = normal_coordinate_quadratic(&curvature_tensor_from_schouten(&s));
    let models = [
        (ManifoldModel::flat(2.0, AffineK::zero()).unwrap(), [0.0; 3]),
        (
            ManifoldModel::perturbed_flat(q, 1.0, AffineK::zero()).unwrap(),
            [0.1, -0.2, 0.05],
        ),
    ];
    for (model, a) in models {
        let rows = identity_suite(&model, a, 100, 7).unwrap();
        assert_eq!(rows.len(), 15);
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
    }
}

#[test]
fn constant_k_in_flat_chart_has_no_w() {
    let k = AffineK::from_components([0.4, -0.2, 0.1, 0.7, 0.3, -0.5], [0.0; 18]);
    let model = ManifoldModel::flat(2.0, k).unwrap();
    for lag in [
        LagrangianSpec::hawking(),
        LagrangianSpec::new(0.3, -0.7, 1.1, 0.4),
    ] {
        let cv = concentration_vectors(&lag, &model, [0.2, 0.1, -0.3]).unwrap();
        assert!(cv.w.iter().chain(&cv.w_quadrature).all(|w| w.abs() < 1e-13));
    }
}

#[test]
fn rotation_equivariance() {
    let k = AffineK::from_components(
        [0.4, -0.2, 0.1, 0.7, 0.3, -0.5],
        std::array::from_fn(|i| (((i * 5 + 3) % 7) as f64 - 3.0) * 0.3),
    );
    let r = rotation([0.3, -1.0, 0.4], 1.3);
    let lag = LagrangianSpec::new(0.3, -0.7, 1.1, 0.4);
    let base = concentration_vectors(
        &lag,
        &ManifoldModel::flat(2.0, k.clone()).unwrap(),
        [0.0; 3],
    )
    .unwrap();
    let rot = concentration_vectors(
        &lag,
        &ManifoldModel::flat(2.0, k.rotated(&r)).unwrap(),
        [0.0; 3],
    )
    .unwrap();
    let w = r * hawking_core::tensor::from_array(base.w);
    for i in 0..3 {
        assert!((w[i] - rot.w[i]).abs() < 1e-10);
    }
}

fn axes(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0usize..3, 0..=n)
}

proptest! {
    #[test]
    fn monomials_are_order_insensitive(key in axes(6), seed in any::<u64>()) {
        let mut shuffled = key.clone();
        let k = shuffled.len().max(1);
        shuffled.rotate_left((seed as usize) % k);
        shuffled.reverse();
        prop_assert_eq!(exact_monomial_integral(&key).unwrap(), exact_monomial_integral(&shuffled).unwrap());
    }

    #[test]
    fn quadrature_matches_exact_moments(key in axes(6)) {
        let grid = QuadratureGrid::new(4).unwrap();
        let vals: Vec<f64> = grid.nodes.iter().map(|n| key.iter().map(|&a| n[a]).product()).collect();
        let exact = exact_monomial_integral(&key).unwrap().value();
        prop_assert!((grid.integrate(&vals) - exact).abs() < 1e-12);
    }

    #[test]
    fn trace_contraction_lowers_degree(key in axes(4)) {
        let mut sum = num_rational::Ratio::from_integer(0i64);
        for g in 0..3 {
            let mut k = key.clone();
            k.extend([g, g]);
            sum += exact_monomial_integral(&k).unwrap().0;
        }
        prop_assert_eq!(sum, exact_monomial_integral(&key).unwrap().0);
    }
}
