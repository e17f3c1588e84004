use std::f64::consts::PI;
use std::sync::Arc;

use hawking_core::ambient::{curvature_tensor_from_schouten, normal_coordinate_quadratic};
use hawking_core::surface::{laplace_beltrami, sh_count, sh_index, shape_diagnostics};
use hawking_core::tensor::{rotation, Mat3};
use hawking_core::{embed, AffineK, ManifoldModel, QuadratureGrid, SurfaceShape};

fn grid(n: usize) -> Arc<QuadratureGrid> {
    Arc::new(QuadratureGrid::new(n).unwrap())
}

fn k_diag100() -> AffineK {
    AffineK::constant([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
}

fn wobbly(center: [f64; 3], r: f64) -> SurfaceShape {
    let mut s = SurfaceShape::round(center, r, 6);
    s.set_coeff(2, 0, 0.04 * r);
    s.set_coeff(2, -1, -0.03 * r);
    s.set_coeff(3, 2, 0.02 * r);
    s.set_coeff(1, 1, 0.05 * r);
    s.set_coeff(5, -3, 0.01 * r);
    s
}

fn perturbed_model() -> ManifoldModel {
    let s = Mat3::new(0.4, 0.1, -0.2, 0.1, -0.3, 0.05, -0.2, 0.05, 0.2);
    let q = normal_coordinate_quadratic(&curvature_tensor_from_schouten(&s));
    ManifoldModel::perturbed_flat(q, 1.0, k_diag100()).unwrap()
}

#[test]
fn grid_weights_and_moments() {
    let g = grid(4);
    assert!((g.weights.iter().sum::<f64>() - 4.0 * PI).abs() < 1e-13);
    let g = grid(8);
    let y = g.basis_values(2, 1);
    let norm = g.integrate(&y.iter().map(|v| v * v).collect::<Vec<_>>());
    assert!((norm - 1.0).abs() < 1e-13);
    let m: Vec<f64> = g
        .nodes
        .iter()
        .map(|n| (n[0] * n[1] * n[2]).powi(2))
        .collect();
    assert!((g.integrate(&m) - 4.0 * PI / 105.0).abs() < 1e-13);
    assert_eq!(g.exactness_degree, 15);
}

#[test]
fn flat_round_sphere_geometry() {
    let model = ManifoldModel::flat(2.0, k_diag100()).unwrap();
    let r = 0.7;
    let geom = embed(
        &SurfaceShape::round([0.1, -0.2, 0.3], r, 4),
        &model,
        &grid(16),
    )
    .unwrap();
    assert!((geom.area - 4.0 * PI * r * r).abs() < 1e-12);
    for n in &geom.nodes {
        assert!((n.mean_curvature - 2.0 / r).abs() < 1e-10);
        assert!(n.traceless_norm2 < 1e-20);
        let nu1 = n.normal[0];
        assert!((n.p - (1.0 - nu1 * nu1)).abs() < 1e-13);
    }
}

#[test]
fn geodesic_sphere_on_round_s3() {
    let model = ManifoldModel::round_sphere(1.0, 1.0, AffineK::zero()).unwrap();
    for r in [0.05, 0.2, 0.5] {
        let geom = embed(&SurfaceShape::round([0.0; 3], r, 2), &model, &grid(12)).unwrap();
        assert!((geom.area - 4.0 * PI * r.sin().powi(2)).abs() < 1e-12);
        for n in &geom.nodes {
            assert!(
                (n.mean_curvature - 2.0 / r.tan()).abs() < 1e-8,
                "{} vs {}",
                n.mean_curvature,
                2.0 / r.tan()
            );
            assert!((n.ric_nn - 2.0).abs() < 1e-10);
        }
    }
}

#[test]
fn normal_is_unit_and_orthogonal() {
    let model = perturbed_model();
    let geom = embed(&wobbly([0.05, 0.0, -0.1], 0.2), &model, &grid(16)).unwrap();
    for n in &geom.nodes {
        let g = n.g;
        assert!(((n.normal.transpose() * g * n.normal)[0] - 1.0).abs() < 1e-12);
        for e in &n.tangents {
            assert!((n.normal.transpose() * g * e)[0].abs() < 1e-12);
        }
        assert!((n.gamma_inv * n.traceless).trace().abs() < 1e-12);
        assert!((n.second_form - n.second_form.transpose()).abs().max() < 1e-12);
    }
}

#[test]
fn laplacian_spectrum_on_round_sphere() {
    let model = ManifoldModel::flat(2.0, AffineK::zero()).unwrap();
    let r = 0.8;
    let g = grid(16);
    let geom = embed(&SurfaceShape::round([0.0; 3], r, 2), &model, &g).unwrap();
    let ones = vec![1.0; g.len()];
    assert!(laplace_beltrami(&geom, &ones)
        .unwrap()
        .iter()
        .all(|v| v.abs() < 1e-11));
    for (l, m) in [(1, 0), (2, -1), (4, 3), (7, -5)] {
        let y = g.basis_values(l, m);
        let ly = laplace_beltrami(&geom, &y).unwrap();
        let ev = -((l * (l + 1)) as f64) / (r * r);
        for (a, b) in ly.iter().zip(&y) {
            assert!((a - ev * b).abs() < 1e-8);
        }
    }
}

#[test]
fn laplacian_integrates_to_zero() {
    let model = perturbed_model();
    let g = grid(20);
    let geom = embed(&wobbly([0.0, 0.1, 0.0], 0.25), &model, &g).unwrap();
    let f: Vec<f64> = geom
        .nodes
        .iter()
        .map(|n| (3.0 * n.x[0]).sin() + n.x[1] * n.x[2])
        .collect();
    let lf = laplace_beltrami(&geom, &f).unwrap();
    let total = geom.integrate_samples(&lf).unwrap();
    assert!(total.abs() < 1e-9, "{total}");
}

#[test]
fn spectral_convergence_of_area() {
    let model = perturbed_model();
    let s = wobbly([0.0; 3], 0.2);
    let a = embed(&s, &model, &grid(24)).unwrap();
    let b = embed(&s, &model, &grid(48)).unwrap();
    assert!((a.area - b.area).abs() < 1e-10 * a.area);
}

#[test]
fn diagnostics_of_round_and_ellipsoidal_shapes() {
    let model = ManifoldModel::flat(2.0, AffineK::zero()).unwrap();
    let g = grid(16);
    let geom = embed(&SurfaceShape::round([0.2, 0.0, 0.0], 0.5, 2), &model, &g).unwrap();
    let d = shape_diagnostics(&geom);
    assert!(d.traceless_euclid_l2 < 1e-10);
    assert!(d.mean_curvature_euclid_deviation_l2 < 1e-10);
    assert!((d.euclid_center[0] - 0.2).abs() < 1e-12);
    assert!((d.diameter - 1.0).abs() < 1e-2);

    let mut s = SurfaceShape::round([0.0; 3], 0.5, 2);
    s.set_coeff(2, 0, 0.01 * 0.5);
    let geom = embed(&s, &model, &g).unwrap();
    let d = shape_diagnostics(&geom);
    assert!(d.traceless_euclid_l2 > 1e-4);
    assert!(d.euclid_center.iter().all(|c| c.abs() < 1e-10));
}

#[test]
fn shape_text_round_trip() {
    let s = wobbly([0.1, 1.0 / 3.0, -2e-7], 0.123456789);
    let back = SurfaceShape::from_text(&s.to_text()).unwrap();
    assert_eq!(s, back);
    assert!(SurfaceShape::from_text("center 0 0\nl_max 0\n0 0 1").is_err());
}

#[test]
fn rotated_shape_has_rotated_samples() {
    let g = grid(12);
    let s = wobbly([0.1, 0.0, 0.2], 0.3);
    let r = rotation([1.0, 2.0, -0.5], 1.1);
    let rs = s.rotated(&r, &g).unwrap();
    let dir = hawking_core::tensor::Vec3::new(0.6, 0.0, 0.8);
    let rd = r * dir;
    assert!((s.radius_at([0.6, 0.0, 0.8]) - rs.radius_at([rd[0], rd[1], rd[2]])).abs() < 1e-13);
    assert_eq!(rs.coeffs.len(), sh_count(6));
    assert!((rs.coeffs[sh_index(0, 0)] - s.coeffs[0]).abs() < 1e-14);
}

#[test]
fn non_positive_radius_is_rejected() {
    let model = ManifoldModel::flat(2.0, AffineK::zero()).unwrap();
    let mut s = SurfaceShape::round([0.0; 3], 0.1, 2);
    s.set_coeff(1, 0, 1.0);
    assert!(embed(&s, &model, &grid(8)).is_err());
}
