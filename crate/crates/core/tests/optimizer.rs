use std::f64::consts::PI;
use std::sync::Arc;

use hawking_core::ambient::{curvature_tensor_from_schouten, normal_coordinate_quadratic};
use hawking_core::optimizer::{
    area_scan, minimize_area_constrained, noisy_round, remove_translation_modes,
    CriticalSurfaceReport, OptimizerOptions,
};
use hawking_core::tensor::{from_array, rotation, Mat3};
use hawking_core::{
    embed, AffineK, Error, LagrangianSpec, ManifoldModel, QuadratureGrid, SurfaceShape,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn flat() -> ManifoldModel {
    ManifoldModel::flat(10.0, AffineK::zero()).unwrap()
}

/// `O(3)`-invariant about the origin, so centered round spheres are critical.
fn symmetric_model() -> ManifoldModel {
    let q = normal_coordinate_quadratic(&curvature_tensor_from_schouten(&(Mat3::identity() * 0.5)));
    let k = AffineK::constant([[0.6, 0.0, 0.0], [0.0, 0.6, 0.0], [0.0, 0.0, 0.6]]);
    ManifoldModel::perturbed_flat(q, 1.0, k).unwrap()
}

fn assert_history_invariants(rep: &CriticalSurfaceReport) {
    for w in rep.history.windows(2) {
        assert!(
            w[1].h_l <= w[0].h_l + 1e-12 * w[0].h_l.abs().max(1.0),
            "{w:?}"
        );
    }
    assert!(rep.history.iter().all(|h| h.area_defect.abs() <= 1e-10));
}

#[test]
fn flat_noisy_spheres_become_round() {
    let opts = OptimizerOptions::new(4.0 * PI);
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = noisy_round([0.0; 3], 1.0, 8, 0.05, 6, &mut rng);
        let rep =
            minimize_area_constrained(&flat(), &LagrangianSpec::zero(), &opts, &init).unwrap();
        assert!(rep.converged);
        assert!(rep.traceless_l2 <= 1e-6, "{}", rep.traceless_l2);
        assert!((rep.report.h_l - 4.0 * PI).abs() <= 1e-5);
        assert!(rep.mean_curvature_deviation <= 1e-6);
        assert!(rep.report.el_residual_l2 <= 10.0 * opts.grad_tol);
        assert!(rep.shape.coeffs[1..4].iter().all(|a| *a == 0.0));
        assert_history_invariants(&rep);
    }
}

#[test]
fn flat_hawking_minimizer_is_below_the_coordinate_sphere() {
    let r = 0.1;
    let model = ManifoldModel::flat(
        2.0,
        AffineK::constant([[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]]),
    )
    .unwrap();
    let mut opts = OptimizerOptions::new(4.0 * PI * r * r);
    opts.grad_tol = 1e-9;
    let mut init = SurfaceShape::round([0.0; 3], r, 8);
    init.set_coeff(2, 1, 0.01 * r);
    let rep = minimize_area_constrained(&model, &LagrangianSpec::hawking(), &opts, &init).unwrap();
    assert!(rep.converged);
    // On the coordinate sphere E = R³/15, so H_L = 4π(1 - 2E/R) = 4π - 8πR²/15.
    let sphere = 4.0 * PI - 8.0 * PI * r * r / 15.0;
    let gap = sphere - rep.report.h_l;
    assert!(gap >= -1e-12 && gap <= r.powi(4), "gap {gap:e}");
    assert_history_invariants(&rep);
}

#[test]
fn symmetric_model_energy_defect_scales_with_area() {
    let model = symmetric_model();
    let (phi, grad) = model.concentration_potential([0.0; 3]).unwrap();
    assert!(grad.iter().all(|g| g.abs() < 1e-12));
    let areas = [1e-2, 5e-3, 2.5e-3];
    let mut opts = OptimizerOptions::new(areas[0]);
    opts.grad_tol = 1e-6;
    let mut init = SurfaceShape::round([0.0; 3], (areas[0] / (4.0 * PI)).sqrt(), 6);
    init.set_coeff(2, 0, 0.02 * init.mean_radius());
    let scan = area_scan(&model, &LagrangianSpec::hawking(), &areas, &opts, &init).unwrap();
    let mut ratios = Vec::new();
    for e in scan {
        let rep = e.result.unwrap();
        assert!(rep.converged && !e.restarted);
        assert!(rep.shape.center.iter().all(|c| c.abs() < 1e-9));
        assert_history_invariants(&rep);
        ratios.push((rep.report.h_l - 4.0 * PI) / e.area);
    }
    // H_L ≈ 4π - (2π/3)R²Φ, i.e. (H_L - 4π)/a → -Φ/6.
    for r in &ratios {
        assert!(
            (r / (-phi / 6.0) - 1.0).abs() < 0.05,
            "{ratios:?} vs {}",
            -phi / 6.0
        );
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| {
        (lo.min(r.abs()), hi.max(r.abs()))
    });
    assert!(hi / lo < 2.0);
}

#[test]
fn flat_scan_stays_round() {
    let areas = [4.0 * PI, PI, 0.25 * PI];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let init = noisy_round([0.3, -0.2, 0.1], 1.0, 6, 0.03, 4, &mut rng);
    let scan = area_scan(
        &flat(),
        &LagrangianSpec::zero(),
        &areas,
        &OptimizerOptions::default(),
        &init,
    )
    .unwrap();
    assert_eq!(scan.len(), 3);
    for e in scan {
        let rep = e.result.unwrap();
        assert!((rep.report.h_l - 4.0 * PI).abs() <= 1e-5);
        assert!(rep.traceless_l2 <= 1e-6);
        assert!((rep.report.area - e.area).abs() <= 1e-10 * e.area);
    }
    let err = area_scan(
        &flat(),
        &LagrangianSpec::zero(),
        &[1.0, 2.0],
        &OptimizerOptions::default(),
        &init,
    );
    assert!(matches!(err, Err(Error::InvalidInput(_))));
}

#[test]
fn rotated_problem_has_rotated_minimizer() {
    let k = AffineK::from_components([0.4, -0.2, 0.1, 0.7, 0.3, -0.5], [0.0; 18]);
    let r = rotation([0.3, -1.0, 0.4], 1.3);
    let grid = QuadratureGrid::new(24).unwrap();
    let lag = LagrangianSpec::new(0.3, -0.7, 1.1, 0.4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let init = noisy_round([0.1, 0.0, -0.1], 0.5, 6, 0.03, 4, &mut rng);
    let mut opts = OptimizerOptions::new(PI);
    opts.grad_tol = 1e-9;
    let base = minimize_area_constrained(
        &ManifoldModel::flat(3.0, k.clone()).unwrap(),
        &lag,
        &opts,
        &init,
    )
    .unwrap();
    let rot = minimize_area_constrained(
        &ManifoldModel::flat(3.0, k.rotated(&r)).unwrap(),
        &lag,
        &opts,
        &init.rotated(&r, &grid).unwrap(),
    )
    .unwrap();
    assert!(base.converged && rot.converged);
    assert!((base.report.h_l - rot.report.h_l).abs() <= 1e-9);
    let c = r * from_array(base.shape.center);
    for i in 0..3 {
        assert!(
            (c[i] - rot.shape.center[i]).abs() <= 1e-6,
            "{c:?} {:?}",
            rot.shape.center
        );
    }
}

#[test]
fn translation_modes_move_into_the_center() {
    let grid = QuadratureGrid::new(20).unwrap();
    let mut s = SurfaceShape::round([0.2, 0.0, 0.0], 1.0, 6);
    // A translation by b adds √(4π/3) b to the l = 1 block at first order.
    let shift = 0.05 * (4.0 * PI / 3.0).sqrt();
    s.set_coeff(1, 1, shift);
    s.set_coeff(2, -2, 0.03);
    let moved = remove_translation_modes(&s, &grid).unwrap();
    assert!(moved.coeffs[1..4].iter().all(|a| *a == 0.0));
    assert!((moved.center[0] - 0.25).abs() < 5e-3);
    let g = Arc::new(QuadratureGrid::new(20).unwrap());
    let model = flat();
    let (a, b) = (
        embed(&s, &model, &g).unwrap(),
        embed(&moved, &model, &g).unwrap(),
    );
    assert!((a.area - b.area).abs() < 1e-9 * a.area);
}

#[test]
fn failures_are_reported() {
    let model = flat();
    let mut opts = OptimizerOptions::new(4.0 * PI);
    opts.armijo_c = 1e6;
    opts.max_line_search = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let init = noisy_round([0.0; 3], 1.0, 6, 0.05, 4, &mut rng);
    match minimize_area_constrained(&model, &LagrangianSpec::zero(), &opts, &init) {
        Err(Error::Stall { attempts, .. }) => assert_eq!(attempts, 5),
        other => panic!("expected a stall, got {other:?}"),
    }

    let mut bad = SurfaceShape::round([0.0; 3], 1.0, 4);
    bad.set_coeff(2, 0, 5.0);
    let err = minimize_area_constrained(
        &model,
        &LagrangianSpec::zero(),
        &OptimizerOptions::default(),
        &bad,
    );
    assert!(
        matches!(err, Err(Error::Shape { iteration: 0, .. })),
        "{err:?}"
    );

    let mut opts = OptimizerOptions::default();
    opts.shrink = 1.5;
    let err = minimize_area_constrained(&model, &LagrangianSpec::zero(), &opts, &init);
    assert!(matches!(err, Err(Error::InvalidInput(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn descent_is_monotone_at_fixed_area(seed in any::<u64>(), noise in 0.0..0.08f64, area in 1.0..20.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = noisy_round([0.0; 3], 1.0, 6, noise, 6, &mut rng);
        let mut opts = OptimizerOptions::new(area);
        opts.max_iters = 40;
        let rep = minimize_area_constrained(&flat(), &LagrangianSpec::zero(), &opts, &init).unwrap();
        for w in rep.history.windows(2) {
            prop_assert!(w[1].h_l <= w[0].h_l + 1e-12 * w[0].h_l.abs().max(1.0));
        }
        prop_assert!(rep.history.iter().all(|h| h.area_defect.abs() <= 1e-10));
        prop_assert!(rep.report.h_l >= 4.0 * PI - 1e-9);
    }
}
