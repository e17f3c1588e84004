//! Acceptance suite: one line per criterion with the measured quantity, its
//! tolerance and the runtime against its budget. Exits non-zero on any failure.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hawking_core::ambient::{curvature_tensor_from_schouten, normal_coordinate_quadratic};
use hawking_core::expansion::{
    concentration_experiment, concentration_field, expansion_check, geodesic_sphere_shape,
    CriticalKind, ExpansionOptions, FieldGrid,
};
use hawking_core::moments::{exact_monomial_integral, identity_suite};
use hawking_core::optimizer::{
    area_scan, minimize_area_constrained, noisy_round, OptimizerOptions,
};
use hawking_core::tensor::{rotation, Mat3, ZERO3};
use hawking_core::variation::{fd_check, NormalSpeed};
use hawking_core::{
    embed, evaluate_functionals, AffineK, LagrangianSpec, ManifoldModel, QuadratureGrid,
    SurfaceShape,
};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), String>;

fn grid(n: usize) -> Arc<QuadratureGrid> {
    Arc::new(QuadratureGrid::new(n).unwrap())
}

fn generic_k() -> AffineK {
    AffineK::from_components(
        [0.4, -0.2, 0.1, 0.7, 0.3, -0.5],
        std::array::from_fn(|i| (((i * 5 + 3) % 7) as f64 - 3.0) * 0.3),
    )
}

fn schouten_model(s: Mat3, k: AffineK) -> ManifoldModel {
    ManifoldModel::perturbed_flat(
        normal_coordinate_quadratic(&curvature_tensor_from_schouten(&s)),
        1.0,
        k,
    )
    .unwrap()
}

fn perturbed_model() -> ManifoldModel {
    schouten_model(
        Mat3::new(0.4, 0.1, -0.2, 0.1, -0.3, 0.05, -0.2, 0.05, 0.2),
        generic_k(),
    )
}

fn random_k(rng: &mut ChaCha8Rng) -> AffineK {
    AffineK::from_components(
        std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
        std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
    )
}

fn random_lagrangian(rng: &mut ChaCha8Rng) -> LagrangianSpec {
    LagrangianSpec::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    )
}

/// All `∫ν^{a₁}⋯ν^{aₙ}` up to degree 6 against Gauss–Legendre quadrature,
/// and `Σ_g I(key, g, g) = I(key)` exactly for degrees 6 → 4 → 2.
fn moment_suite() -> Check {
    let g = QuadratureGrid::new(8).map_err(|e| e.to_string())?;
    let mut keys: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier = keys.clone();
    for _ in 0..6 {
        frontier = frontier
            .iter()
            .flat_map(|k| (0..3).map(move |a| k.iter().copied().chain([a]).collect::<Vec<usize>>()))
            .collect();
        keys.extend(frontier.iter().cloned());
    }
    let mut worst: f64 = 0.0;
    for key in &keys {
        let vals: Vec<f64> = g
            .nodes
            .iter()
            .map(|n| key.iter().map(|&a| n[a]).product())
            .collect();
        let exact = exact_monomial_integral(key)
            .map_err(|e| e.to_string())?
            .value();
        worst = worst.max((g.integrate(&vals) - exact).abs());
    }
    let mut contractions = 0;
    let mut exact_ok = true;
    for key in keys.iter().filter(|k| k.len() <= 4) {
        let mut sum = Ratio::from_integer(0i64);
        for a in 0..3 {
            let mut k = key.clone();
            k.extend([a, a]);
            sum += exact_monomial_integral(&k).map_err(|e| e.to_string())?.0;
        }
        exact_ok &= sum == exact_monomial_integral(key).map_err(|e| e.to_string())?.0;
        contractions += 1;
    }
    Ok((
        worst <= 1e-12 && exact_ok,
        format!("{} keys, max quadrature error {worst:.2e} (tol 1e-12); {contractions} contractions exact: {exact_ok}", keys.len()),
    ))
}

fn identity_table() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, model, a) in [
        (
            "flat",
            ManifoldModel::flat(2.0, AffineK::zero()).unwrap(),
            [0.1, -0.2, 0.05],
        ),
        ("perturbed-flat", perturbed_model(), [0.05, 0.1, -0.1]),
    ] {
        let rows = identity_suite(&model, a, 100, 17).map_err(|e| e.to_string())?;
        let e = rows.iter().map(|r| r.max_err_exact).fold(0.0, f64::max);
        let q = rows
            .iter()
            .map(|r| r.max_err_quadrature)
            .fold(0.0, f64::max);
        let pass = rows
            .iter()
            .all(|r| r.pass && r.tol_exact <= 1e-10 && r.tol_quadrature <= 1e-8);
        ok &= pass;
        lines.push(format!(
            "{name}: {} rows, exact {e:.1e}, quadrature {q:.1e}",
            rows.len()
        ));
    }
    Ok((ok, format!("{} (tol 1e-10 / 1e-8)", lines.join("; "))))
}

fn flat_hawking_oracle() -> Check {
    let model = ManifoldModel::flat(
        1.0,
        AffineK::constant([[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]]),
    )
    .unwrap();
    let g = grid(16);
    let mut worst: f64 = 0.0;
    for r in [0.05, 0.1, 0.2] {
        let geom =
            embed(&SurfaceShape::round([0.0; 3], r, 4), &model, &g).map_err(|e| e.to_string())?;
        let e = evaluate_functionals(&geom, &LagrangianSpec::hawking()).hawking_energy;
        worst = worst.max((e - r.powi(3) / 15.0).abs());
    }
    let rep = expansion_check(
        &model,
        [0.0; 3],
        &[0.2, 0.14, 0.1, 0.07, 0.05],
        &LagrangianSpec::hawking(),
        &ExpansionOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let c3 = rep.energy_fit.coefficient(3).unwrap();
    let oracle: f64 = (0.6 + 0.2) / 12.0;
    Ok((
        worst <= 1e-9 && (c3 - 1.0 / 15.0).abs() <= 1e-6 && (oracle - 1.0 / 15.0).abs() < 1e-15,
        format!("max |E - R³/15| {worst:.1e} (tol 1e-9); c3 = {c3:.10} vs 1/15 (tol 1e-6)"),
    ))
}

fn round_s3_oracle() -> Check {
    let model = ManifoldModel::round_sphere(1.0, 1.0, AffineK::zero()).unwrap();
    let g = grid(16);
    let mut worst: f64 = 0.0;
    for r in [0.05, 0.1, 0.2] {
        let shape = geodesic_sphere_shape(&model, [0.0; 3], r, 4).map_err(|e| e.to_string())?;
        let e = evaluate_functionals(
            &embed(&shape, &model, &g).map_err(|e| e.to_string())?,
            &LagrangianSpec::zero(),
        )
        .hawking_energy;
        worst = worst.max((e - r.sin().powi(3) / 2.0).abs());
    }
    let rep = expansion_check(
        &model,
        [0.0; 3],
        &[0.2, 0.14, 0.1, 0.07, 0.05],
        &LagrangianSpec::zero(),
        &ExpansionOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let c3 = rep.energy_fit.coefficient(3).unwrap();
    Ok((
        worst <= 1e-8 && (c3 - 0.5).abs() <= 1e-6,
        format!(
            "max |E - sin³r/2| {worst:.1e} (tol 1e-8); c3 = {c3:.10} vs Sc/12 = 1/2 (tol 1e-6)"
        ),
    ))
}

fn variation_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = grid(20);
    let r = 0.2;
    let mut worst: f64 = 0.0;
    for draw in 0..20 {
        let k = random_k(&mut rng);
        let model = match draw % 3 {
            0 => ManifoldModel::flat(2.0, k).unwrap(),
            1 => ManifoldModel::round_sphere(1.0, 1.0, k).unwrap(),
            _ => schouten_model(
                Mat3::new(0.3, 0.1, -0.1, 0.1, -0.2, 0.05, -0.1, 0.05, 0.25),
                k,
            ),
        };
        let center = std::array::from_fn(|_| rng.random_range(-0.05..0.05));
        let shape = noisy_round(center, r, 6, 0.03, 4, &mut rng);
        let speed = match draw % 4 {
            0 => NormalSpeed::Constant(1.0),
            1 => NormalSpeed::Translation(std::array::from_fn(|_| rng.random_range(-1.0..1.0))),
            _ => {
                let l = rng.random_range(0..=4usize);
                NormalSpeed::Harmonic(l, rng.random_range(-(l as i64)..=l as i64))
            }
        };
        let lag = random_lagrangian(&mut rng);
        let rep = fd_check(&shape, &model, &g, &speed, &lag, 1e-4 * r)
            .map_err(|e| format!("draw {draw}: {e}"))?;
        worst = worst.max(rep.max_rel_err());
    }
    Ok((
        worst <= 1e-6,
        format!("20 draws over flat/S³/perturbed-flat, max relative error {worst:.2e} (tol 1e-6)"),
    ))
}

fn flat_minimizer_recovery() -> Check {
    let flat = ManifoldModel::flat(10.0, AffineK::zero()).unwrap();
    let opts = OptimizerOptions::new(4.0 * PI);
    let (mut traceless, mut defect, mut iters): (f64, f64, usize) = (0.0, 0.0, 0);
    let mut ok = true;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let init = noisy_round([0.0; 3], 1.0, 6, 0.05, 6, &mut rng);
        let rep = minimize_area_constrained(&flat, &LagrangianSpec::zero(), &opts, &init)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        ok &= rep.converged && rep.iterations <= 500;
        traceless = traceless.max(rep.traceless_l2);
        defect = defect.max((rep.report.h_l - 4.0 * PI).abs());
        iters = iters.max(rep.iterations);
    }
    Ok((
        ok && traceless <= 1e-6 && defect <= 1e-5,
        format!("10 seeds: max ‖Å‖ {traceless:.1e} (tol 1e-6), max |H_L - 4π| {defect:.1e} (tol 1e-5), max iterations {iters} (≤ 500)"),
    ))
}

fn small_area_energy_bound() -> Check {
    let model = schouten_model(
        Mat3::identity() * 0.5,
        AffineK::constant([[0.6, 0.0, 0.0], [0.0, 0.6, 0.0], [0.0, 0.0, 0.6]]),
    );
    let sc = model
        .curvature_at([0.0; 3])
        .map_err(|e| e.to_string())?
        .scalar;
    let areas = [1e-2, 5e-3, 2.5e-3];
    let mut opts = OptimizerOptions::new(areas[0]);
    opts.grad_tol = 1e-6;
    let mut init = SurfaceShape::round([0.0; 3], (areas[0] / (4.0 * PI)).sqrt(), 6);
    init.set_coeff(2, 0, 0.02 * init.mean_radius());
    let scan = area_scan(&model, &LagrangianSpec::hawking(), &areas, &opts, &init)
        .map_err(|e| e.to_string())?;
    let mut ratios = Vec::new();
    for e in scan {
        let rep = e.result.map_err(|err| format!("area {}: {err}", e.area))?;
        if !rep.converged {
            return Ok((false, format!("area {} did not converge", e.area)));
        }
        ratios.push((rep.report.h_l - 4.0 * PI).abs() / e.area);
    }
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((
        lo > 0.0 && hi / lo <= 2.0,
        format!(
            "Sc_p = {sc:.3}; |H_L - 4π|/a = {ratios:?}, spread {:.4} (tol 2)",
            hi / lo
        ),
    ))
}

fn generic_expansion() -> Check {
    let rep = expansion_check(
        &perturbed_model(),
        [0.0; 3],
        &hawking_core::expansion::DEFAULT_RADII,
        &LagrangianSpec::hawking(),
        &ExpansionOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let c3 = rep.energy_fit.coefficient(3).unwrap();
    Ok((
        (rep.energy_ratio - 1.0).abs() <= 0.02,
        format!(
            "c3 = {c3:.6} vs Φ/12 = {:.6}, ratio {:.5} (tol 2%)",
            rep.predicted_energy_c3, rep.energy_ratio
        ),
    ))
}

const A2: f64 = -0.1;
const A4: f64 = 0.05;

/// `φ⁴δ` with `φ = 1 + a₂|x|² + a₄|x|⁴` and `K = diag(1 + 0.8x¹, 0, 0)`.
fn designed_model() -> ManifoldModel {
    let mut k1 = ZERO3;
    k1[0][0][0] = 0.8;
    ManifoldModel::conformally_flat(
        A2,
        A4,
        1.0,
        AffineK {
            k0: [[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]],
            k1,
        },
    )
    .unwrap()
}

/// `Sc + (3/5)t² + (1/5)|K|²` on the `x¹` axis; here `|K|² = t²` with `t = K₁₁/φ⁴`.
fn designed_phi(x: f64) -> f64 {
    let phi = 1.0 + A2 * x * x + A4 * x.powi(4);
    let lap = 6.0 * A2 + 20.0 * A4 * x * x;
    let t = (1.0 + 0.8 * x) / phi.powi(4);
    -8.0 * lap / phi.powi(5) + 0.8 * t * t
}

fn designed_argmax() -> f64 {
    let d = |x: f64| (designed_phi(x + 1e-6) - designed_phi(x - 1e-6)) / 2e-6;
    let (mut a, mut b) = (0.0, 0.5);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if d(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn concentration_trend() -> Check {
    let model = designed_model();
    let areas = [1e-2, 5e-3, 2.5e-3];
    let fgrid = FieldGrid {
        center: [0.0; 3],
        half_width: 0.4,
        n: 9,
    };
    let mut opts = OptimizerOptions::new(areas[0]);
    opts.grad_tol = 1e-6;
    let init = SurfaceShape::round([0.0; 3], (areas[0] / (4.0 * PI)).sqrt(), 6);
    let rep = concentration_experiment(
        &model,
        &LagrangianSpec::hawking(),
        &areas,
        &opts,
        &init,
        &fgrid,
    )
    .map_err(|e| e.to_string())?;
    let field = concentration_field(&model, &fgrid).map_err(|e| e.to_string())?;
    let target = rep.target.as_ref().ok_or("no critical point of Φ")?;
    let rho = field.rho_maximum().ok_or("no maximum of 16πρ")?;
    let oracle = designed_argmax();
    let on_target = target.kind == CriticalKind::Maximum && (target.point[0] - oracle).abs() < 1e-8;
    let separation = (0..3)
        .map(|i| (target.point[i] - rho.point[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    let distances: Vec<f64> = rep.rows.iter().map(|r| r.distance).collect();
    let converged = rep.rows.len() == areas.len() && rep.rows.iter().all(|r| r.converged);
    Ok((
        on_target && rep.monotone && converged && separation > 0.1 && !field.coincide,
        format!(
            "Φ max at x¹ = {:.8} (oracle {oracle:.8}); distances {distances:?} monotone {}; 16πρ max at {:?}, separation {separation:.4}",
            target.point[0], rep.monotone, rho.point
        ),
    ))
}

fn structural_invariants() -> Check {
    let lag = LagrangianSpec::new(0.3, -0.7, 1.1, 0.4);
    let models = [
        (
            "flat",
            ManifoldModel::flat(2.0, generic_k()).unwrap(),
            [0.1, 0.0, -0.1],
        ),
        (
            "S3",
            ManifoldModel::round_sphere(1.0, 1.0, generic_k()).unwrap(),
            [0.05, 0.05, 0.0],
        ),
        (
            "schwarzschild",
            ManifoldModel::schwarzschild(0.2, 3.0, generic_k()).unwrap(),
            [0.3, 0.5, 0.0],
        ),
        ("perturbed-flat", perturbed_model(), [0.05, -0.1, 0.0]),
        ("conformally-flat", designed_model(), [0.1, 0.0, 0.05]),
    ];
    let g = grid(36);
    let rot = rotation([0.2, -0.7, 1.0], 0.9);
    let (mut gb, mut gid, mut tr, mut inv): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut count = 0;
    for (i, (_, model, c)) in models.iter().enumerate() {
        for seed in 0..3 {
            let mut rng = ChaCha8Rng::seed_from_u64(10 * i as u64 + seed);
            let shape = noisy_round(*c, 0.2, 6, 0.04, 4, &mut rng);
            let geom = embed(&shape, model, &g).map_err(|e| e.to_string())?;
            let a = evaluate_functionals(&geom, &lag);
            gb = gb.max((a.gauss_bonnet_total - 4.0 * PI).abs());
            gid = gid.max(a.gauss_identity_defect.abs());
            for n in &geom.nodes {
                tr = tr.max((n.gamma_inv * n.traceless).trace().abs());
            }
            let rotated = embed(
                &shape.rotated(&rot, &g).map_err(|e| e.to_string())?,
                &model.rotated(&rot).map_err(|e| e.to_string())?,
                &g,
            )
            .map_err(|e| e.to_string())?;
            let b = evaluate_functionals(&rotated, &lag);
            for (x, y) in [
                (a.area, b.area),
                (a.willmore, b.willmore),
                (a.l_integral, b.l_integral),
                (a.h_l, b.h_l),
                (a.hawking_energy, b.hawking_energy),
                (a.u, b.u),
                (a.v, b.v),
            ] {
                inv = inv.max((x - y).abs());
            }
            count += 1;
        }
    }
    Ok((
        gb <= 1e-8 && gid <= 1e-8 && tr <= 1e-12 && inv <= 1e-9,
        format!(
            "{count} surfaces on 5 models: Gauss–Bonnet {gb:.1e}, Gauss identity {gid:.1e} (tol 1e-8), max |tr Å| {tr:.1e} (tol 1e-12), rotation {inv:.1e} (tol 1e-9)"
        ),
    ))
}

fn main() {
    let criteria: [(&str, Option<Duration>, fn() -> Check); 10] = [
        (
            "sphere moments up to degree 6",
            Some(Duration::from_secs(1)),
            moment_suite,
        ),
        (
            "concentration identities, 100 draws",
            Some(Duration::from_secs(10)),
            identity_table,
        ),
        ("flat-space Hawking energy R³/15", None, flat_hawking_oracle),
        ("round S³ energy sin³r/2", None, round_s3_oracle),
        (
            "first variations vs finite differences",
            Some(Duration::from_secs(30)),
            variation_suite,
        ),
        (
            "flat minimizers are round",
            Some(Duration::from_secs(120)),
            flat_minimizer_recovery,
        ),
        (
            "small-area energy defect scales with a",
            None,
            small_area_energy_bound,
        ),
        (
            "generic R³ energy coefficient",
            Some(Duration::from_secs(120)),
            generic_expansion,
        ),
        (
            "centers approach the maximum of Φ",
            None,
            concentration_trend,
        ),
        ("structural invariants", None, structural_invariants),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_budget = budget.is_none_or(|b| elapsed <= b);
        let (pass, detail) = match result {
            Ok((p, d)) => (p && in_budget, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = match budget {
            Some(b) => format!("{:.2} s / {} s", elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.2} s", elapsed.as_secs_f64()),
        };
        println!(
            "criterion {:>2} {}  {name}: {detail} [{budget}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failures += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
