//! One function per subcommand.

use std::f64::consts::PI;
use std::sync::Arc;

use hawking_core::expansion::{
    concentration_experiment, concentration_field, expansion_check, ExpansionOptions,
};
use hawking_core::moments::{concentration_vectors, identity_suite};
use hawking_core::optimizer::{
    area_scan, minimize_area_constrained, noisy_round, CriticalSurfaceReport, OptimizerOptions,
};
use hawking_core::surface::shape_diagnostics;
use hawking_core::variation::{fd_check, lagrange_multiplier};
use hawking_core::{
    embed, evaluate_functionals, Error, LagrangianSpec, ManifoldModel, QuadratureGrid, SurfaceShape,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{self, CommandName, ExperimentConfig};
use crate::output::{flatten, Outcome, Table};
use crate::CliError;

/// Bad inputs are validation errors; everything else is numerical.
pub fn classify(e: Error) -> CliError {
    match e {
        Error::InvalidInput(_) | Error::InvalidModel(_) | Error::UnsupportedDegree { .. } => {
            CliError::Validation(e.to_string())
        }
        other => CliError::Numerical(other.to_string()),
    }
}

struct Setup {
    model: ManifoldModel,
    lag: LagrangianSpec,
    seed: u64,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup, CliError> {
    Ok(Setup {
        model: config::build_model(&cfg.model)?,
        lag: config::lagrangian(&cfg.lagrangian),
        seed: cfg.command.seed.unwrap_or(0),
    })
}

fn initial_shape(
    cfg: &ExperimentConfig,
    default_radius: f64,
    seed: u64,
) -> Result<SurfaceShape, CliError> {
    let s = &cfg.surface;
    if let Some(path) = &s.shape_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("shape file {}: {e}", path.display())))?;
        let shape = SurfaceShape::from_text(&text).map_err(classify)?;
        if shape.l_max + 1 > n_theta(cfg) {
            return Err(CliError::Validation(format!(
                "shape file has l_max = {} but surface.n_theta = {}",
                shape.l_max,
                n_theta(cfg)
            )));
        }
        return Ok(shape);
    }
    let radius = s.radius.unwrap_or(default_radius);
    if s.noise == 0.0 {
        return Ok(SurfaceShape::round(s.center, radius, s.l_max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(noisy_round(
        s.center,
        radius,
        s.l_max,
        s.noise,
        s.noise_band.unwrap_or(s.l_max),
        &mut rng,
    ))
}

fn n_theta(cfg: &ExperimentConfig) -> usize {
    cfg.surface.n_theta.unwrap_or(2 * cfg.surface.l_max + 6)
}

fn grid(cfg: &ExperimentConfig) -> Result<Arc<QuadratureGrid>, CliError> {
    QuadratureGrid::new(n_theta(cfg))
        .map(Arc::new)
        .map_err(classify)
}

fn optimizer(cfg: &ExperimentConfig, target_area: f64) -> OptimizerOptions {
    let base = cfg.command.optimizer.clone().unwrap_or_default();
    OptimizerOptions {
        target_area,
        n_theta: base.n_theta.or(Some(n_theta(cfg))),
        ..base
    }
}

fn radius_of_area(a: f64) -> f64 {
    (a / (4.0 * PI)).sqrt()
}

pub fn run(cfg: &ExperimentConfig, command: CommandName) -> Result<Outcome, CliError> {
    match command {
        CommandName::Eval => eval(cfg),
        CommandName::Minimize => minimize(cfg),
        CommandName::Scan => scan(cfg),
        CommandName::Expand => expand(cfg),
        CommandName::Moments => moments(cfg),
        CommandName::Concentrate => concentrate(cfg),
        CommandName::CheckVariation => check_variation(cfg),
    }
}

fn eval(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let shape = initial_shape(cfg, 1.0, s.seed)?;
    let geom = embed(&shape, &s.model, &grid(cfg)?).map_err(classify)?;
    let report = evaluate_functionals(&geom, &s.lag);
    let mut out = Outcome::default();
    out.extend(&report);
    out.insert("center", &shape.center);
    out.insert("diagnostics", &shape_diagnostics(&geom));
    match lagrange_multiplier(&geom, &s.model, &s.lag) {
        Ok(m) => out.insert("multiplier", &m),
        Err(e) => out.insert("multiplier", &format!("unavailable: {e}")),
    }
    out.summary.push(format!(
        "A = {}  W = {}  ∫L = {}  H_L = {}  E = {}",
        report.area, report.willmore, report.l_integral, report.h_l, report.hawking_energy
    ));
    out.table = Some(Table::from_records(&[&report]));
    out.shapes.push(("shape.txt".into(), shape));
    Ok(out)
}

#[derive(Serialize)]
struct MinimizerSummary<'a> {
    #[serde(flatten)]
    report: &'a hawking_core::FunctionalReport,
    center: [f64; 3],
    iterations: usize,
    converged: bool,
    p0: Option<[f64; 3]>,
    traceless_l2: f64,
    mean_curvature_deviation: f64,
}

fn summary(rep: &CriticalSurfaceReport) -> MinimizerSummary<'_> {
    MinimizerSummary {
        report: &rep.report,
        center: rep.shape.center,
        iterations: rep.iterations,
        converged: rep.converged,
        p0: rep.p0,
        traceless_l2: rep.traceless_l2,
        mean_curvature_deviation: rep.mean_curvature_deviation,
    }
}

fn failed_shape(e: &Error) -> Option<SurfaceShape> {
    match e {
        Error::Stall { last, .. } | Error::Shape { last, .. } => Some((**last).clone()),
        _ => None,
    }
}

fn minimize(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let area = cfg.command.target_area.expect("validated");
    let opts = optimizer(cfg, area);
    let init = initial_shape(cfg, radius_of_area(area), s.seed)?;
    let mut out = Outcome::default();
    match minimize_area_constrained(&s.model, &s.lag, &opts, &init) {
        Ok(rep) => {
            out.extend(&summary(&rep));
            out.table = Some(Table::from_records(&rep.history));
            out.summary.push(format!(
                "H_L = {}  E = {}  iterations = {}  converged = {}",
                rep.report.h_l, rep.report.hawking_energy, rep.iterations, rep.converged
            ));
            if !rep.converged {
                out.fail(format!(
                    "no convergence within {} iterations",
                    opts.max_iters
                ));
            }
            out.shapes.push(("shape.txt".into(), rep.shape));
        }
        Err(e) => {
            let e = classify_run(e, &mut out)?;
            out.fail(e);
        }
    }
    Ok(out)
}

/// Keeps the last iterate of a failed run and turns the error into a message;
/// validation errors propagate.
fn classify_run(e: Error, out: &mut Outcome) -> Result<String, CliError> {
    if let Some(last) = failed_shape(&e) {
        out.shapes.push(("shape.txt".into(), last));
    }
    classify_message(e)
}

fn scan(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let areas = cfg.command.areas.clone().expect("validated");
    let opts = optimizer(cfg, areas[0]);
    let init = initial_shape(cfg, radius_of_area(areas[0]), s.seed)?;
    let entries = area_scan(&s.model, &s.lag, &areas, &opts, &init).map_err(classify)?;
    let mut out = Outcome::default();
    let mut table = Table::default();
    let mut runs = Vec::new();
    for (i, e) in entries.into_iter().enumerate() {
        let mut fields = vec![
            ("area".to_string(), e.area.to_string()),
            ("restarted".into(), e.restarted.to_string()),
        ];
        match e.result {
            Ok(rep) => {
                let sm = summary(&rep);
                fields.push((
                    "status".into(),
                    if rep.converged { "ok" } else { "not-converged" }.into(),
                ));
                fields.extend(flatten(&sm));
                runs.push(serde_json::to_value(&sm).expect("serializes"));
                if !rep.converged {
                    out.fail(format!("area {} did not converge", e.area));
                }
                out.summary.push(format!(
                    "area {}: H_L = {}  E = {}",
                    e.area, rep.report.h_l, rep.report.hawking_energy
                ));
                out.shapes.push((format!("shape_{i}.txt"), rep.shape));
            }
            Err(err) => {
                fields.push(("status".into(), "failed".into()));
                runs.push(serde_json::Value::from(err.to_string()));
                out.fail(format!("area {}: {err}", e.area));
            }
        }
        if table.columns.len() < fields.len() {
            // The first successful row fixes the columns.
            let mut t = Table {
                columns: fields.iter().map(|(k, _)| k.clone()).collect(),
                rows: Vec::new(),
            };
            for r in &table.rows {
                t.rows.push(
                    t.columns
                        .iter()
                        .enumerate()
                        .map(|(j, _)| r.get(j).cloned().unwrap_or_default())
                        .collect(),
                );
            }
            table = t;
        }
        table.push(fields);
    }
    out.insert("areas", &areas);
    out.insert("runs", &runs);
    out.table = Some(table);
    Ok(out)
}

fn expand(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let c = &cfg.command;
    let radii = c.radii.clone().expect("validated");
    let point = c.point.expect("validated");
    let opts = ExpansionOptions {
        l_max: cfg.surface.l_max,
        n_theta: n_theta(cfg),
        use_minimizers: c.use_minimizers.unwrap_or(false),
        optimizer: optimizer(cfg, 1.0),
    };
    let rep = expansion_check(&s.model, point, &radii, &s.lag, &opts).map_err(classify)?;
    let mut out = Outcome::default();
    let e3 = rep.energy_fit.coefficient(3).unwrap_or(f64::NAN);
    let h2 = rep.h_l_fit.coefficient(2).unwrap_or(f64::NAN);
    let mut table = Table::default();
    for row in &rep.rows {
        let r = row.radius;
        let mut fields = flatten(row);
        fields.extend([
            (
                "energy_predicted".to_string(),
                (rep.predicted_energy_c3 * r.powi(3)).to_string(),
            ),
            (
                "energy_fitted".into(),
                rep.energy_fit.predict(r).to_string(),
            ),
            (
                "h_l_predicted".into(),
                (4.0 * PI + rep.predicted_h_l_c2 * r * r).to_string(),
            ),
            ("h_l_fitted".into(), rep.h_l_fit.predict(r).to_string()),
            (
                "energy_c3_predicted".into(),
                rep.predicted_energy_c3.to_string(),
            ),
            ("energy_c3_fitted".into(), e3.to_string()),
            ("h_l_c2_predicted".into(), rep.predicted_h_l_c2.to_string()),
            ("h_l_c2_fitted".into(), h2.to_string()),
        ]);
        table.push(fields);
    }
    out.insert("point", &rep.point);
    out.insert("use_minimizers", &rep.use_minimizers);
    for (k, v) in [
        ("scalar", rep.scalar),
        ("phi", rep.phi),
        ("c_l", rep.c_l),
        ("predicted_energy_c3", rep.predicted_energy_c3),
        ("fitted_energy_c3", e3),
        ("energy_ratio", rep.energy_ratio),
        ("predicted_h_l_c2", rep.predicted_h_l_c2),
        ("fitted_h_l_c2", h2),
        ("h_l_ratio", rep.h_l_ratio),
        ("h_l_c0_defect", rep.h_l_c0_defect),
        ("max_pinching", rep.max_pinching),
    ] {
        out.insert(k, &v);
    }
    out.insert("energy_fit", &rep.energy_fit);
    out.insert("h_l_fit", &rep.h_l_fit);
    out.summary.push(format!(
        "E: c3 fitted {e3}  predicted {}  |  H_L: c2 fitted {h2}  predicted {}",
        rep.predicted_energy_c3, rep.predicted_h_l_c2
    ));
    out.table = Some(table);
    Ok(out)
}

fn moments(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let c = &cfg.command;
    let point = c.point.expect("validated");
    let rows =
        identity_suite(&s.model, point, c.draws.expect("validated"), s.seed).map_err(classify)?;
    let mut out = Outcome::default();
    for r in &rows {
        out.summary.push(format!(
            "{}  {:<60} exact {:.3e}  quadrature {:.3e}",
            if r.pass { "pass" } else { "FAIL" },
            r.name,
            r.max_err_exact,
            r.max_err_quadrature
        ));
        if !r.pass {
            out.fail(format!("identity failed: {}", r.name));
        }
    }
    out.insert("point", &point);
    out.insert("all_pass", &rows.iter().all(|r| r.pass));
    out.insert("rows", &rows);
    match concentration_vectors(&s.lag, &s.model, point) {
        Ok(v) => out.insert("concentration_vectors", &v),
        Err(e) => out.fail(classify_message(e)?),
    }
    out.table = Some(Table::from_records(&rows));
    Ok(out)
}

fn classify_message(e: Error) -> Result<String, CliError> {
    match classify(e) {
        CliError::Numerical(msg) => Ok(msg),
        other => Err(other),
    }
}

fn concentrate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let c = &cfg.command;
    let areas = c.areas.clone().expect("validated");
    let fgrid = config::field_grid(c.field.as_ref().expect("validated"));
    let opts = optimizer(cfg, areas[0]);
    let init = initial_shape(cfg, radius_of_area(areas[0]), s.seed)?;
    let field = concentration_field(&s.model, &fgrid).map_err(classify)?;
    let rep = concentration_experiment(&s.model, &s.lag, &areas, &opts, &init, &fgrid)
        .map_err(classify)?;
    let mut out = Outcome::default();
    out.insert("lagrangian", &rep.lagrangian);
    out.insert("critical_points", &rep.critical_points);
    out.insert("degenerate", &rep.degenerate);
    out.insert("target", &rep.target);
    out.insert("monotone", &rep.monotone);
    out.insert("phi_critical", &field.phi_critical);
    out.insert("rho_critical", &field.rho_critical);
    out.insert("phi_degenerate", &field.phi_degenerate);
    out.insert("rho_degenerate", &field.rho_degenerate);
    out.insert("coincide", &field.coincide);
    for r in &rep.rows {
        out.summary.push(format!(
            "area {}: distance {}  converged {}",
            r.area, r.distance, r.converged
        ));
        if !r.converged {
            out.fail(format!("area {} did not converge", r.area));
        }
    }
    if rep.rows.len() < areas.len() {
        out.fail(format!(
            "only {} of {} areas produced a minimizer",
            rep.rows.len(),
            areas.len()
        ));
    }
    out.table = Some(Table::from_records(&rep.rows));
    let mut ft = Table::default();
    for ((p, phi), rho) in field.points.iter().zip(&field.phi).zip(&field.rho_energy) {
        ft.push(vec![
            ("x".into(), p[0].to_string()),
            ("y".into(), p[1].to_string()),
            ("z".into(), p[2].to_string()),
            ("phi".into(), phi.to_string()),
            ("rho_energy".into(), rho.to_string()),
        ]);
    }
    out.extra_tables.push(("field.csv".into(), ft));
    Ok(out)
}

fn check_variation(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let c = &cfg.command;
    let step = c.step.expect("validated");
    let tol = c.tolerance.expect("validated");
    let shape = initial_shape(cfg, 1.0, s.seed)?;
    let grid = grid(cfg)?;
    let geom = embed(&shape, &s.model, &grid).map_err(classify)?;
    let mut out = Outcome::default();
    let mut table = Table::default();
    let mut reports = Vec::new();
    for spec in c.speeds.as_ref().expect("validated") {
        let speed = config::parse_speed(spec)?;
        match fd_check(&shape, &s.model, &grid, &speed, &s.lag, step) {
            Ok(rep) => {
                let pass = rep.max_rel_err() <= tol;
                out.summary.push(format!(
                    "{}  {:<28} max rel err {:.3e}",
                    if pass { "pass" } else { "FAIL" },
                    spec,
                    rep.max_rel_err()
                ));
                if !pass {
                    out.fail(format!(
                        "{spec}: relative error {:e} exceeds {tol:e}",
                        rep.max_rel_err()
                    ));
                }
                let mut fields = vec![
                    ("speed".to_string(), spec.clone()),
                    ("pass".into(), pass.to_string()),
                ];
                fields.extend(flatten(&rep).into_iter().filter(|(k, _)| k != "f_spec"));
                table.push(fields);
                reports.push(rep);
            }
            Err(e) => {
                let msg = classify_message(e)?;
                out.summary.push(format!("FAIL  {spec:<28} {msg}"));
                out.fail(format!("{spec}: {msg}"));
            }
        }
    }
    out.insert("tolerance", &tol);
    out.insert("functionals", &evaluate_functionals(&geom, &s.lag));
    out.insert("variations", &reports);
    match lagrange_multiplier(&geom, &s.model, &s.lag) {
        Ok(m) => out.insert("multiplier", &m),
        Err(e) => out.insert("multiplier", &format!("unavailable: {e}")),
    }
    out.table = Some(table);
    out.shapes.push(("shape.txt".into(), shape));
    Ok(out)
}
