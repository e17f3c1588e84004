//! Area-constrained minimization of `H_L` over radial-graph spheres.
//!
//! The `l = 1` coefficients are moved into the shape center once and then
//! held at zero; the center itself carries the three translation degrees of
//! freedom, so translations stay rigid at any step size. Descent on the
//! remaining coefficients is preconditioned by the Willmore Hessian of the
//! round sphere, `½(l-1)l(l+1)(l+2)/R²`; the center block uses a secant
//! curvature estimate. Each trial point is rescaled to the target area before
//! the Armijo test.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ambient::{adapted_normal_chart, ManifoldModel};
use crate::error::{Error, Result};
use crate::functionals::{el_operator, evaluate_functionals, FunctionalReport, LagrangianSpec};
use crate::surface::{
    embed, sh_count, sh_degree_order, QuadratureGrid, SurfaceGeometry, SurfaceShape,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    pub target_area: f64,
    pub max_iters: usize,
    /// Bound on the projected gradient, measured as the `L²(dμ)` norm of the
    /// band-limited Euler–Lagrange residual.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub shrink: f64,
    pub max_line_search: usize,
    pub area_restore_tol: f64,
    /// Quadrature rings; `None` picks `2 l_max + 6`.
    pub n_theta: Option<usize>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            target_area: 4.0 * PI,
            max_iters: 500,
            grad_tol: 1e-7,
            armijo_c: 1e-4,
            shrink: 0.5,
            max_line_search: 60,
            area_restore_tol: 1e-12,
            n_theta: None,
        }
    }
}

impl OptimizerOptions {
    pub fn new(target_area: f64) -> Self {
        Self {
            target_area,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("target_area", self.target_area),
            ("grad_tol", self.grad_tol),
            ("armijo_c", self.armijo_c),
            ("area_restore_tol", self.area_restore_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidInput(format!(
                "shrink must lie in (0, 1), got {}",
                self.shrink
            )));
        }
        if self.max_line_search == 0 {
            return Err(Error::InvalidInput(
                "max_line_search must be positive".into(),
            ));
        }
        Ok(())
    }

    fn grid(&self, l_max: usize) -> Result<Arc<QuadratureGrid>> {
        let n = self.n_theta.unwrap_or(2 * l_max + 6);
        if n < l_max + 1 {
            return Err(Error::InvalidInput(format!(
                "n_theta = {n} cannot resolve l_max = {l_max}"
            )));
        }
        Ok(Arc::new(QuadratureGrid::new(n)?))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HistoryEntry {
    pub iter: usize,
    pub h_l: f64,
    /// `(A - target) / target`.
    pub area_defect: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalSurfaceReport {
    pub shape: SurfaceShape,
    pub report: FunctionalReport,
    /// Least-squares multiplier.
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<HistoryEntry>,
    /// Center of the adapted normal chart, when the chart fits.
    pub p0: Option<[f64; 3]>,
    /// `‖Å‖_{L²}`.
    pub traceless_l2: f64,
    /// `max |H - 2/R|` with `R = √(A/4π)`.
    pub mean_curvature_deviation: f64,
}

/// `√(3/4π)`: `Y_1m` components of a unit translation.
fn translation_factor() -> f64 {
    (3.0 / (4.0 * PI)).sqrt()
}

/// `(x, y, z)` order of the `l = 1` coefficients.
const L1: [i64; 3] = [1, -1, 0];

fn is_translation_mode(i: usize) -> bool {
    (1..4).contains(&i)
}

/// Optimization variables are the coefficients with `l ≠ 1` followed by the
/// three center coordinates; the `l = 1` coefficients are gauge-fixed.
struct Iterate {
    shape: SurfaceShape,
    geom: SurfaceGeometry,
    h_l: f64,
    /// `∂H_L/∂a_lm` for every coefficient, `l = 1` included.
    coeff_grad: Vec<f64>,
    coeff_area_grad: Vec<f64>,
    grad: Vec<f64>,
    area_grad: Vec<f64>,
}

impl Iterate {
    fn new(
        shape: SurfaceShape,
        model: &ManifoldModel,
        lag: &LagrangianSpec,
        grid: &Arc<QuadratureGrid>,
    ) -> Result<Self> {
        let geom = embed(&shape, model, grid)?;
        let h_l = geom.integrate(|n| 0.25 * n.mean_curvature * n.mean_curvature + lag.at(n));
        let op = el_operator(&geom, lag);
        // ∂H_L/∂a_lm = ∫ Y_lm g(ω,ν) (-½E) dμ and ∂A/∂a_lm = ∫ Y_lm g(ω,ν) H dμ;
        // a center shift e_i has normal speed g(e_i, ν).
        let per_weight = |v: &dyn Fn(usize) -> f64| -> Vec<f64> {
            geom.nodes
                .iter()
                .enumerate()
                .map(|(q, n)| v(q) * n.radial_normal * n.dmu / grid.weights[q])
                .collect()
        };
        let coeff_grad = grid.analyze(&per_weight(&|q| -0.5 * op[q]), shape.l_max)?;
        let coeff_area_grad =
            grid.analyze(&per_weight(&|q| geom.nodes[q].mean_curvature), shape.l_max)?;
        let center = |v: &dyn Fn(usize) -> f64| -> [f64; 3] {
            std::array::from_fn(|i| {
                geom.nodes
                    .iter()
                    .enumerate()
                    .map(|(q, n)| v(q) * n.normal_flat[i] * n.dmu)
                    .sum()
            })
        };
        let gc = center(&|q| -0.5 * op[q]);
        let nc = center(&|q| geom.nodes[q].mean_curvature);
        let gauge = |v: &[f64], c: [f64; 3]| -> Vec<f64> {
            let mut out: Vec<f64> = v
                .iter()
                .enumerate()
                .map(|(i, x)| if is_translation_mode(i) { 0.0 } else { *x })
                .collect();
            out.extend(c);
            out
        };
        let grad = gauge(&coeff_grad, gc);
        let area_grad = gauge(&coeff_area_grad, nc);
        Ok(Self {
            shape,
            geom,
            h_l,
            coeff_grad,
            coeff_area_grad,
            grad,
            area_grad,
        })
    }

    fn radius(&self) -> f64 {
        (self.geom.area / (4.0 * PI)).sqrt()
    }

    /// `L²(dμ)` norm of the band-limited residual `E + 2λH`, from the full
    /// coefficient gradient with its area-normal part removed.
    fn grad_norm(&self) -> f64 {
        let (g, n) = (&self.coeff_grad, &self.coeff_area_grad);
        let mu = dot(g, n) / dot(n, n);
        let r2: f64 = g.iter().zip(n).map(|(g, n)| (g - mu * n).powi(2)).sum();
        r2.sqrt() * 2.0 / self.radius()
    }

    /// Multiplier fitted on the coefficient block. A translation changes the
    /// area only at the order of the ambient curvature, so the center block
    /// is left out of the fit.
    fn multiplier(&self) -> f64 {
        let n = self.grad.len() - 3;
        dot(&self.grad[..n], &self.area_grad[..n]) / dot(&self.area_grad[..n], &self.area_grad[..n])
    }

    /// Gradient of the area-restored functional, `∇H_L - μ∇A`.
    fn reduced(&self) -> Vec<f64> {
        let mu = self.multiplier();
        self.grad
            .iter()
            .zip(&self.area_grad)
            .map(|(g, n)| g - mu * n)
            .collect()
    }

    fn stepped(&self, dir: &[f64], t: f64) -> SurfaceShape {
        let mut s = self.shape.clone();
        let n = s.coeffs.len();
        for (a, d) in s.coeffs.iter_mut().zip(&dir[..n]) {
            *a += t * d;
        }
        for i in 0..3 {
            s.center[i] += t * dir[n + i];
        }
        s
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rescales `ρ` about the center until the area matches `target`.
fn restore_area(
    shape: &SurfaceShape,
    model: &ManifoldModel,
    lag: &LagrangianSpec,
    grid: &Arc<QuadratureGrid>,
    target: f64,
    tol: f64,
) -> Result<Iterate> {
    let mut s = shape.clone();
    for _ in 0..50 {
        let geom = embed(&s, model, grid)?;
        let defect = (geom.area - target) / target;
        if defect.abs() <= tol {
            return Iterate::new(s, model, lag, grid);
        }
        s = s.scaled((target / geom.area).sqrt());
    }
    Err(Error::NoConvergence {
        what: "area restoration",
        iterations: 50,
    })
}

/// Moves the `l = 1` content of `shape` into its center.
pub fn remove_translation_modes(
    shape: &SurfaceShape,
    grid: &QuadratureGrid,
) -> Result<SurfaceShape> {
    let mut s = shape.clone();
    if s.l_max == 0 {
        return Ok(s);
    }
    let k = translation_factor();
    for _ in 0..20 {
        let shift: [f64; 3] = std::array::from_fn(|i| s.coeff(1, L1[i]) * k);
        if shift.iter().all(|v| v.abs() <= 1e-15 * s.mean_radius()) {
            break;
        }
        s = s.recentered(std::array::from_fn(|i| s.center[i] + shift[i]), grid)?;
    }
    for m in L1 {
        s.set_coeff(1, m, 0.0);
    }
    Ok(s)
}

fn preconditioner(l_max: usize, radius: f64, hc: f64) -> Vec<f64> {
    let h2 = 12.0 / (radius * radius);
    let mut p: Vec<f64> = (0..sh_count(l_max))
        .map(|i| match sh_degree_order(i).0 {
            0 => h2,
            1 => f64::INFINITY,
            l => {
                let l = l as f64;
                0.5 * (l - 1.0) * l * (l + 1.0) * (l + 2.0) / (radius * radius)
            }
        })
        .collect();
    p.extend([hc; 3]);
    p
}

/// Projected, preconditioned descent on `H_L` at fixed area.
pub fn minimize_area_constrained(
    model: &ManifoldModel,
    lag: &LagrangianSpec,
    opts: &OptimizerOptions,
    init: &SurfaceShape,
) -> Result<CriticalSurfaceReport> {
    opts.validate()?;
    let grid = opts.grid(init.l_max)?;
    let target = opts.target_area;
    let tol = opts.area_restore_tol;
    let shape_err = |iteration: usize, e: Error, last: &SurfaceShape| Error::Shape {
        iteration,
        reason: e.to_string(),
        last: Box::new(last.clone()),
    };
    let start = remove_translation_modes(init, &grid)
        .and_then(|s| restore_area(&s, model, lag, &grid, target, tol))
        .map_err(|e| shape_err(0, e, init))?;
    let mut it = start;
    // Curvature of H_L along center translations; starts stiff and is
    // updated by secant pairs.
    let mut hc = 12.0 / (it.radius() * it.radius() * translation_factor().powi(2));
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let slack = 1e-12;
    loop {
        let grad_norm = it.grad_norm();
        let defect = (it.geom.area - target) / target;
        let entry = |step: f64| HistoryEntry {
            iter: iterations,
            h_l: it.h_l,
            area_defect: defect,
            grad_norm,
            step,
        };
        if grad_norm <= opts.grad_tol {
            converged = true;
            history.push(entry(0.0));
            break;
        }
        if iterations >= opts.max_iters {
            history.push(entry(0.0));
            break;
        }
        let radius = it.radius();
        let reduced = it.reduced();
        let p = preconditioner(it.shape.l_max, radius, hc);
        let dir: Vec<f64> = reduced.iter().zip(&p).map(|(g, h)| -g / h).collect();
        let slope = dot(&reduced, &dir);
        // Cap the RMS radial change of a trial step at a fifth of the radius.
        let n = it.shape.coeffs.len();
        let rms = (dot(&dir[..n], &dir[..n]) / (4.0 * PI)).sqrt();
        let mut t = (0.2 * radius / rms).min(1.0);
        let mut accepted = None;
        let mut attempts = 0;
        while attempts < opts.max_line_search {
            attempts += 1;
            if let Ok(next) = restore_area(&it.stepped(&dir, t), model, lag, &grid, target, tol) {
                if next.h_l <= it.h_l + opts.armijo_c * t * slope + slack * it.h_l.abs().max(1.0) {
                    accepted = Some(next);
                    break;
                }
            }
            t *= opts.shrink;
        }
        let Some(next) = accepted else {
            return Err(Error::Stall {
                iteration: iterations,
                attempts,
                last: Box::new(it.shape),
            });
        };
        history.push(entry(t));
        iterations += 1;
        let (k, reduced_next) = (reduced.len() - 3, next.reduced());
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..3 {
            let s = next.shape.center[i] - it.shape.center[i];
            let y = reduced_next[k + i] - reduced[k + i];
            ss += s * s;
            sy += s * y;
        }
        if ss > 0.0 {
            let stiff = 12.0 / (radius * radius * translation_factor().powi(2));
            // Negative curvature along the step: lengthen the next one.
            let estimate = if sy > 0.0 { sy / ss } else { 0.1 * hc };
            hc = estimate.clamp(1e-12 * stiff, 10.0 * stiff);
        }
        it = next;
    }
    let report = evaluate_functionals(&it.geom, lag);
    let p0 = adapted_normal_chart(model, &it.geom).ok().map(|c| c.p0);
    let radius = it.radius();
    let traceless_l2 = it.geom.integrate(|n| n.traceless_norm2).sqrt();
    let mean_curvature_deviation = it
        .geom
        .nodes
        .iter()
        .map(|n| (n.mean_curvature - 2.0 / radius).abs())
        .fold(0.0, f64::max);
    Ok(CriticalSurfaceReport {
        lambda: report.lambda,
        shape: it.shape,
        report,
        iterations,
        converged,
        history,
        p0,
        traceless_l2,
        mean_curvature_deviation,
    })
}

/// One run of [`area_scan`].
#[derive(Debug)]
pub struct ScanEntry {
    pub area: f64,
    pub result: Result<CriticalSurfaceReport>,
    /// Whether this run started from a fresh round sphere after a failure.
    pub restarted: bool,
}

/// Minimizers for decreasing areas, each warm-started from the previous
/// minimizer rescaled to the new area.
pub fn area_scan(
    model: &ManifoldModel,
    lag: &LagrangianSpec,
    areas: &[f64],
    opts: &OptimizerOptions,
    init: &SurfaceShape,
) -> Result<Vec<ScanEntry>> {
    if areas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput(
            "scan areas must be strictly decreasing".into(),
        ));
    }
    let mut out = Vec::with_capacity(areas.len());
    let mut start = init.clone();
    let mut previous_area: Option<f64> = None;
    let mut restart = false;
    for &area in areas {
        let warm = match previous_area {
            Some(prev) if !restart => start.scaled((area / prev).sqrt()),
            _ => {
                let r = (area / (4.0 * PI)).sqrt();
                if previous_area.is_some() {
                    SurfaceShape::round(start.center, r, init.l_max)
                } else {
                    start.clone()
                }
            }
        };
        let run = minimize_area_constrained(
            model,
            lag,
            &OptimizerOptions {
                target_area: area,
                ..opts.clone()
            },
            &warm,
        );
        let restarted = restart;
        match &run {
            Ok(rep) => {
                start = rep.shape.clone();
                restart = false;
            }
            Err(_) => {
                start = warm;
                restart = true;
            }
        }
        previous_area = Some(area);
        out.push(ScanEntry {
            area,
            result: run,
            restarted,
        });
    }
    Ok(out)
}

/// Round sphere plus Gaussian coefficients in bands `1..=noise_band`, scaled
/// so the RMS radial perturbation is `noise · radius`.
pub fn noisy_round<R: Rng + ?Sized>(
    center: [f64; 3],
    radius: f64,
    l_max: usize,
    noise: f64,
    noise_band: usize,
    rng: &mut R,
) -> SurfaceShape {
    let mut s = SurfaceShape::round(center, radius, l_max);
    let band = noise_band.min(l_max);
    let count = sh_count(band) - 1;
    let scale = noise * radius * (4.0 * PI / count as f64).sqrt();
    for i in 1..sh_count(band) {
        let z: f64 = rng.sample(StandardNormal);
        s.coeffs[i] = scale * z;
    }
    s
}
