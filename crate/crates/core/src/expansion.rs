//! Small-sphere expansions of the Hawking energy and `H_L`, critical points
//! of the concentration potential, and the concentration experiment.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::{adapted_normal_chart, ManifoldModel};
use crate::error::{Error, Result};
use crate::functionals::{evaluate_functionals, LagrangianSpec};
use crate::moments::{c_moment, FrameData};
use crate::optimizer::{area_scan, CriticalSurfaceReport, OptimizerOptions};
use crate::surface::{embed, QuadratureGrid, SurfaceShape};

/// Coordinate sphere of radius `r` about `p`. In normal coordinates at `p`
/// it agrees with the geodesic sphere up to `O(r³)`.
pub fn geodesic_sphere_shape(
    model: &ManifoldModel,
    p: [f64; 3],
    r: f64,
    l_max: usize,
) -> Result<SurfaceShape> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "radius must be positive, got {r}"
        )));
    }
    model.check_domain(p)?;
    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let u = if norm > 0.0 {
        p.map(|v| v / norm)
    } else {
        [1.0, 0.0, 0.0]
    };
    for s in [r, -r] {
        model.check_domain(std::array::from_fn(|i| p[i] + s * u[i]))?;
    }
    Ok(SurfaceShape::round(p, r, l_max))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionFit {
    /// `(R, value)` pairs.
    pub samples: Vec<(f64, f64)>,
    pub powers: Vec<i32>,
    pub coefficients: Vec<f64>,
    /// RMS of the fit residuals.
    pub residual: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
    /// Extra power added because the residual exceeded round-off.
    pub nuisance: Option<i32>,
}

impl ExpansionFit {
    pub fn coefficient(&self, power: i32) -> Option<f64> {
        self.powers
            .iter()
            .position(|p| *p == power)
            .map(|i| self.coefficients[i])
    }

    pub fn predict(&self, r: f64) -> f64 {
        self.powers
            .iter()
            .zip(&self.coefficients)
            .map(|(p, c)| c * r.powi(*p))
            .sum()
    }
}

/// Least squares in the monomials `R^p`.
pub fn fit_expansion(samples: &[(f64, f64)], powers: &[i32]) -> Result<ExpansionFit> {
    if powers.is_empty() {
        return Err(Error::InvalidInput("no powers to fit".into()));
    }
    if samples.len() < powers.len() + 2 {
        return Err(Error::InvalidInput(format!(
            "{} samples cannot fit {} coefficients (need two spare)",
            samples.len(),
            powers.len()
        )));
    }
    if !samples
        .iter()
        .all(|(r, v)| *r > 0.0 && r.is_finite() && v.is_finite())
    {
        return Err(Error::InvalidInput(
            "samples need positive radii and finite values".into(),
        ));
    }
    let (n, m) = (samples.len(), powers.len());
    let mut a = DMatrix::from_fn(n, m, |i, j| samples[i].0.powi(powers[j]));
    let scale: Vec<f64> = (0..m).map(|j| a.column(j).norm()).collect();
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Fit("a design column vanishes".into()));
    }
    for (j, s) in scale.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let b = DVector::from_iterator(n, samples.iter().map(|s| s.1));
    let svd = a.clone().svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > 1e-12 * smax) {
        return Err(Error::Fit(format!("singular values {smax:e} .. {smin:e}")));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::Fit(e.to_string()))?;
    let residual = ((&a * &x - &b).norm_squared() / n as f64).sqrt();
    Ok(ExpansionFit {
        samples: samples.to_vec(),
        powers: powers.to_vec(),
        coefficients: x.iter().zip(&scale).map(|(x, s)| x / s).collect(),
        residual,
        condition: smax / smin,
        nuisance: None,
    })
}

/// [`fit_expansion`], refitted with `R^nuisance` when the residual exceeds ten
/// times round-off and enough samples remain.
pub fn fit_with_nuisance(
    samples: &[(f64, f64)],
    powers: &[i32],
    nuisance: i32,
) -> Result<ExpansionFit> {
    let fit = fit_expansion(samples, powers)?;
    let size = samples.iter().fold(0.0_f64, |m, s| m.max(s.1.abs()));
    if fit.residual <= 10.0 * f64::EPSILON * size
        || samples.len() < powers.len() + 3
        || powers.contains(&nuisance)
    {
        return Ok(fit);
    }
    let mut extended = powers.to_vec();
    extended.push(nuisance);
    let mut refit = fit_expansion(samples, &extended)?;
    refit.nuisance = Some(nuisance);
    Ok(refit)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionOptions {
    pub l_max: usize,
    pub n_theta: usize,
    /// Use area-constrained minimizers of area `4πr²` instead of coordinate spheres.
    pub use_minimizers: bool,
    pub optimizer: OptimizerOptions,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self {
            l_max: 6,
            n_theta: 18,
            use_minimizers: false,
            optimizer: OptimizerOptions::default(),
        }
    }
}

/// Default radii ladder.
pub const DEFAULT_RADII: [f64; 6] = [0.04, 0.028, 0.02, 0.014, 0.01, 0.007];

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionRow {
    pub requested_radius: f64,
    /// Area radius `√(|Σ|/4π)`, the fit variable.
    pub radius: f64,
    pub area: f64,
    pub center: [f64; 3],
    pub hawking_energy: f64,
    pub willmore: f64,
    pub h_l: f64,
    pub traceless_l2_sq: f64,
    /// `‖Å‖² / (r|Σ|)`.
    pub pinching: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub point: [f64; 3],
    pub lagrangian: LagrangianSpec,
    pub use_minimizers: bool,
    pub rows: Vec<ExpansionRow>,
    pub energy_fit: ExpansionFit,
    pub h_l_fit: ExpansionFit,
    pub scalar: f64,
    pub phi: f64,
    /// `c(L, p)`, the zeroth c-moment.
    pub c_l: f64,
    /// `Φ/12`.
    pub predicted_energy_c3: f64,
    /// `-(2π/3)Sc + c(L, p)`.
    pub predicted_h_l_c2: f64,
    pub energy_ratio: f64,
    pub h_l_ratio: f64,
    /// Fitted `c₀ - 4π` of the `H_L` expansion.
    pub h_l_c0_defect: f64,
    pub max_pinching: f64,
}

fn row(
    requested_radius: f64,
    shape: &SurfaceShape,
    model: &ManifoldModel,
    lag: &LagrangianSpec,
    grid: &Arc<QuadratureGrid>,
) -> Result<ExpansionRow> {
    let geom = embed(shape, model, grid)?;
    let rep = evaluate_functionals(&geom, lag);
    let traceless_l2_sq = geom.integrate(|n| n.traceless_norm2);
    Ok(ExpansionRow {
        requested_radius,
        radius: rep.radius,
        area: rep.area,
        center: shape.center,
        hawking_energy: rep.hawking_energy,
        willmore: rep.willmore,
        h_l: rep.h_l,
        traceless_l2_sq,
        pinching: traceless_l2_sq / (requested_radius * rep.area),
    })
}

/// Evaluates `E` and `H_L` over a ladder of radii about `p`, fits
/// `c₀ + c₂R² + c₃R³ (+ c₄R⁴)` and compares with the predicted coefficients.
pub fn expansion_check(
    model: &ManifoldModel,
    p: [f64; 3],
    radii: &[f64],
    lag: &LagrangianSpec,
    opts: &ExpansionOptions,
) -> Result<ExpansionReport> {
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput(
            "radii must be strictly decreasing".into(),
        ));
    }
    let grid = Arc::new(QuadratureGrid::new(opts.n_theta)?);
    let rows: Vec<ExpansionRow> = if opts.use_minimizers {
        let areas: Vec<f64> = radii.iter().map(|r| 4.0 * PI * r * r).collect();
        let init = geodesic_sphere_shape(model, p, radii[0], opts.l_max)?;
        let scan_opts = OptimizerOptions {
            n_theta: Some(opts.n_theta),
            ..opts.optimizer.clone()
        };
        let scan = area_scan(model, lag, &areas, &scan_opts, &init)?;
        scan.into_iter()
            .zip(radii)
            .map(|(e, r)| {
                e.result
                    .and_then(|rep: CriticalSurfaceReport| row(*r, &rep.shape, model, lag, &grid))
            })
            .collect::<Result<_>>()?
    } else {
        radii
            .par_iter()
            .map(|r| {
                row(
                    *r,
                    &geodesic_sphere_shape(model, p, *r, opts.l_max)?,
                    model,
                    lag,
                    &grid,
                )
            })
            .collect::<Result<_>>()?
    };
    let powers = [0, 2, 3];
    let energy_fit = fit_with_nuisance(
        &rows
            .iter()
            .map(|r| (r.radius, r.hawking_energy))
            .collect::<Vec<_>>(),
        &powers,
        4,
    )?;
    let h_l_fit = fit_with_nuisance(
        &rows.iter().map(|r| (r.radius, r.h_l)).collect::<Vec<_>>(),
        &powers,
        4,
    )?;
    let scalar = model.curvature_at(p)?.scalar;
    let (phi, _) = model.concentration_potential(p)?;
    let c_l = c_moment(lag, &FrameData::at(model, p)?, &[])?;
    let predicted_energy_c3 = phi / 12.0;
    let predicted_h_l_c2 = -2.0 * PI / 3.0 * scalar + c_l;
    let coefficient = |f: &ExpansionFit, k| f.coefficient(k).unwrap_or(0.0);
    Ok(ExpansionReport {
        point: p,
        lagrangian: *lag,
        use_minimizers: opts.use_minimizers,
        max_pinching: rows.iter().map(|r| r.pinching).fold(0.0, f64::max),
        energy_ratio: coefficient(&energy_fit, 3) / predicted_energy_c3,
        h_l_ratio: coefficient(&h_l_fit, 2) / predicted_h_l_c2,
        h_l_c0_defect: coefficient(&h_l_fit, 0) - 4.0 * PI,
        rows,
        energy_fit,
        h_l_fit,
        scalar,
        phi,
        c_l,
        predicted_energy_c3,
        predicted_h_l_c2,
    })
}

/// `Φ_L = Sc - (3/2π) c(L, ·)` and its gradient. Small critical surfaces have
/// `H_L ≈ 4π - (2π/3)R²Φ_L`; for `L = -¼P²` this is
/// `Sc + (3/5)(tr K)² + (1/5)|K|²`, for `L = 0` it is `Sc`.
pub fn lagrangian_potential(
    model: &ManifoldModel,
    lag: &LagrangianSpec,
    x: [f64; 3],
) -> Result<(f64, [f64; 3])> {
    // c(L) = 4π(α + c₀/3 + β/15)(tr K)² + (8π/15)β|K|² + 4πcₜ.
    let w_tr = -6.0 * (lag.alpha + lag.c0 / 3.0 + lag.beta / 15.0);
    let w_norm = -0.8 * lag.beta;
    let (v, g) = model.invariant_combination(x, 1.0, w_tr, w_norm)?;
    Ok((v - 6.0 * lag.ct, g))
}

/// Cubic sampling box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldGrid {
    pub center: [f64; 3],
    pub half_width: f64,
    /// Points per axis.
    pub n: usize,
}

impl FieldGrid {
    pub fn points(&self) -> Vec<[f64; 3]> {
        let h = self.spacing();
        let mut out = Vec::with_capacity(self.n.pow(3));
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    let o = [i, j, k].map(|v| v as f64 * h - self.half_width);
                    out.push(std::array::from_fn(|a| self.center[a] + o[a]));
                }
            }
        }
        out
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 || !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidInput(
                "field grid needs n >= 3 and a positive half width".into(),
            ));
        }
        Ok(())
    }

    fn contains(&self, x: [f64; 3]) -> bool {
        let margin = self.half_width + self.spacing();
        (0..3).all(|i| (x[i] - self.center[i]).abs() <= margin)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CriticalKind {
    Maximum,
    Minimum,
    Saddle,
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalPoint {
    pub point: [f64; 3],
    pub value: f64,
    pub gradient_norm: f64,
    /// Ascending.
    pub hessian_eigenvalues: [f64; 3],
    pub kind: CriticalKind,
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm3(std::array::from_fn(|i| a[i] - b[i]))
}

const GRADIENT_TOL: f64 = 1e-10;
const HESSIAN_STEP: f64 = 1e-5;

fn hessian<F>(f: &F, x: [f64; 3]) -> Result<Matrix3<f64>>
where
    F: Fn([f64; 3]) -> Result<(f64, [f64; 3])>,
{
    let mut h = Matrix3::zeros();
    for j in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[j] += HESSIAN_STEP;
        xm[j] -= HESSIAN_STEP;
        let (gp, gm) = (f(xp)?.1, f(xm)?.1);
        for i in 0..3 {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * HESSIAN_STEP);
        }
    }
    Ok((h + h.transpose()) * 0.5)
}

fn newton<F>(f: &F, seed: [f64; 3], box_: &FieldGrid) -> Option<CriticalPoint>
where
    F: Fn([f64; 3]) -> Result<(f64, [f64; 3])>,
{
    let max_step = 2.0 * box_.spacing();
    let mut x = seed;
    for _ in 0..60 {
        let (_, g) = f(x).ok()?;
        if norm3(g) <= GRADIENT_TOL {
            break;
        }
        let h = hessian(f, x).ok()?;
        let step = h.lu().solve(&nalgebra::Vector3::from(g))?;
        let len = step.norm();
        let s = if len > max_step { max_step / len } else { 1.0 };
        x = std::array::from_fn(|i| x[i] - s * step[i]);
        if !box_.contains(x) {
            return None;
        }
    }
    let (value, g) = f(x).ok()?;
    if norm3(g) > 1e-8 {
        return None;
    }
    let eig = SymmetricEigen::new(hessian(f, x).ok()?).eigenvalues;
    let mut ev = [eig[0], eig[1], eig[2]];
    ev.sort_by(f64::total_cmp);
    let tol = 1e-6 * ev.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let kind = if ev.iter().any(|v| v.abs() <= tol) {
        CriticalKind::Degenerate
    } else if ev[2] < 0.0 {
        CriticalKind::Maximum
    } else if ev[0] > 0.0 {
        CriticalKind::Minimum
    } else {
        CriticalKind::Saddle
    };
    Some(CriticalPoint {
        point: x,
        value,
        gradient_norm: norm3(g),
        hessian_eigenvalues: ev,
        kind,
    })
}

/// Critical points seeded from grid nodes where `|∇f|` is locally minimal.
/// Returns `None` when `f` is constant on the grid.
fn critical_points<F>(
    f: &F,
    box_: &FieldGrid,
    samples: &[(f64, [f64; 3])],
) -> Option<Vec<CriticalPoint>>
where
    F: Fn([f64; 3]) -> Result<(f64, [f64; 3])>,
{
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.0), hi.max(s.0))
        });
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return None;
    }
    let n = box_.n;
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let points = box_.points();
    let mut found: Vec<CriticalPoint> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let here = norm3(samples[idx(i, j, k)].1);
                let mut minimal = true;
                for (di, dj, dk) in (0..27).map(|c| (c / 9, (c / 3) % 3, c % 3)) {
                    let (a, b, c) = (i + di, j + dj, k + dk);
                    if (di, dj, dk) == (1, 1, 1)
                        || a == 0
                        || b == 0
                        || c == 0
                        || a > n
                        || b > n
                        || c > n
                    {
                        continue;
                    }
                    if norm3(samples[idx(a - 1, b - 1, c - 1)].1) < here {
                        minimal = false;
                        break;
                    }
                }
                if !minimal {
                    continue;
                }
                if let Some(cp) = newton(f, points[idx(i, j, k)], box_) {
                    if found.iter().all(|q| dist(q.point, cp.point) > 1e-6) {
                        found.push(cp);
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| b.value.total_cmp(&a.value));
    Some(found)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationField {
    pub grid: FieldGrid,
    pub points: Vec<[f64; 3]>,
    /// `Φ = Sc + (3/5)(tr K)² + (1/5)|K|²`.
    pub phi: Vec<f64>,
    /// `ρ = (Sc + (tr K)² - |K|²) / 16π`.
    pub rho_energy: Vec<f64>,
    /// Sorted by decreasing value.
    pub phi_critical: Vec<CriticalPoint>,
    pub rho_critical: Vec<CriticalPoint>,
    /// `Φ` is constant on the grid, so no critical points are isolated.
    pub phi_degenerate: bool,
    pub rho_degenerate: bool,
    /// Some critical point of `Φ` is also one of `ρ`.
    pub coincide: bool,
}

impl ConcentrationField {
    pub fn phi_maximum(&self) -> Option<&CriticalPoint> {
        self.phi_critical
            .iter()
            .find(|c| c.kind == CriticalKind::Maximum)
    }

    pub fn rho_maximum(&self) -> Option<&CriticalPoint> {
        self.rho_critical
            .iter()
            .find(|c| c.kind == CriticalKind::Maximum)
    }
}

fn sample<F>(f: &F, grid: &FieldGrid) -> Result<Vec<(f64, [f64; 3])>>
where
    F: Fn([f64; 3]) -> Result<(f64, [f64; 3])> + Sync,
{
    grid.points().par_iter().map(|x| f(*x)).collect()
}

/// Samples `Φ` and `ρ` on `grid` and refines their critical points by Newton.
pub fn concentration_field(model: &ManifoldModel, grid: &FieldGrid) -> Result<ConcentrationField> {
    grid.validate()?;
    let phi_f = |x| model.concentration_potential(x);
    let rho_f = |x| model.energy_density16pi(x);
    let phi_s = sample(&phi_f, grid)?;
    let rho_s = sample(&rho_f, grid)?;
    let phi_c = critical_points(&phi_f, grid, &phi_s);
    let rho_c = critical_points(&rho_f, grid, &rho_s);
    let coincide = match (&phi_c, &rho_c) {
        (Some(a), Some(b)) => a
            .iter()
            .any(|p| b.iter().any(|q| dist(p.point, q.point) <= 1e-6)),
        _ => false,
    };
    Ok(ConcentrationField {
        grid: grid.clone(),
        points: grid.points(),
        phi: phi_s.iter().map(|s| s.0).collect(),
        rho_energy: rho_s.iter().map(|s| s.0 / (16.0 * PI)).collect(),
        phi_degenerate: phi_c.is_none(),
        rho_degenerate: rho_c.is_none(),
        phi_critical: phi_c.unwrap_or_default(),
        rho_critical: rho_c.unwrap_or_default(),
        coincide,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationRow {
    pub area: f64,
    pub radius: f64,
    pub center: [f64; 3],
    /// Adapted-chart center, or the shape center when the chart does not fit.
    pub p0: [f64; 3],
    pub distance: f64,
    pub h_l: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub lagrangian: LagrangianSpec,
    /// Critical points of `Φ_L` (see [`lagrangian_potential`]) in the box.
    pub critical_points: Vec<CriticalPoint>,
    /// `Φ_L` is constant on the box.
    pub degenerate: bool,
    /// Critical point nearest to the smallest surface.
    pub target: Option<CriticalPoint>,
    pub rows: Vec<ConcentrationRow>,
    /// Distances strictly decrease with the area.
    pub monotone: bool,
}

/// Runs [`area_scan`] and tracks the distance of the adapted centers to the
/// nearest critical point of `Φ_L`.
pub fn concentration_experiment(
    model: &ManifoldModel,
    lag: &LagrangianSpec,
    areas: &[f64],
    opts: &OptimizerOptions,
    init: &SurfaceShape,
    grid: &FieldGrid,
) -> Result<ConcentrationReport> {
    grid.validate()?;
    let f = |x| lagrangian_potential(model, lag, x);
    let samples = sample(&f, grid)?;
    let critical = critical_points(&f, grid, &samples);
    let scan = area_scan(model, lag, areas, opts, init)?;
    let qgrid = Arc::new(QuadratureGrid::new(
        opts.n_theta.unwrap_or(2 * init.l_max + 6),
    )?);
    let mut rows = Vec::with_capacity(scan.len());
    for e in scan {
        let rep = e.result?;
        let geom = embed(&rep.shape, model, &qgrid)?;
        let p0 = adapted_normal_chart(model, &geom)
            .map(|c| c.p0)
            .unwrap_or(rep.shape.center);
        rows.push(ConcentrationRow {
            area: e.area,
            radius: rep.report.radius,
            center: rep.shape.center,
            p0,
            distance: f64::NAN,
            h_l: rep.report.h_l,
            iterations: rep.iterations,
            converged: rep.converged,
        });
    }
    let degenerate = critical.is_none();
    let critical = critical.unwrap_or_default();
    let target = rows.last().and_then(|last| {
        critical
            .iter()
            .min_by(|a, b| dist(a.point, last.p0).total_cmp(&dist(b.point, last.p0)))
            .cloned()
    });
    if let Some(t) = &target {
        for r in &mut rows {
            r.distance = dist(r.p0, t.point);
        }
    }
    let monotone = target.is_some() && rows.windows(2).all(|w| w[1].distance < w[0].distance);
    Ok(ConcentrationReport {
        lagrangian: *lag,
        critical_points: critical,
        degenerate,
        target,
        rows,
        monotone,
    })
}
