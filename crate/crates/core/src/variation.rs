//! First variations of area, Willmore energy and `∫ L` under normal
//! perturbations, with a finite-difference harness.

use std::sync::Arc;

use serde::Serialize;

use crate::ambient::{adapted_normal_chart, ManifoldModel};
use crate::error::{Error, Result};
use crate::functionals::{el_operator, least_squares_multiplier, LagrangianSpec};
use crate::surface::{
    embed, laplace_beltrami, surface_gradient, QuadratureGrid, SurfaceGeometry, SurfaceShape,
};
use crate::tensor::{compensated_sum, from_array, Vec3};

/// Normal speeds with a name, for reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum NormalSpeed {
    Constant(f64),
    /// `g(b, ν)`.
    Translation([f64; 3]),
    /// `g(b, ν) / H`.
    TranslationOverMeanCurvature([f64; 3]),
    /// `Y_lm(ω)`.
    Harmonic(usize, i64),
    /// Arbitrary node samples.
    Samples(Vec<f64>),
}

impl NormalSpeed {
    pub fn describe(&self) -> String {
        match self {
            NormalSpeed::Constant(c) => format!("constant {c}"),
            NormalSpeed::Translation(b) => format!("g(b,nu) b={b:?}"),
            NormalSpeed::TranslationOverMeanCurvature(b) => format!("g(b,nu)/H b={b:?}"),
            NormalSpeed::Harmonic(l, m) => format!("Y({l},{m})"),
            NormalSpeed::Samples(_) => "samples".into(),
        }
    }

    pub fn samples(&self, geom: &SurfaceGeometry) -> Result<Vec<f64>> {
        Ok(match self {
            NormalSpeed::Constant(c) => vec![*c; geom.nodes.len()],
            NormalSpeed::Translation(b) => {
                let b = from_array(*b);
                geom.sample(|n| n.normal_flat.dot(&b))
            }
            NormalSpeed::TranslationOverMeanCurvature(b) => {
                let b = from_array(*b);
                geom.sample(|n| n.normal_flat.dot(&b) / n.mean_curvature)
            }
            NormalSpeed::Harmonic(l, m) => geom.grid.basis_values(*l, *m),
            NormalSpeed::Samples(v) => {
                geom.grid.check_len(v.len())?;
                v.clone()
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FirstVariation {
    pub area: f64,
    pub willmore: f64,
    pub l_integral: f64,
}

impl FirstVariation {
    pub fn h_l(&self) -> f64 {
        self.willmore + self.l_integral
    }
}

/// `δA = ∫ fH`, `δW = -½ ∫ f (ΔH + H|Å|² + H Ric(ν,ν))`,
/// `δ∫L = ∫ f d_M L(ν) - d_V L(∇f) + f L H`.
pub fn first_variation(
    geom: &SurfaceGeometry,
    f: &[f64],
    lag: &LagrangianSpec,
) -> Result<FirstVariation> {
    geom.grid.check_len(f.len())?;
    let h = geom.mean_curvature();
    let lap = laplace_beltrami(geom, &h)?;
    let grad = surface_gradient(geom, f)?;
    let n = &geom.nodes;
    let area = compensated_sum(n.iter().zip(f).map(|(n, f)| f * n.mean_curvature * n.dmu));
    let willmore = -0.5
        * compensated_sum(n.iter().zip(f).zip(&lap).map(|((n, f), dh)| {
            let hh = n.mean_curvature;
            f * (dh + hh * n.traceless_norm2 + hh * n.ric_nn) * n.dmu
        }));
    let l_integral = compensated_sum(n.iter().zip(f).zip(&grad).map(|((n, f), gf)| {
        (f * lag.d_m_normal(n) - lag.d_v(n, gf) + f * lag.at(n) * n.mean_curvature) * n.dmu
    }));
    Ok(FirstVariation {
        area,
        willmore,
        l_integral,
    })
}

/// `-½ ∫ f E dμ` through the Euler–Lagrange operator; equals `δH_L`.
pub fn el_variation(geom: &SurfaceGeometry, f: &[f64], lag: &LagrangianSpec) -> Result<f64> {
    geom.grid.check_len(f.len())?;
    let op = el_operator(geom, lag);
    Ok(-0.5
        * compensated_sum(
            geom.nodes
                .iter()
                .zip(f)
                .zip(&op)
                .map(|((n, f), e)| f * e * n.dmu),
        ))
}

#[derive(Clone, Debug, Serialize)]
pub struct VariationReport {
    pub f_spec: String,
    pub step: f64,
    /// Relative `L²` size of the part of `f` lost by projecting the radial
    /// increment onto the shape's band.
    pub projection_defect: f64,
    pub analytic: [f64; 3],
    pub finite_difference: [f64; 3],
    pub delta_h_l: f64,
    /// Relative errors for area, Willmore energy and `∫ L`.
    pub rel_err: [f64; 3],
}

impl VariationReport {
    pub fn max_rel_err(&self) -> f64 {
        self.rel_err.iter().cloned().fold(0.0, f64::max)
    }
}

fn values(geom: &SurfaceGeometry, lag: &LagrangianSpec) -> [f64; 3] {
    [
        geom.area,
        0.25 * geom.integrate(|n| n.mean_curvature * n.mean_curvature),
        geom.integrate(|n| lag.at(n)),
    ]
}

/// Compares analytic first variations with a fourth-order central difference.
///
/// The normal speed `f` is converted to a radial increment `u = f / g(ω, ν)`,
/// projected onto the shape's band, and the analytic side uses the normal
/// speed of the projected increment.
pub fn fd_check(
    shape: &SurfaceShape,
    model: &ManifoldModel,
    grid: &Arc<QuadratureGrid>,
    speed: &NormalSpeed,
    lag: &LagrangianSpec,
    step: f64,
) -> Result<VariationReport> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    let geom = embed(shape, model, grid)?;
    let f = speed.samples(&geom)?;
    let u: Vec<f64> = f
        .iter()
        .zip(&geom.nodes)
        .map(|(f, n)| f / n.radial_normal)
        .collect();
    let u_coeffs = grid.analyze(&u, shape.l_max)?;
    let u_bar = grid.synthesize(&u_coeffs);
    let f_eff: Vec<f64> = u_bar
        .iter()
        .zip(&geom.nodes)
        .map(|(u, n)| u * n.radial_normal)
        .collect();
    let diff = compensated_sum(
        f.iter()
            .zip(&f_eff)
            .zip(&geom.nodes)
            .map(|((a, b), n)| (a - b).powi(2) * n.dmu),
    );
    let norm = compensated_sum(f.iter().zip(&geom.nodes).map(|(a, n)| a * a * n.dmu));
    let projection_defect = if norm > 0.0 {
        (diff / norm).sqrt()
    } else {
        0.0
    };

    let an = first_variation(&geom, &f_eff, lag)?;
    let analytic = [an.area, an.willmore, an.l_integral];

    let perturbed = |k: f64| -> Result<[f64; 3]> {
        let coeffs = shape
            .coeffs
            .iter()
            .zip(&u_coeffs)
            .map(|(a, u)| a + k * step * u)
            .collect();
        let s = SurfaceShape::new(shape.center, shape.l_max, coeffs)?;
        match embed(&s, model, grid) {
            Ok(g) => Ok(values(&g, lag)),
            Err(Error::Immersion(msg)) | Err(Error::Domain { reason: msg, .. }) => {
                Err(Error::StepTooLarge { step, detail: msg })
            }
            Err(e) => Err(e),
        }
    };
    let ((m2, m1), (p1, p2)) = rayon::join(
        || rayon::join(|| perturbed(-2.0), || perturbed(-1.0)),
        || rayon::join(|| perturbed(1.0), || perturbed(2.0)),
    );
    let (m2, m1, p1, p2) = (m2?, m1?, p1?, p2?);
    let base = values(&geom, lag);
    let f_sup = f_eff.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut finite_difference = [0.0; 3];
    let mut rel_err = [0.0; 3];
    for i in 0..3 {
        let d4 = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * step);
        let d2 = (p1[i] - m1[i]) / (2.0 * step);
        finite_difference[i] = d4;
        let scale = analytic[i].abs().max(base[i].abs() * f_sup / geom.radius);
        let roundoff = 1e-15 * base[i].abs().max(1.0) / step;
        if scale > 1e-14 && roundoff > 1e-7 * scale {
            return Err(Error::StepTooSmall {
                step,
                detail: format!("round-off {roundoff:e} against scale {scale:e}"),
            });
        }
        if scale > 1e-14 && (d4 - d2).abs() > 1e-2 * scale {
            return Err(Error::StepTooLarge {
                step,
                detail: format!(
                    "second- and fourth-order differences disagree by {:e}",
                    (d4 - d2).abs()
                ),
            });
        }
        rel_err[i] = if scale < 1e-14 {
            0.0
        } else {
            (d4 - analytic[i]).abs() / scale
        };
    }
    Ok(VariationReport {
        f_spec: speed.describe(),
        step,
        projection_defect,
        analytic,
        finite_difference,
        delta_h_l: an.h_l(),
        rel_err,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplierEstimate {
    /// `δH_L / δA` for the probe `f = g(x - p0, ν)`.
    pub probe: f64,
    /// Minimizer of the Euler–Lagrange residual norm.
    pub least_squares: f64,
    pub p0: [f64; 3],
}

/// Two estimates of the Lagrange multiplier `λ` in `E + 2λH = 0`.
pub fn lagrange_multiplier(
    geom: &SurfaceGeometry,
    model: &ManifoldModel,
    lag: &LagrangianSpec,
) -> Result<MultiplierEstimate> {
    let chart = adapted_normal_chart(model, geom)?;
    let p0: Vec3 = from_array(chart.p0);
    let f = geom.sample(|n| n.normal_flat.dot(&(n.x - p0)));
    let var = first_variation(geom, &f, lag)?;
    if var.area.abs() < 1e-12 * geom.area {
        return Err(Error::DegenerateProbe {
            delta_area: var.area,
        });
    }
    let op = el_operator(geom, lag);
    Ok(MultiplierEstimate {
        probe: var.h_l() / var.area,
        least_squares: least_squares_multiplier(geom, &op),
        p0: chart.p0,
    })
}
