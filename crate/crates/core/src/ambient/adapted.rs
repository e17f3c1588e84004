use serde::Serialize;

use super::{sqrt_spd, ManifoldModel};
use crate::error::{Error, Result};
use crate::surface::{shape_diagnostics, SurfaceGeometry};
use crate::tensor::{compensated_sum, from_array, to_array, Vec3};

const MAX_ITERATIONS: usize = 100;
const TOLERANCE: f64 = 1e-10;

/// A chart recentered at `p0` in which the surface has vanishing
/// `g`-weighted coordinate mean.
#[derive(Clone, Debug, Serialize)]
pub struct AdaptedChart {
    pub p0: [f64; 3],
    /// `|∫ y dμ| / |Σ|` in the recentered coordinates.
    pub mean_offset: f64,
    /// Euclidean barycenter of the surface in the recentered coordinates.
    pub euclid_center: [f64; 3],
    pub diameter: f64,
    /// `|a_E| / d³`.
    pub offset_ratio: f64,
    pub iterations: usize,
}

/// Second-order normal coordinates around `p0`:
/// `y = g(p0)^{1/2} ((x - p0) + ½ Γ(p0)(x - p0, x - p0))`.
fn normal_coordinates(model: &ManifoldModel, p0: Vec3) -> Result<impl Fn(&Vec3) -> Vec3> {
    let amb = model.curvature_at(to_array(&p0))?;
    let (root, _) = sqrt_spd(&amb.g);
    let gamma = amb.christoffel;
    Ok(move |x: &Vec3| {
        let v = x - p0;
        let mut w = v;
        for l in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    w[l] += 0.5 * gamma[l][i][j] * v[i] * v[j];
                }
            }
        }
        root * w
    })
}

/// Finds the center `p0` of normal coordinates in which `∫ y dμ_g = 0`.
pub fn adapted_normal_chart(model: &ManifoldModel, geom: &SurfaceGeometry) -> Result<AdaptedChart> {
    let diag = shape_diagnostics(geom);
    if 2.0 * diag.diameter >= model.chart_radius() {
        return Err(Error::InvalidInput(format!(
            "surface diameter {} too large for chart radius {}",
            diag.diameter,
            model.chart_radius()
        )));
    }
    let area = geom.area;
    let mut p0 = from_array(diag.euclid_center);
    for it in 1..=MAX_ITERATIONS {
        let y = normal_coordinates(model, p0)?;
        let ys: Vec<Vec3> = geom.nodes.iter().map(|n| y(&n.x)).collect();
        let mut mean = Vec3::zeros();
        for a in 0..3 {
            mean[a] = compensated_sum(geom.nodes.iter().zip(&ys).map(|(n, y)| y[a] * n.dmu)) / area;
        }
        if mean.norm() <= TOLERANCE {
            let mut center = Vec3::zeros();
            for a in 0..3 {
                center[a] =
                    compensated_sum(geom.nodes.iter().zip(&ys).map(|(n, y)| y[a] * n.euclid.dmu))
                        / geom.area_euclid;
            }
            let d = diag.diameter;
            return Ok(AdaptedChart {
                p0: to_array(&p0),
                mean_offset: mean.norm(),
                euclid_center: to_array(&center),
                diameter: d,
                offset_ratio: center.norm() / d.powi(3),
                iterations: it,
            });
        }
        let g = model.metric_at(to_array(&p0))?;
        let (_, inv_root) = sqrt_spd(&g);
        p0 += inv_root * mean;
    }
    Err(Error::NoConvergence {
        what: "adapted normal chart",
        iterations: MAX_ITERATIONS,
    })
}
