use serde::Serialize;

use super::geometry::SurfaceGeometry;
use crate::tensor::{compensated_sum, to_array, Vec3};

/// Comparison of a surface with the Euclidean round sphere `S_{R_E}(a_E)`.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeDiagnostics {
    pub radius: f64,
    pub radius_euclid: f64,
    /// Chart diameter scaled by the largest metric stretch over the nodes.
    pub diameter: f64,
    /// Euclidean barycenter of the surface.
    pub euclid_center: [f64; 3],
    pub traceless_euclid_l2: f64,
    pub mean_curvature_euclid_deviation_l2: f64,
    pub normal_deviation_max: f64,
}

pub fn shape_diagnostics(geom: &SurfaceGeometry) -> ShapeDiagnostics {
    let nodes = &geom.nodes;
    let area_e = geom.area_euclid;
    let mut center = Vec3::zeros();
    for a in 0..3 {
        center[a] = compensated_sum(nodes.iter().map(|n| n.x[a] * n.euclid.dmu)) / area_e;
    }
    let mut chord: f64 = 0.0;
    let mut stretch: f64 = 0.0;
    for (i, n) in nodes.iter().enumerate() {
        stretch = stretch.max(n.g.symmetric_eigenvalues().max());
        for m in &nodes[i + 1..] {
            chord = chord.max((n.x - m.x).norm());
        }
    }
    let r_e = geom.radius_euclid;
    let traceless = compensated_sum(
        nodes
            .iter()
            .map(|n| n.euclid.traceless_norm2 * n.euclid.dmu),
    )
    .sqrt();
    let h_dev = compensated_sum(
        nodes
            .iter()
            .map(|n| (n.euclid.mean_curvature - 2.0 / r_e).powi(2) * n.euclid.dmu),
    )
    .sqrt();
    let normal_dev = nodes
        .iter()
        .map(|n| (n.normal - n.euclid.normal).norm())
        .fold(0.0, f64::max);
    ShapeDiagnostics {
        radius: geom.radius,
        radius_euclid: r_e,
        diameter: chord * stretch.sqrt(),
        euclid_center: to_array(&center),
        traceless_euclid_l2: traceless,
        mean_curvature_euclid_deviation_l2: h_dev,
        normal_deviation_max: normal_dev,
    }
}
