use super::geometry::SurfaceGeometry;
use crate::error::Result;
use crate::tensor::Vec3;

/// Surface gradient `∇^Σ f = γ^{ij} ∂_j f e_i` in chart components.
pub fn surface_gradient(geom: &SurfaceGeometry, f: &[f64]) -> Result<Vec<Vec3>> {
    let df = geom.grid.parameter_gradient(f)?;
    Ok(geom
        .nodes
        .iter()
        .zip(&df)
        .map(|(n, d)| n.raise(*d))
        .collect())
}

/// Laplace–Beltrami operator of the induced metric applied to node samples.
///
/// The gradient is formed as an ambient vector field, its Cartesian components
/// are differentiated spectrally, and the divergence is taken with the ambient
/// connection: `Δf = γ^{ij} g(∂_i G + Γ(e_i, G), e_j)`.
pub fn laplace_beltrami(geom: &SurfaceGeometry, f: &[f64]) -> Result<Vec<f64>> {
    let grad = surface_gradient(geom, f)?;
    let mut dg = Vec::with_capacity(3);
    for a in 0..3 {
        let comp: Vec<f64> = grad.iter().map(|v| v[a]).collect();
        dg.push(geom.grid.parameter_gradient(&comp)?);
    }
    Ok(geom
        .nodes
        .iter()
        .enumerate()
        .map(|(q, n)| {
            let gv = grad[q];
            let mut m = nalgebra::Matrix2::zeros();
            for i in 0..2 {
                let mut cov = Vec3::new(dg[0][q][i], dg[1][q][i], dg[2][q][i]);
                let e = n.tangents[i];
                for l in 0..3 {
                    for a in 0..3 {
                        for b in 0..3 {
                            cov[l] += n.christoffel[l][a][b] * e[a] * gv[b];
                        }
                    }
                }
                for j in 0..2 {
                    m[(i, j)] = (cov.transpose() * n.g * n.tangents[j])[0];
                }
            }
            (n.gamma_inv * m).trace()
        })
        .collect())
}
