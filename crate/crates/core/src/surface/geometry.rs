use std::sync::Arc;

use rayon::prelude::*;

use super::grid::QuadratureGrid;
use super::SurfaceShape;
use crate::ambient::ManifoldModel;
use crate::error::{Error, Result};
use crate::tensor::{compensated_sum, from_array, Mat2, Mat3, Tensor3, Vec3};

/// Euclidean-metric counterparts of the node geometry.
#[derive(Clone, Debug)]
pub struct EuclideanNode {
    pub gamma: Mat2,
    pub dmu: f64,
    pub normal: Vec3,
    pub second_form: Mat2,
    pub mean_curvature: f64,
    pub traceless_norm2: f64,
}

/// Geometry of the surface at one quadrature node.
#[derive(Clone, Debug)]
pub struct NodeGeometry {
    /// Direction `ω` of the node on the parameter sphere.
    pub omega: Vec3,
    pub x: Vec3,
    pub rho: f64,
    /// `∂_θ x`, `∂_φ x`.
    pub tangents: [Vec3; 2],
    pub gamma: Mat2,
    pub gamma_inv: Mat2,
    /// Quadrature weight times area density: `∫ f dμ ≈ Σ f dmu`.
    pub dmu: f64,
    /// Unit normal, contravariant components.
    pub normal: Vec3,
    /// `g ν`.
    pub normal_flat: Vec3,
    /// `g(ω, ν)`, the normal speed of a unit radial displacement.
    pub radial_normal: f64,
    /// `A_ij = g(∇_{e_i} ν, e_j)`.
    pub second_form: Mat2,
    pub traceless: Mat2,
    pub mean_curvature: f64,
    pub traceless_norm2: f64,
    pub g: Mat3,
    pub g_inv: Mat3,
    pub christoffel: Tensor3,
    pub ricci: Mat3,
    pub scalar: f64,
    pub ric_nn: f64,
    pub einstein_nn: f64,
    pub k: Mat3,
    pub grad_k: Tensor3,
    pub tr_k: f64,
    pub norm_k2: f64,
    /// `K(ν, ν)`.
    pub k_nn: f64,
    /// `P = tr K - K(ν, ν)`.
    pub p: f64,
    /// `η_i = K(e_i, ν)`.
    pub eta: [f64; 2],
    /// `γ^{ij} η_i η_j`.
    pub eta_norm2: f64,
    pub euclid: EuclideanNode,
}

impl NodeGeometry {
    /// Tangential 2-tensor `B(e_i, e_j)` of an ambient bilinear form.
    pub fn restrict(&self, b: &Mat3) -> Mat2 {
        let e = &self.tangents;
        Mat2::from_fn(|i, j| (e[i].transpose() * b * e[j])[0])
    }

    /// `γ^{ik} γ^{jl} S_ij T_kl`.
    pub fn pair(&self, s: &Mat2, t: &Mat2) -> f64 {
        (self.gamma_inv * s * self.gamma_inv * t.transpose()).trace()
    }

    /// Ambient vector `γ^{ij} c_j e_i` for a tangential covector `c`.
    pub fn raise(&self, c: [f64; 2]) -> Vec3 {
        let v = self.gamma_inv * nalgebra::Vector2::new(c[0], c[1]);
        self.tangents[0] * v[0] + self.tangents[1] * v[1]
    }

    /// `(∇_X K)(u, v)`.
    pub fn grad_k_along(&self, x: &Vec3, u: &Vec3, v: &Vec3) -> f64 {
        crate::tensor::trilinear(&self.grad_k, u, v, x)
    }

    /// `tr_Σ (∇_X K) = γ^{ij} (∇_X K)(e_i, e_j)`.
    pub fn tangential_trace_grad_k(&self, x: &Vec3) -> f64 {
        let m = Mat2::from_fn(|i, j| self.grad_k_along(x, &self.tangents[i], &self.tangents[j]));
        (self.gamma_inv * m).trace()
    }

    /// `tr_M (∇_X K) = g^{ij} (∇_X K)_ij`.
    pub fn full_trace_grad_k(&self, x: &Vec3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| self.grad_k[i][j][k] * x[k]).sum();
                s += self.g_inv[(i, j)] * d;
            }
        }
        s
    }

    /// `Div_Σ K(ν) = γ^{ij} (∇_{e_i} K)(e_j, ν)`.
    pub fn tangential_divergence_k_normal(&self) -> f64 {
        let e = &self.tangents;
        let m = Mat2::from_fn(|i, j| self.grad_k_along(&e[i], &e[j], &self.normal));
        (self.gamma_inv * m).trace()
    }
}

/// Per-node geometry of an embedded shape together with global sizes.
#[derive(Clone, Debug)]
pub struct SurfaceGeometry {
    pub shape: SurfaceShape,
    pub grid: Arc<QuadratureGrid>,
    pub nodes: Vec<NodeGeometry>,
    pub area: f64,
    pub area_euclid: f64,
    /// Area radius `√(|Σ| / 4π)`.
    pub radius: f64,
    pub radius_euclid: f64,
}

impl SurfaceGeometry {
    /// `∫ f dμ` for node samples `f`.
    pub fn integrate(&self, f: impl Fn(&NodeGeometry) -> f64) -> f64 {
        compensated_sum(self.nodes.iter().map(|n| f(n) * n.dmu))
    }

    pub fn integrate_samples(&self, f: &[f64]) -> Result<f64> {
        self.grid.check_len(f.len())?;
        Ok(compensated_sum(
            self.nodes.iter().zip(f).map(|(n, v)| v * n.dmu),
        ))
    }

    pub fn sample(&self, f: impl Fn(&NodeGeometry) -> f64) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }

    pub fn mean_curvature(&self) -> Vec<f64> {
        self.sample(|n| n.mean_curvature)
    }
}

fn omega_frame(theta: f64, phi: f64) -> [Vec3; 6] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let w = Vec3::new(st * cp, st * sp, ct);
    let wt = Vec3::new(ct * cp, ct * sp, -st);
    let wp = Vec3::new(-st * sp, st * cp, 0.0);
    let wtt = -w;
    let wtp = Vec3::new(-ct * sp, ct * cp, 0.0);
    let wpp = Vec3::new(-st * cp, -st * sp, 0.0);
    [w, wt, wp, wtt, wtp, wpp]
}

fn gamma_of(g: &Mat3, e: &[Vec3; 2]) -> Mat2 {
    Mat2::from_fn(|i, j| (e[i].transpose() * g * e[j])[0])
}

/// Embeds `shape` into `model` and computes the geometry at every node.
pub fn embed(
    shape: &SurfaceShape,
    model: &ManifoldModel,
    grid: &Arc<QuadratureGrid>,
) -> Result<SurfaceGeometry> {
    if shape.l_max > grid.band() {
        return Err(Error::InvalidInput(format!(
            "shape band {} exceeds grid band {}",
            shape.l_max,
            grid.band()
        )));
    }
    let derivs = grid.synthesize_derivs(&shape.coeffs);
    let center = from_array(shape.center);
    let nodes: Vec<NodeGeometry> = (0..grid.len())
        .into_par_iter()
        .map(|q| {
            let d = derivs[q];
            let [theta, phi] = grid.angles[q];
            let [w, wt, wp, wtt, wtp, wpp] = omega_frame(theta, phi);
            let rho = d[0];
            if !(rho > 0.0) {
                return Err(Error::Immersion(format!(
                    "radial function {rho} is not positive at node {q}"
                )));
            }
            let x = center + w * rho;
            let e = [w * d[1] + wt * rho, w * d[2] + wp * rho];
            let second = [
                [
                    w * d[3] + wt * (2.0 * d[1]) + wtt * rho,
                    w * d[4] + wp * d[1] + wt * d[2] + wtp * rho,
                ],
                [Vec3::zeros(), w * d[5] + wp * (2.0 * d[2]) + wpp * rho],
            ];
            let xij = |i: usize, j: usize| if i <= j { second[i][j] } else { second[j][i] };
            let amb = model.node_ambient([x[0], x[1], x[2]])?;
            let gamma = gamma_of(&amb.g, &e);
            let det = gamma.determinant();
            if !(det > 0.0) || e[0].cross(&e[1]).norm() < 1e-14 * rho * rho {
                return Err(Error::Immersion(format!("degenerate tangents at node {q}")));
            }
            let gamma_inv = gamma
                .try_inverse()
                .ok_or_else(|| Error::Immersion("singular γ".into()))?;
            // The cross product of the tangents is a conormal covector.
            let mut n = e[0].cross(&e[1]);
            if n.dot(&w) < 0.0 {
                n = -n;
            }
            let nn = (n.transpose() * amb.g_inv * n)[0].sqrt();
            let normal_flat = n / nn;
            let normal = amb.g_inv * normal_flat;
            let second_form = Mat2::from_fn(|i, j| {
                let mut v = xij(i, j);
                for l in 0..3 {
                    for a in 0..3 {
                        for b in 0..3 {
                            v[l] += amb.christoffel[l][a][b] * e[i][a] * e[j][b];
                        }
                    }
                }
                -normal_flat.dot(&v)
            });
            let second_form = (second_form + second_form.transpose()) * 0.5;
            let mean_curvature = (gamma_inv * second_form).trace();
            let traceless = second_form - gamma * (0.5 * mean_curvature);
            let mixed = gamma_inv * traceless;
            let traceless_norm2 = (mixed * mixed).trace();

            let ric_nn = (normal.transpose() * amb.ricci * normal)[0];
            let tr_k = (amb.g_inv * amb.k).trace();
            let mk = amb.g_inv * amb.k;
            let norm_k2 = (mk * mk).trace();
            let k_nn = (normal.transpose() * amb.k * normal)[0];
            let kn = amb.k * normal;
            let eta = [e[0].dot(&kn), e[1].dot(&kn)];
            let ev = gamma_inv * nalgebra::Vector2::new(eta[0], eta[1]);
            let eta_norm2 = ev[0] * eta[0] + ev[1] * eta[1];

            let sin_theta = grid.sin_theta(q);
            let dmu = grid.weights[q] * det.sqrt() / sin_theta;

            let gamma_e = gamma_of(&Mat3::identity(), &e);
            let ge_inv = gamma_e
                .try_inverse()
                .ok_or_else(|| Error::Immersion("singular γ_E".into()))?;
            let normal_e = n / n.norm();
            let a_e = Mat2::from_fn(|i, j| -normal_e.dot(&xij(i, j)));
            let h_e = (ge_inv * a_e).trace();
            let mixed_e = ge_inv * (a_e - gamma_e * (0.5 * h_e));
            let euclid = EuclideanNode {
                gamma: gamma_e,
                dmu: grid.weights[q] * gamma_e.determinant().sqrt() / sin_theta,
                normal: normal_e,
                second_form: a_e,
                mean_curvature: h_e,
                traceless_norm2: (mixed_e * mixed_e).trace(),
            };
            Ok(NodeGeometry {
                omega: w,
                x,
                rho,
                tangents: e,
                gamma,
                gamma_inv,
                dmu,
                normal,
                normal_flat,
                radial_normal: normal_flat.dot(&w),
                second_form,
                traceless,
                mean_curvature,
                traceless_norm2,
                g: amb.g,
                g_inv: amb.g_inv,
                christoffel: amb.christoffel,
                ricci: amb.ricci,
                scalar: amb.scalar,
                ric_nn,
                einstein_nn: ric_nn - 0.5 * amb.scalar,
                k: amb.k,
                grad_k: amb.grad_k,
                tr_k,
                norm_k2,
                k_nn,
                p: tr_k - k_nn,
                eta,
                eta_norm2,
                euclid,
            })
        })
        .collect::<Result<_>>()?;
    let area = compensated_sum(nodes.iter().map(|n| n.dmu));
    let area_euclid = compensated_sum(nodes.iter().map(|n| n.euclid.dmu));
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(SurfaceGeometry {
        shape: shape.clone(),
        grid: grid.clone(),
        nodes,
        area,
        area_euclid,
        radius: (area / four_pi).sqrt(),
        radius_euclid: (area_euclid / four_pi).sqrt(),
    })
}
