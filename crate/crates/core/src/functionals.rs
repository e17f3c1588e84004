//! Willmore energy, Lagrangian integrals, Hawking energy and the
//! area-constrained Euler–Lagrange operator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::surface::{laplace_beltrami, NodeGeometry, SurfaceGeometry};
use crate::tensor::{compensated_sum, Mat2};

/// `L(x, ν) = α (tr K)² + β K(ν,ν)² + c₀ tr K · K(ν,ν) + cₜ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagrangianSpec {
    pub alpha: f64,
    pub beta: f64,
    pub c0: f64,
    pub ct: f64,
}

impl LagrangianSpec {
    pub const fn new(alpha: f64, beta: f64, c0: f64, ct: f64) -> Self {
        Self {
            alpha,
            beta,
            c0,
            ct,
        }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    /// `L = -¼ P²` with `P = tr K - K(ν,ν)`.
    pub const fn hawking() -> Self {
        Self::new(-0.25, -0.25, 0.5, 0.0)
    }

    pub fn is_hawking(&self) -> bool {
        *self == Self::hawking()
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.alpha * s, self.beta * s, self.c0 * s, self.ct * s)
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::new(
            self.alpha + other.alpha,
            self.beta + other.beta,
            self.c0 + other.c0,
            self.ct + other.ct,
        )
    }

    /// Value from `t = tr K` and `q = K(ν,ν)`.
    pub fn eval(&self, t: f64, q: f64) -> f64 {
        self.alpha * t * t + self.beta * q * q + self.c0 * t * q + self.ct
    }

    pub fn at(&self, n: &NodeGeometry) -> f64 {
        self.eval(n.tr_k, n.k_nn)
    }

    /// Factor `m` in `d_V L(X) = m K(X, ν)`.
    pub fn normal_factor(&self, n: &NodeGeometry) -> f64 {
        4.0 * self.beta * n.k_nn + 2.0 * self.c0 * n.tr_k
    }

    /// `d_V L(X)` for an ambient vector `X`.
    pub fn d_v(&self, n: &NodeGeometry, x: &crate::tensor::Vec3) -> f64 {
        self.normal_factor(n) * (x.transpose() * n.k * n.normal)[0]
    }

    /// `d_M L(ν)`: derivative in the base point along `ν` at fixed direction.
    pub fn d_m_normal(&self, n: &NodeGeometry) -> f64 {
        let (t, q) = (n.tr_k, n.k_nn);
        let dt = n.full_trace_grad_k(&n.normal);
        let dq = n.grad_k_along(&n.normal, &n.normal, &n.normal);
        2.0 * self.alpha * t * dt + 2.0 * self.beta * q * dq + self.c0 * (dt * q + t * dq)
    }

    /// `Div_Σ d_V L` with the direction held at `ν`; the terms from the
    /// variation of `ν` along `Σ` are carried by `Q` and `S`.
    pub fn divergence_d_v(&self, n: &NodeGeometry) -> f64 {
        let eta = n.raise(n.eta);
        4.0 * self.beta * n.grad_k_along(&eta, &n.normal, &n.normal)
            + 2.0 * self.c0 * n.full_trace_grad_k(&eta)
            + self.normal_factor(n) * n.tangential_divergence_k_normal()
    }
}

/// Coefficients of `ΔH + H|Å|² + HQ + γ(Å, S) + 2λH + T = 0` at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElCoefficients {
    pub q: f64,
    pub s: Mat2,
    pub t: f64,
}

/// Generic assembly `Q = Ric(ν,ν) - 2L - tr_Σ Hess_V L + 2 d_V L(ν)`,
/// `S = -2 Hess_V L`, `T = -2 d_M L(ν) - 2 Div_Σ d_V L`.
pub fn el_coefficients(n: &NodeGeometry, lag: &LagrangianSpec) -> ElCoefficients {
    let m = lag.normal_factor(n);
    let k_t = n.restrict(&n.k);
    let eta = nalgebra::Vector2::new(n.eta[0], n.eta[1]);
    let hess_t = eta * eta.transpose() * (8.0 * lag.beta) + k_t * m;
    let tr_hess = (n.gamma_inv * hess_t).trace();
    let q = n.ric_nn - 2.0 * lag.at(n) - tr_hess + 2.0 * m * n.k_nn;
    let t = -2.0 * lag.d_m_normal(n) - 2.0 * lag.divergence_d_v(n);
    ElCoefficients {
        q,
        s: hess_t * -2.0,
        t,
    }
}

/// Closed forms of the coefficients for `L = -¼ P²`.
pub fn hawking_el_coefficients(n: &NodeGeometry) -> ElCoefficients {
    let p = n.p;
    let eta = nalgebra::Vector2::new(n.eta[0], n.eta[1]);
    let k_t = n.restrict(&n.k);
    let q = n.ric_nn - 0.5 * p * p + 2.0 * n.eta_norm2 + 2.0 * p * n.k_nn;
    let s = k_t * (-2.0 * p) + eta * eta.transpose() * 4.0;
    let eta_up = n.raise(n.eta);
    let t = p * n.tangential_trace_grad_k(&n.normal)
        - 2.0 * n.tangential_trace_grad_k(&eta_up)
        - 2.0 * p * n.tangential_divergence_k_normal();
    ElCoefficients { q, s, t }
}

/// `ΔH + H|Å|² + HQ + γ(Å, S) + T` at every node; the first variation of
/// `H_L` in normal direction `f` is `-½ ∫ f · (this) dμ`.
pub fn el_operator(geom: &SurfaceGeometry, lag: &LagrangianSpec) -> Vec<f64> {
    let h = geom.mean_curvature();
    let lap = laplace_beltrami(geom, &h).expect("samples live on the geometry's grid");
    geom.nodes
        .iter()
        .zip(&lap)
        .map(|(n, dh)| {
            let c = el_coefficients(n, lag);
            let hh = n.mean_curvature;
            dh + hh * n.traceless_norm2 + hh * c.q + n.pair(&n.traceless, &c.s) + c.t
        })
        .collect()
}

/// Residual field of the Euler–Lagrange equation for a given `λ`.
#[derive(Clone, Debug)]
pub struct ElResidual {
    pub field: Vec<f64>,
    pub l2: f64,
}

pub fn el_residual(geom: &SurfaceGeometry, lag: &LagrangianSpec, lambda: f64) -> ElResidual {
    let op = el_operator(geom, lag);
    residual_from(geom, &op, lambda)
}

fn residual_from(geom: &SurfaceGeometry, op: &[f64], lambda: f64) -> ElResidual {
    let field: Vec<f64> = op
        .iter()
        .zip(&geom.nodes)
        .map(|(e, n)| e + 2.0 * lambda * n.mean_curvature)
        .collect();
    let l2 = compensated_sum(field.iter().zip(&geom.nodes).map(|(r, n)| r * r * n.dmu)).sqrt();
    ElResidual { field, l2 }
}

/// `λ` minimizing the `L²(dμ)` norm of the residual.
pub fn least_squares_multiplier(geom: &SurfaceGeometry, op: &[f64]) -> f64 {
    let eh = compensated_sum(
        op.iter()
            .zip(&geom.nodes)
            .map(|(e, n)| e * n.mean_curvature * n.dmu),
    );
    let hh = geom.integrate(|n| n.mean_curvature * n.mean_curvature);
    -eh / (2.0 * hh)
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionalReport {
    pub area: f64,
    pub radius: f64,
    pub radius_euclid: f64,
    pub willmore: f64,
    pub l_integral: f64,
    pub h_l: f64,
    pub hawking_energy: f64,
    pub u: f64,
    pub v: f64,
    pub gauss_bonnet_total: f64,
    /// `2W - 8π - ∫|Å|² - 2∫G(ν,ν)`.
    pub gauss_identity_defect: f64,
    pub el_residual_l2: f64,
    pub lambda: f64,
}

pub fn evaluate_functionals(geom: &SurfaceGeometry, lag: &LagrangianSpec) -> FunctionalReport {
    let willmore = 0.25 * geom.integrate(|n| n.mean_curvature * n.mean_curvature);
    let l_integral = geom.integrate(|n| lag.at(n));
    let area = geom.area;
    let hp = geom.integrate(|n| n.mean_curvature * n.mean_curvature - n.p * n.p);
    let hawking_energy = (area / (16.0 * PI)).sqrt() * (1.0 - hp / (16.0 * PI));
    let traceless = geom.integrate(|n| n.traceless_norm2);
    let u = 0.5 * traceless;
    let v = geom.integrate(|n| n.einstein_nn);
    let gauss_bonnet_total = geom.integrate(|n| {
        let h = n.mean_curvature;
        0.5 * (n.scalar - 2.0 * n.ric_nn + 0.5 * h * h - n.traceless_norm2)
    });
    let gauss_identity_defect = 2.0 * willmore - 8.0 * PI - traceless - 2.0 * v;
    let op = el_operator(geom, lag);
    let lambda = least_squares_multiplier(geom, &op);
    let el_residual_l2 = residual_from(geom, &op, lambda).l2;
    FunctionalReport {
        area,
        radius: geom.radius,
        radius_euclid: geom.radius_euclid,
        willmore,
        l_integral,
        h_l: willmore + l_integral,
        hawking_energy,
        u,
        v,
        gauss_bonnet_total,
        gauss_identity_defect,
        el_residual_l2,
        lambda,
    }
}
