//! The ambient 3-manifold: a coordinate chart with metric, curvature and an
//! extrinsic symmetric 2-tensor field `K`.

mod adapted;
mod metric;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

pub use adapted::{adapted_normal_chart, AdaptedChart};
pub use metric::{MetricFn, MetricKind};

use crate::error::{Error, Result};
use crate::jet::{invert, Jet, JetMatrix};
use crate::tensor::{from_array, rotate3, rotate4, Mat3, Tensor3, Tensor4, ZERO3, ZERO4};

/// Affine extrinsic data `K_ij(x) = K⁰_ij + K¹_ijk x^k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineK {
    pub k0: [[f64; 3]; 3],
    /// `k1[i][j][k] = ∂_k K_ij`, symmetric in `(i, j)`.
    pub k1: Tensor3,
}

impl Default for AffineK {
    fn default() -> Self {
        Self::zero()
    }
}

impl AffineK {
    pub fn zero() -> Self {
        Self {
            k0: [[0.0; 3]; 3],
            k1: ZERO3,
        }
    }

    pub fn constant(k0: [[f64; 3]; 3]) -> Self {
        Self { k0, k1: ZERO3 }
    }

    /// Builds K from the six upper-triangular entries of `K⁰`
    /// (`11, 12, 13, 22, 23, 33`) and, for each of them, the three
    /// components of its gradient.
    pub fn from_components(k0: [f64; 6], k1: [f64; 18]) -> Self {
        const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        let mut out = Self::zero();
        for (n, &(i, j)) in PAIRS.iter().enumerate() {
            out.k0[i][j] = k0[n];
            out.k0[j][i] = k0[n];
            for k in 0..3 {
                out.k1[i][j][k] = k1[3 * n + k];
                out.k1[j][i][k] = k1[3 * n + k];
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.k0.iter().flatten().all(|v| *v == 0.0)
            && self.k1.iter().flatten().flatten().all(|v| *v == 0.0)
    }

    pub fn at(&self, x: [f64; 3]) -> Mat3 {
        Mat3::from_fn(|i, j| self.k0[i][j] + (0..3).map(|k| self.k1[i][j][k] * x[k]).sum::<f64>())
    }

    fn jets(&self, x: [f64; 3], deg: u8) -> JetMatrix {
        let mut out = [[Jet::zero(deg); 3]; 3];
        let value = self.at(x);
        for i in 0..3 {
            for j in 0..3 {
                let mut jet = Jet::constant(value[(i, j)], deg);
                if deg >= 1 {
                    for k in 0..3 {
                        let mut e = [0u8; 3];
                        e[k] = 1;
                        jet.set_coeff(e, self.k1[i][j][k]);
                    }
                }
                out[i][j] = jet;
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        for i in 0..3 {
            for j in 0..3 {
                if (self.k0[i][j] - self.k0[j][i]).abs() > 1e-14 {
                    return Err(Error::InvalidModel("K⁰ must be symmetric".into()));
                }
                for k in 0..3 {
                    if (self.k1[i][j][k] - self.k1[j][i][k]).abs() > 1e-14 {
                        return Err(Error::InvalidModel(
                            "K¹ must be symmetric in its first two slots".into(),
                        ));
                    }
                }
            }
        }
        if self
            .k0
            .iter()
            .flatten()
            .chain(self.k1.iter().flatten().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidModel("K has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn rotated(&self, r: &Mat3) -> Self {
        let k0 = r * Mat3::from_fn(|i, j| self.k0[i][j]) * r.transpose();
        Self {
            k0: std::array::from_fn(|i| std::array::from_fn(|j| k0[(i, j)])),
            k1: rotate3(&self.k1, r),
        }
    }
}

/// A coordinate chart of a Riemannian 3-manifold with extrinsic data.
#[derive(Clone, Debug)]
pub struct ManifoldModel {
    chart_radius: f64,
    metric: MetricKind,
    k: AffineK,
}

/// Everything known about the ambient geometry at one chart point.
#[derive(Clone, Debug, Serialize)]
pub struct AmbientEval {
    pub point: [f64; 3],
    pub g: Mat3,
    pub g_inv: Mat3,
    /// `christoffel[l][i][j] = Γ^l_ij`.
    pub christoffel: Tensor3,
    /// `riemann[a][b][c][d] = R_abcd`, with `R_abcd = κ (g_ac g_bd - g_ad g_bc)`
    /// for constant curvature `κ`.
    pub riemann: Tensor4,
    pub ricci: Mat3,
    pub scalar: f64,
    pub grad_scalar: [f64; 3],
    pub einstein: Mat3,
    pub k: Mat3,
    /// `grad_k[i][j][k] = ∇_k K_ij`.
    pub grad_k: Tensor3,
    pub tr_k: f64,
    pub norm_k2: f64,
}

/// Extrinsic data at a point.
#[derive(Clone, Debug, Serialize)]
pub struct ExtrinsicEval {
    pub k: Mat3,
    /// `grad_k[i][j][k] = ∇_k K_ij`.
    pub grad_k: Tensor3,
    pub tr_k: f64,
    pub norm_k2: f64,
}

/// Reduced ambient data needed per surface node.
#[derive(Clone, Debug)]
pub(crate) struct NodeAmbient {
    pub g: Mat3,
    pub g_inv: Mat3,
    pub christoffel: Tensor3,
    pub ricci: Mat3,
    pub scalar: f64,
    pub k: Mat3,
    pub grad_k: Tensor3,
}

struct CurvatureJets {
    g: JetMatrix,
    g_inv: JetMatrix,
    christoffel: [[[Jet; 3]; 3]; 3],
    riemann_up: [[[[Jet; 3]; 3]; 3]; 3],
    ricci: JetMatrix,
    scalar: Jet,
}

fn curvature_jets(g: JetMatrix) -> CurvatureJets {
    let deg = g[0][0].degree();
    assert!(deg >= 2);
    let g_inv = invert(&g);
    let dg: [JetMatrix; 3] =
        std::array::from_fn(|k| std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].deriv(k))));
    let lower_first =
        |m: usize, i: usize, j: usize| (dg[i][m][j] + dg[j][m][i] - dg[m][i][j]) * 0.5;
    let first_kind: [[[Jet; 3]; 3]; 3] = std::array::from_fn(|m| {
        std::array::from_fn(|i| std::array::from_fn(|j| lower_first(m, i, j)))
    });
    let christoffel: [[[Jet; 3]; 3]; 3] = std::array::from_fn(|l| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut s = Jet::zero(deg - 1);
                for (m, fk) in first_kind.iter().enumerate() {
                    s = s + g_inv[l][m] * fk[i][j];
                }
                s
            })
        })
    });
    // R^a_bcd = ∂_c Γ^a_db - ∂_d Γ^a_cb + Γ^a_ce Γ^e_db - Γ^a_de Γ^e_cb
    let dgamma: [[[[Jet; 3]; 3]; 3]; 3] = std::array::from_fn(|c| {
        std::array::from_fn(|a| {
            std::array::from_fn(|i| std::array::from_fn(|j| christoffel[a][i][j].deriv(c)))
        })
    });
    let riemann_up: [[[[Jet; 3]; 3]; 3]; 3] = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| {
                std::array::from_fn(|d| {
                    let mut s = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                    for e in 0..3 {
                        s = s + christoffel[a][c][e] * christoffel[e][d][b]
                            - christoffel[a][d][e] * christoffel[e][c][b];
                    }
                    s
                })
            })
        })
    });
    let ricci: JetMatrix = std::array::from_fn(|b| {
        std::array::from_fn(|d| {
            let mut s = Jet::zero(deg - 2);
            for (a, ra) in riemann_up.iter().enumerate() {
                s = s + ra[b][a][d];
            }
            s
        })
    });
    let mut scalar = Jet::zero(deg - 2);
    for b in 0..3 {
        for d in 0..3 {
            scalar = scalar + g_inv[b][d] * ricci[b][d];
        }
    }
    CurvatureJets {
        g,
        g_inv,
        christoffel,
        riemann_up,
        ricci,
        scalar,
    }
}

fn jet_values(m: &JetMatrix) -> Mat3 {
    Mat3::from_fn(|i, j| m[i][j].value())
}

fn covariant_k(k: &Mat3, k1: &Tensor3, christoffel: &Tensor3) -> Tensor3 {
    let mut out = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            for kk in 0..3 {
                let mut s = k1[i][j][kk];
                for l in 0..3 {
                    s -= christoffel[l][kk][i] * k[(l, j)] + christoffel[l][kk][j] * k[(i, l)];
                }
                out[i][j][kk] = s;
            }
        }
    }
    out
}

fn traces(k: &Mat3, g_inv: &Mat3) -> (f64, f64) {
    let tr = (g_inv * k).trace();
    let mixed = g_inv * k;
    let norm2 = (mixed * mixed).trace();
    (tr, norm2)
}

impl ManifoldModel {
    pub fn new(chart_radius: f64, metric: MetricKind, k: AffineK) -> Result<Self> {
        if !(chart_radius.is_finite() && chart_radius > 0.0) {
            return Err(Error::InvalidModel(format!(
                "chart radius must be positive, got {chart_radius}"
            )));
        }
        match &metric {
            MetricKind::RoundSphere { curvature } => {
                if !(*curvature > 0.0 && curvature.is_finite()) {
                    return Err(Error::InvalidModel(
                        "round-sphere curvature must be positive".into(),
                    ));
                }
                if chart_radius * curvature.sqrt() >= PI {
                    return Err(Error::InvalidModel(
                        "normal chart of the round sphere must stay inside the cut locus (radius < π/√κ)".into(),
                    ));
                }
            }
            MetricKind::Schwarzschild { mass } => {
                if !(*mass > 0.0 && mass.is_finite()) {
                    return Err(Error::InvalidModel(
                        "Schwarzschild mass must be positive".into(),
                    ));
                }
                if chart_radius <= 0.5 * mass {
                    return Err(Error::InvalidModel(
                        "chart must extend beyond the horizon |x| = m/2".into(),
                    ));
                }
            }
            MetricKind::PerturbedFlat { q } => {
                for i in 0..3 {
                    for j in 0..3 {
                        for a in 0..3 {
                            for b in 0..3 {
                                let v = q[i][j][a][b];
                                if !v.is_finite()
                                    || (v - q[j][i][a][b]).abs() > 1e-14
                                    || (v - q[i][j][b][a]).abs() > 1e-14
                                {
                                    return Err(Error::InvalidModel(
                                        "Q must be finite and symmetric in (i,j) and in (k,l)"
                                            .into(),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            MetricKind::ConformallyFlat { a2, a4 } => {
                let r2 = chart_radius * chart_radius;
                let phi_min = [0.0, r2]
                    .into_iter()
                    .chain((-a2 / (2.0 * a4) > 0.0).then(|| -a2 / (2.0 * a4)))
                    .filter(|u| *u >= 0.0 && *u <= r2)
                    .map(|u| 1.0 + a2 * u + a4 * u * u)
                    .fold(f64::INFINITY, f64::min);
                if !(a2.is_finite() && a4.is_finite()) || !(phi_min > 0.0) {
                    return Err(Error::InvalidModel(
                        "conformal factor must stay positive on the chart".into(),
                    ));
                }
            }
            MetricKind::Flat | MetricKind::Custom { .. } => {}
        }
        k.validate()?;
        let model = Self {
            chart_radius,
            metric,
            k,
        };
        model.check_positive_definite()?;
        Ok(model)
    }

    pub fn flat(chart_radius: f64, k: AffineK) -> Result<Self> {
        Self::new(chart_radius, MetricKind::Flat, k)
    }

    pub fn round_sphere(curvature: f64, chart_radius: f64, k: AffineK) -> Result<Self> {
        Self::new(chart_radius, MetricKind::RoundSphere { curvature }, k)
    }

    pub fn schwarzschild(mass: f64, chart_radius: f64, k: AffineK) -> Result<Self> {
        Self::new(chart_radius, MetricKind::Schwarzschild { mass }, k)
    }

    pub fn conformally_flat(a2: f64, a4: f64, chart_radius: f64, k: AffineK) -> Result<Self> {
        Self::new(chart_radius, MetricKind::ConformallyFlat { a2, a4 }, k)
    }

    pub fn perturbed_flat(q: Tensor4, chart_radius: f64, k: AffineK) -> Result<Self> {
        Self::new(chart_radius, MetricKind::PerturbedFlat { q }, k)
    }

    pub fn custom(
        name: impl Into<String>,
        field: MetricFn,
        chart_radius: f64,
        k: AffineK,
    ) -> Result<Self> {
        Self::new(
            chart_radius,
            MetricKind::Custom {
                name: name.into(),
                field,
            },
            k,
        )
    }

    pub fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    pub fn metric_kind(&self) -> &MetricKind {
        &self.metric
    }

    pub fn extrinsic(&self) -> &AffineK {
        &self.k
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.metric, MetricKind::Flat)
    }

    /// Same metric with different extrinsic data.
    pub fn with_extrinsic(&self, k: AffineK) -> Result<Self> {
        Self::new(self.chart_radius, self.metric.clone(), k)
    }

    /// Checks that `x` lies in the chart domain.
    pub fn check_domain(&self, x: [f64; 3]) -> Result<()> {
        let r = from_array(x).norm();
        if !r.is_finite() || r >= self.chart_radius {
            return Err(Error::domain(
                x,
                format!("|x| = {r} >= chart radius {}", self.chart_radius),
            ));
        }
        if let MetricKind::Schwarzschild { mass } = self.metric {
            if r <= 0.5 * mass {
                return Err(Error::domain(
                    x,
                    format!("|x| = {r} inside the horizon m/2 = {}", 0.5 * mass),
                ));
            }
        }
        Ok(())
    }

    fn check_positive_definite(&self) -> Result<()> {
        let n = 6;
        let step = 0.95 * self.chart_radius / n as f64;
        for a in -n..=n {
            for b in -n..=n {
                for c in -n..=n {
                    let x = [a as f64 * step, b as f64 * step, c as f64 * step];
                    if self.check_domain(x).is_err() {
                        continue;
                    }
                    let g = self.metric.value(x, self.chart_radius);
                    if !g.iter().all(|v| v.is_finite())
                        || (g - g.transpose()).abs().max() > 1e-12 * g.abs().max()
                        || g.cholesky().is_none()
                    {
                        return Err(Error::InvalidModel(format!(
                            "metric is not symmetric positive definite at {x:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Metric components `g_ij(x)`.
    pub fn metric_at(&self, x: [f64; 3]) -> Result<Mat3> {
        self.check_domain(x)?;
        Ok(self.metric.value(x, self.chart_radius))
    }

    fn jets(&self, x: [f64; 3], deg: u8) -> Result<CurvatureJets> {
        self.check_domain(x)?;
        let g = self.metric.jets(x, deg, self.chart_radius);
        let g0 = jet_values(&g);
        if g0.cholesky().is_none() {
            return Err(Error::SingularMetric { point: x });
        }
        Ok(curvature_jets(g))
    }

    /// Full ambient evaluation including the scalar-curvature gradient.
    pub fn curvature_at(&self, x: [f64; 3]) -> Result<AmbientEval> {
        let cj = self.jets(x, 3)?;
        let g = jet_values(&cj.g);
        let g_inv = jet_values(&cj.g_inv);
        let christoffel: Tensor3 = std::array::from_fn(|l| {
            std::array::from_fn(|i| std::array::from_fn(|j| cj.christoffel[l][i][j].value()))
        });
        let mut riemann = ZERO4;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        riemann[a][b][c][d] = (0..3)
                            .map(|e| g[(a, e)] * cj.riemann_up[e][b][c][d].value())
                            .sum();
                    }
                }
            }
        }
        let ricci = jet_values(&cj.ricci);
        let scalar = cj.scalar.value();
        let grad_scalar = cj.scalar.gradient();
        let einstein = ricci - g * (0.5 * scalar);
        let ext = self.extrinsic_from(x, &g_inv, &christoffel);
        Ok(AmbientEval {
            point: x,
            g,
            g_inv,
            christoffel,
            riemann,
            ricci,
            scalar,
            grad_scalar,
            einstein,
            k: ext.k,
            grad_k: ext.grad_k,
            tr_k: ext.tr_k,
            norm_k2: ext.norm_k2,
        })
    }

    fn extrinsic_from(&self, x: [f64; 3], g_inv: &Mat3, christoffel: &Tensor3) -> ExtrinsicEval {
        let k = self.k.at(x);
        let grad_k = covariant_k(&k, &self.k.k1, christoffel);
        let (tr_k, norm_k2) = traces(&k, g_inv);
        ExtrinsicEval {
            k,
            grad_k,
            tr_k,
            norm_k2,
        }
    }

    /// `K`, its covariant derivative and its traces at `x`.
    pub fn extrinsic_at(&self, x: [f64; 3]) -> Result<ExtrinsicEval> {
        self.check_domain(x)?;
        let (g_inv, christoffel) = if self.is_flat() {
            (Mat3::identity(), ZERO3)
        } else {
            let g = self.metric.jets(x, 1, self.chart_radius);
            let g0 = jet_values(&g);
            let g_inv = g0.try_inverse().ok_or(Error::SingularMetric { point: x })?;
            let mut christoffel = ZERO3;
            for l in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        let mut s = 0.0;
                        for m in 0..3 {
                            let d = |a: usize, b: usize, c: usize| g[a][b].gradient()[c];
                            s += g_inv[(l, m)] * 0.5 * (d(m, j, i) + d(m, i, j) - d(i, j, m));
                        }
                        christoffel[l][i][j] = s;
                    }
                }
            }
            (g_inv, christoffel)
        };
        Ok(self.extrinsic_from(x, &g_inv, &christoffel))
    }

    /// Per-node ambient data: metric, connection, Ricci and scalar curvature.
    pub(crate) fn node_ambient(&self, x: [f64; 3]) -> Result<NodeAmbient> {
        if self.is_flat() {
            self.check_domain(x)?;
            let k = self.k.at(x);
            return Ok(NodeAmbient {
                g: Mat3::identity(),
                g_inv: Mat3::identity(),
                christoffel: ZERO3,
                ricci: Mat3::zeros(),
                scalar: 0.0,
                grad_k: self.k.k1,
                k,
            });
        }
        let cj = self.jets(x, 2)?;
        let g = jet_values(&cj.g);
        let g_inv = jet_values(&cj.g_inv);
        let christoffel: Tensor3 = std::array::from_fn(|l| {
            std::array::from_fn(|i| std::array::from_fn(|j| cj.christoffel[l][i][j].value()))
        });
        let ricci = jet_values(&cj.ricci);
        let scalar = cj.scalar.value();
        let k = self.k.at(x);
        let grad_k = covariant_k(&k, &self.k.k1, &christoffel);
        Ok(NodeAmbient {
            g,
            g_inv,
            christoffel,
            ricci,
            scalar,
            k,
            grad_k,
        })
    }

    /// Scalar fields built from `Sc`, `(tr K)²` and `|K|²` with their
    /// coordinate gradients: returns `(Sc, trK², |K|²)` as degree-1 jets.
    fn scalar_invariant_jets(&self, x: [f64; 3]) -> Result<(Jet, Jet, Jet)> {
        let cj = self.jets(x, 3)?;
        let k = self.k.jets(x, 3);
        let mut tr = Jet::zero(3);
        for i in 0..3 {
            for j in 0..3 {
                tr = tr + cj.g_inv[i][j] * k[i][j];
            }
        }
        let mut mixed = [[Jet::zero(3); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = Jet::zero(3);
                for l in 0..3 {
                    s = s + cj.g_inv[i][l] * k[l][j];
                }
                mixed[i][j] = s;
            }
        }
        let mut norm2 = Jet::zero(3);
        for i in 0..3 {
            for j in 0..3 {
                norm2 = norm2 + mixed[i][j] * mixed[j][i];
            }
        }
        Ok((cj.scalar, (tr * tr).truncate(1), norm2.truncate(1)))
    }

    /// `w_sc Sc + w_tr (tr K)² + w_norm |K|²` and its gradient.
    pub fn invariant_combination(
        &self,
        x: [f64; 3],
        w_sc: f64,
        w_tr: f64,
        w_norm: f64,
    ) -> Result<(f64, [f64; 3])> {
        let (sc, tr2, n2) = self.scalar_invariant_jets(x)?;
        let f = sc.truncate(1) * w_sc + tr2 * w_tr + n2 * w_norm;
        Ok((f.value(), f.gradient()))
    }

    /// Concentration potential `Φ = Sc + (3/5)(tr K)² + (1/5)|K|²` and its gradient.
    pub fn concentration_potential(&self, x: [f64; 3]) -> Result<(f64, [f64; 3])> {
        self.invariant_combination(x, 1.0, 0.6, 0.2)
    }

    /// `16πρ = Sc + (tr K)² - |K|²` and its gradient.
    pub fn energy_density16pi(&self, x: [f64; 3]) -> Result<(f64, [f64; 3])> {
        self.invariant_combination(x, 1.0, 1.0, -1.0)
    }

    /// Gradients of `(tr K)²` and `|K|²` at `x`.
    pub fn extrinsic_invariant_gradients(&self, x: [f64; 3]) -> Result<([f64; 3], [f64; 3])> {
        let (_, tr2, n2) = self.scalar_invariant_jets(x)?;
        Ok((tr2.gradient(), n2.gradient()))
    }

    /// The same model rotated about the chart origin by `r`.
    pub fn rotated(&self, r: &Mat3) -> Result<Self> {
        let metric = match &self.metric {
            MetricKind::PerturbedFlat { q } => MetricKind::PerturbedFlat { q: rotate4(q, r) },
            MetricKind::Custom { name, field } => {
                let field = field.clone();
                let r = *r;
                MetricKind::Custom {
                    name: name.clone(),
                    field: Arc::new(move |x: [f64; 3]| {
                        let back = r.transpose() * from_array(x);
                        r * field([back[0], back[1], back[2]]) * r.transpose()
                    }),
                }
            }
            other => other.clone(),
        };
        Self::new(self.chart_radius, metric, self.k.rotated(r))
    }
}

/// Euclidean-normalized 3x3 matrix square root of a symmetric positive
/// definite matrix and its inverse.
pub(crate) fn sqrt_spd(m: &Mat3) -> (Mat3, Mat3) {
    let eig = m.symmetric_eigen();
    let d = eig.eigenvalues.map(|v| v.sqrt());
    let q = eig.eigenvectors;
    let root = q * Mat3::from_diagonal(&d) * q.transpose();
    let inv = q * Mat3::from_diagonal(&d.map(|v| 1.0 / v)) * q.transpose();
    (root, inv)
}

/// Algebraic curvature tensor `R_ijkl = S_ik δ_jl + S_jl δ_ik - S_il δ_jk - S_jk δ_il`
/// built from a symmetric `S`; every 3-dimensional curvature tensor has this form.
pub fn curvature_tensor_from_schouten(s: &Mat3) -> Tensor4 {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut r = ZERO4;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    r[i][j][k][l] = s[(i, k)] * d(j, l) + s[(j, l)] * d(i, k)
                        - s[(i, l)] * d(j, k)
                        - s[(j, k)] * d(i, l);
                }
            }
        }
    }
    r
}

/// Quadratic coefficients `Q_ijkl = -(1/3) R_ikjl` of the second-order normal
/// coordinate expansion of a metric with curvature tensor `R` at the origin.
pub fn normal_coordinate_quadratic(riemann: &Tensor4) -> Tensor4 {
    let mut q = ZERO4;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let v = -(riemann[i][k][j][l] + riemann[i][l][j][k]) / 6.0;
                    q[i][j][k][l] = v;
                }
            }
        }
    }
    q
}
