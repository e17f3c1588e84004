//! Metric families and their Taylor jets.

use std::fmt;
use std::sync::Arc;

use crate::jet::{Jet, JetMatrix};
use crate::tensor::{Mat3, Tensor4};

/// User-supplied metric field `x -> g(x)`.
pub type MetricFn = Arc<dyn Fn([f64; 3]) -> Mat3 + Send + Sync>;

#[derive(Clone)]
pub enum MetricKind {
    Flat,
    /// Round 3-sphere of sectional curvature `curvature`, in geodesic normal
    /// coordinates around a point.
    RoundSphere {
        curvature: f64,
    },
    /// Time-symmetric Schwarzschild slice in isotropic coordinates,
    /// `g = (1 + m / 2|x|)^4 δ`.
    Schwarzschild {
        mass: f64,
    },
    /// `g_ij = δ_ij + Q_ijkl x^k x^l`.
    PerturbedFlat {
        q: Tensor4,
    },
    /// `g = φ⁴ δ` with `φ = 1 + a2 |x|² + a4 |x|⁴`; `Sc = -8 Δφ / φ⁵`.
    ConformallyFlat {
        a2: f64,
        a4: f64,
    },
    /// Sampled metric differentiated with fourth-order central differences.
    Custom {
        name: String,
        field: MetricFn,
    },
}

impl fmt::Debug for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Flat => write!(f, "Flat"),
            MetricKind::RoundSphere { curvature } => {
                write!(f, "RoundSphere {{ curvature: {curvature} }}")
            }
            MetricKind::Schwarzschild { mass } => write!(f, "Schwarzschild {{ mass: {mass} }}"),
            MetricKind::PerturbedFlat { q } => write!(f, "PerturbedFlat {{ q: {q:?} }}"),
            MetricKind::ConformallyFlat { a2, a4 } => {
                write!(f, "ConformallyFlat {{ a2: {a2}, a4: {a4} }}")
            }
            MetricKind::Custom { name, .. } => write!(f, "Custom {{ name: {name:?} }}"),
        }
    }
}

impl MetricKind {
    pub fn name(&self) -> &str {
        match self {
            MetricKind::Flat => "flat",
            MetricKind::RoundSphere { .. } => "round-3-sphere",
            MetricKind::Schwarzschild { .. } => "schwarzschild-slice",
            MetricKind::PerturbedFlat { .. } => "perturbed-flat",
            MetricKind::ConformallyFlat { .. } => "conformally-flat",
            MetricKind::Custom { name, .. } => name,
        }
    }

    /// Plain metric value.
    pub fn value(&self, x: [f64; 3], chart_radius: f64) -> Mat3 {
        match self {
            MetricKind::Flat => Mat3::identity(),
            MetricKind::PerturbedFlat { q } => {
                let mut g = Mat3::identity();
                for i in 0..3 {
                    for j in 0..3 {
                        let mut s = 0.0;
                        for k in 0..3 {
                            for l in 0..3 {
                                s += q[i][j][k][l] * x[k] * x[l];
                            }
                        }
                        g[(i, j)] += s;
                    }
                }
                g
            }
            MetricKind::Custom { field, .. } => field(x),
            _ => {
                let jets = self.jets(x, 0, chart_radius);
                Mat3::from_fn(|i, j| jets[i][j].value())
            }
        }
    }

    /// Taylor jets of the metric components around `x`, valid to `deg`.
    pub fn jets(&self, x: [f64; 3], deg: u8, chart_radius: f64) -> JetMatrix {
        let vars = [
            Jet::variable(0, x[0], deg),
            Jet::variable(1, x[1], deg),
            Jet::variable(2, x[2], deg),
        ];
        let one = Jet::constant(1.0, deg);
        let zero = Jet::zero(deg);
        match self {
            MetricKind::Flat => {
                let mut g = [[zero; 3]; 3];
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = one;
                }
                g
            }
            MetricKind::RoundSphere { curvature } => {
                let kappa = *curvature;
                let u = vars[0] * vars[0] + vars[1] * vars[1] + vars[2] * vars[2];
                let t = u * (4.0 * kappa);
                let c = t.compose(cosine_ratio(t.value()));
                let d = t.compose(cosine_remainder(t.value()));
                let mut g = [[zero; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        let mut gij = d * vars[i] * vars[j] * (4.0 * kappa);
                        if i == j {
                            gij = gij + c * 2.0;
                        }
                        g[i][j] = gij;
                    }
                }
                g
            }
            MetricKind::Schwarzschild { mass } => {
                let u = vars[0] * vars[0] + vars[1] * vars[1] + vars[2] * vars[2];
                let psi = u.sqrt().recip() * (0.5 * mass) + 1.0;
                let conformal = psi.powi(4);
                let mut g = [[zero; 3]; 3];
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = conformal;
                }
                g
            }
            MetricKind::ConformallyFlat { a2, a4 } => {
                let u = vars[0] * vars[0] + vars[1] * vars[1] + vars[2] * vars[2];
                let phi = u * *a2 + u * u * *a4 + 1.0;
                let conformal = phi.powi(4);
                let mut g = [[zero; 3]; 3];
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = conformal;
                }
                g
            }
            MetricKind::PerturbedFlat { q } => {
                let mut g = [[zero; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        let mut s = if i == j { one } else { zero };
                        for k in 0..3 {
                            for l in 0..3 {
                                if q[i][j][k][l] != 0.0 {
                                    s = s + vars[k] * vars[l] * q[i][j][k][l];
                                }
                            }
                        }
                        g[i][j] = s;
                    }
                }
                g
            }
            MetricKind::Custom { field, .. } => {
                finite_difference_jets(field.as_ref(), x, deg, 1e-3 * chart_radius)
            }
        }
    }
}

/// Value and first three derivatives of `C(t) = (1 - cos √t) / t`.
pub(crate) fn cosine_ratio(t: f64) -> [f64; 4] {
    if t < 0.5 {
        // C(t) = Σ (-1)^n t^n / (2n + 2)!
        series_derivatives(t, |n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign / factorial(2 * n + 2)
        })
    } else {
        let tj = Jet::variable(0, t, 3);
        let c = (-tj.sqrt().cos() + 1.0) * tj.recip();
        jet_to_univariate(&c)
    }
}

/// Value and first three derivatives of `D(t) = (1 - 2 C(t)) / t`.
pub(crate) fn cosine_remainder(t: f64) -> [f64; 4] {
    if t < 0.5 {
        // D(t) = Σ (-1)^m 2 t^m / (2m + 4)!
        series_derivatives(t, |m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            2.0 * sign / factorial(2 * m + 4)
        })
    } else {
        let tj = Jet::variable(0, t, 3);
        let c = (-tj.sqrt().cos() + 1.0) * tj.recip();
        let d = (-(c * 2.0) + 1.0) * tj.recip();
        jet_to_univariate(&d)
    }
}

fn jet_to_univariate(j: &Jet) -> [f64; 4] {
    [
        j.value(),
        j.partial([1, 0, 0]),
        j.partial([2, 0, 0]),
        j.partial([3, 0, 0]),
    ]
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn series_derivatives(t: f64, coeff: impl Fn(usize) -> f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for n in 0..24usize {
        let a = coeff(n);
        for (k, slot) in out.iter_mut().enumerate() {
            if n >= k {
                let falling: f64 = (0..k).map(|i| (n - i) as f64).product();
                *slot += a * falling * t.powi((n - k) as i32);
            }
        }
    }
    out
}

const D1: [(i32, f64); 4] = [
    (-2, 1.0 / 12.0),
    (-1, -8.0 / 12.0),
    (1, 8.0 / 12.0),
    (2, -1.0 / 12.0),
];
const D2: [(i32, f64); 5] = [
    (-2, -1.0 / 12.0),
    (-1, 16.0 / 12.0),
    (0, -30.0 / 12.0),
    (1, 16.0 / 12.0),
    (2, -1.0 / 12.0),
];
const D3: [(i32, f64); 6] = [
    (-3, 1.0 / 8.0),
    (-2, -1.0),
    (-1, 13.0 / 8.0),
    (1, -13.0 / 8.0),
    (2, 1.0),
    (3, -1.0 / 8.0),
];

fn stencil(order: u8) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &D1,
        2 => &D2,
        _ => &D3,
    }
}

/// Mixed partial derivative of a matrix field with tensor-product
/// fourth-order central stencils.
fn mixed_partial(
    field: &(dyn Fn([f64; 3]) -> Mat3 + Send + Sync),
    x: [f64; 3],
    e: [u8; 3],
    h: f64,
) -> Mat3 {
    let mut acc = Mat3::zeros();
    for &(o0, w0) in stencil(e[0]) {
        for &(o1, w1) in stencil(e[1]) {
            for &(o2, w2) in stencil(e[2]) {
                let p = [
                    x[0] + o0 as f64 * h,
                    x[1] + o1 as f64 * h,
                    x[2] + o2 as f64 * h,
                ];
                acc += field(p) * (w0 * w1 * w2);
            }
        }
    }
    let total = (e[0] + e[1] + e[2]) as i32;
    acc / h.powi(total)
}

pub(crate) fn finite_difference_jets(
    field: &(dyn Fn([f64; 3]) -> Mat3 + Send + Sync),
    x: [f64; 3],
    deg: u8,
    h: f64,
) -> JetMatrix {
    let mut g = [[Jet::zero(deg); 3]; 3];
    for d in 0..=deg {
        for a in (0..=d).rev() {
            for b in (0..=(d - a)).rev() {
                let e = [a, b, d - a - b];
                let partial = if d == 0 {
                    field(x)
                } else {
                    mixed_partial(field, x, e, h)
                };
                let norm =
                    factorial(e[0] as usize) * factorial(e[1] as usize) * factorial(e[2] as usize);
                for i in 0..3 {
                    for j in 0..3 {
                        // Symmetrize to suppress round-off asymmetry.
                        let v = 0.5 * (partial[(i, j)] + partial[(j, i)]);
                        g[i][j].set_coeff(e, v / norm);
                    }
                }
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_series_and_closed_form_agree_at_switch() {
        let below = cosine_ratio(0.4999999);
        let above = cosine_ratio(0.5);
        for k in 0..4 {
            assert!(
                (below[k] - above[k]).abs() < 1e-7,
                "k={k}: {below:?} vs {above:?}"
            );
        }
        let below = cosine_remainder(0.4999999);
        let above = cosine_remainder(0.5);
        for k in 0..4 {
            assert!(
                (below[k] - above[k]).abs() < 1e-7,
                "k={k}: {below:?} vs {above:?}"
            );
        }
    }

    #[test]
    fn cosine_ratio_limits() {
        let c = cosine_ratio(0.0);
        assert!((c[0] - 0.5).abs() < 1e-16);
        assert!((c[1] + 1.0 / 24.0).abs() < 1e-16);
        let d = cosine_remainder(0.0);
        assert!((d[0] - 1.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn third_derivative_stencil_is_exact_on_cubics() {
        let field: MetricFn =
            Arc::new(|p: [f64; 3]| Mat3::identity() * (p[0].powi(3) + p[0] * p[1] * p[2]));
        let jets = finite_difference_jets(field.as_ref(), [0.2, 0.1, -0.3], 3, 1e-2);
        assert!((jets[0][0].partial([3, 0, 0]) - 6.0).abs() < 1e-8);
        assert!((jets[0][0].partial([1, 1, 1]) - 1.0).abs() < 1e-8);
        assert!((jets[1][1].partial([1, 0, 0]) - (3.0 * 0.04 + 0.1 * -0.3)).abs() < 1e-10);
    }
}
