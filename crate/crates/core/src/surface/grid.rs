use std::f64::consts::PI;

use serde::Serialize;

use super::sh::{legendre_with_derivatives, sh_count, sh_index, tri};
use crate::error::{Error, Result};
use crate::tensor::compensated_sum;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes descending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

struct Ring {
    cos_theta: f64,
    sin_theta: f64,
    /// Gauss weight times the uniform φ weight.
    weight: f64,
    p: Vec<f64>,
    dp: Vec<f64>,
    d2p: Vec<f64>,
}

/// Samples of a field and its parameter derivatives at one node:
/// `[f, f_θ, f_φ, f_θθ, f_θφ, f_φφ]`.
pub type Derivs = [f64; 6];

/// Tensor-product quadrature on the unit sphere.
#[derive(Serialize)]
pub struct QuadratureGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub exactness_degree: usize,
    /// Unit directions, ring-major.
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// `(θ, φ)` of every node.
    pub angles: Vec<[f64; 2]>,
    #[serde(skip)]
    rings: Vec<Ring>,
    #[serde(skip)]
    cos_m: Vec<Vec<f64>>,
    #[serde(skip)]
    sin_m: Vec<Vec<f64>>,
}

impl std::fmt::Debug for QuadratureGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadratureGrid")
            .field("n_theta", &self.n_theta)
            .field("n_phi", &self.n_phi)
            .field("exactness_degree", &self.exactness_degree)
            .finish()
    }
}

impl QuadratureGrid {
    pub fn new(n_theta: usize) -> Result<Self> {
        if n_theta < 4 {
            return Err(Error::InvalidInput(format!(
                "n_theta must be at least 4, got {n_theta}"
            )));
        }
        let n_phi = 2 * n_theta;
        let band = n_theta - 1;
        let (xs, ws) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let phis: Vec<f64> = (0..n_phi).map(|j| j as f64 * dphi).collect();
        let rings: Vec<Ring> = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| {
                let s = (1.0 - x * x).sqrt();
                let (p, dp, d2p) = legendre_with_derivatives(band, x, s);
                Ring {
                    cos_theta: x,
                    sin_theta: s,
                    weight: w * dphi,
                    p,
                    dp,
                    d2p,
                }
            })
            .collect();
        let cos_m = (0..=band)
            .map(|m| phis.iter().map(|p| (m as f64 * p).cos()).collect())
            .collect();
        let sin_m = (0..=band)
            .map(|m| phis.iter().map(|p| (m as f64 * p).sin()).collect())
            .collect();
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let mut angles = Vec::with_capacity(n_theta * n_phi);
        for r in &rings {
            let theta = r.cos_theta.acos();
            for &phi in &phis {
                nodes.push([
                    r.sin_theta * phi.cos(),
                    r.sin_theta * phi.sin(),
                    r.cos_theta,
                ]);
                weights.push(r.weight);
                angles.push([theta, phi]);
            }
        }
        Ok(Self {
            n_theta,
            n_phi,
            exactness_degree: 2 * n_theta - 1,
            nodes,
            weights,
            angles,
            rings,
            cos_m,
            sin_m,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest band that is transformed without aliasing.
    pub fn band(&self) -> usize {
        self.n_theta - 1
    }

    pub fn sin_theta(&self, node: usize) -> f64 {
        self.rings[node / self.n_phi].sin_theta
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::GridMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    /// `∫ f dΩ` over the unit sphere.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        compensated_sum(f.iter().zip(&self.weights).map(|(v, w)| v * w))
    }

    /// Samples of a single `Y_lm`.
    pub fn basis_values(&self, l: usize, m: i64) -> Vec<f64> {
        let mut c = vec![0.0; sh_count(l)];
        c[sh_index(l, m)] = 1.0;
        self.synthesize(&c)
    }

    /// Projects node samples onto `Y_lm`, `l ≤ l_max`.
    pub fn analyze(&self, f: &[f64], l_max: usize) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        let l_max = l_max.min(self.band());
        let mut out = vec![0.0; sh_count(l_max)];
        let sqrt2 = std::f64::consts::SQRT_2;
        for (i, ring) in self.rings.iter().enumerate() {
            let row = &f[i * self.n_phi..(i + 1) * self.n_phi];
            for m in 0..=l_max {
                let c: f64 = row.iter().zip(&self.cos_m[m]).map(|(a, b)| a * b).sum();
                let s: f64 = row.iter().zip(&self.sin_m[m]).map(|(a, b)| a * b).sum();
                for l in m..=l_max {
                    let p = ring.p[tri(l, m)] * ring.weight;
                    if m == 0 {
                        out[sh_index(l, 0)] += p * c;
                    } else {
                        out[sh_index(l, m as i64)] += sqrt2 * p * c;
                        out[sh_index(l, -(m as i64))] += sqrt2 * p * s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Projects onto the full alias-free band.
    pub fn project(&self, f: &[f64]) -> Result<Vec<f64>> {
        let c = self.analyze(f, self.band())?;
        Ok(self.synthesize(&c))
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.synthesize_derivs(coeffs)
            .into_iter()
            .map(|d| d[0])
            .collect()
    }

    /// Values and parameter derivatives of an SH expansion at every node.
    pub fn synthesize_derivs(&self, coeffs: &[f64]) -> Vec<Derivs> {
        let l_max = (coeffs.len() as f64).sqrt() as usize - 1;
        assert_eq!(
            sh_count(l_max),
            coeffs.len(),
            "coefficient vector has no complete band"
        );
        assert!(l_max <= self.band(), "expansion exceeds the grid band");
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut out = vec![[0.0; 6]; self.len()];
        for (i, ring) in self.rings.iter().enumerate() {
            let row = &mut out[i * self.n_phi..(i + 1) * self.n_phi];
            for m in 0..=l_max {
                // Ring sums for the cosine and sine parts: value, θ, θθ.
                let mut cs = [0.0; 3];
                let mut sn = [0.0; 3];
                for l in m..=l_max {
                    let k = tri(l, m);
                    let (p, dp, d2p) = (ring.p[k], ring.dp[k], ring.d2p[k]);
                    if m == 0 {
                        let a = coeffs[sh_index(l, 0)];
                        cs[0] += a * p;
                        cs[1] += a * dp;
                        cs[2] += a * d2p;
                    } else {
                        let a = sqrt2 * coeffs[sh_index(l, m as i64)];
                        let b = sqrt2 * coeffs[sh_index(l, -(m as i64))];
                        cs[0] += a * p;
                        cs[1] += a * dp;
                        cs[2] += a * d2p;
                        sn[0] += b * p;
                        sn[1] += b * dp;
                        sn[2] += b * d2p;
                    }
                }
                let mf = m as f64;
                for (j, d) in row.iter_mut().enumerate() {
                    let (c, s) = (self.cos_m[m][j], self.sin_m[m][j]);
                    d[0] += cs[0] * c + sn[0] * s;
                    d[1] += cs[1] * c + sn[1] * s;
                    d[2] += mf * (sn[0] * c - cs[0] * s);
                    d[3] += cs[2] * c + sn[2] * s;
                    d[4] += mf * (sn[1] * c - cs[1] * s);
                    d[5] -= mf * mf * (cs[0] * c + sn[0] * s);
                }
            }
        }
        out
    }

    /// Spectral first derivatives `(f_θ, f_φ)` of node samples.
    pub fn parameter_gradient(&self, f: &[f64]) -> Result<Vec<[f64; 2]>> {
        let c = self.analyze(f, self.band())?;
        Ok(self
            .synthesize_derivs(&c)
            .into_iter()
            .map(|d| [d[1], d[2]])
            .collect())
    }
}
