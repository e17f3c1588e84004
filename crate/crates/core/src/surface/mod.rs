//! Spheres as spherical-harmonic radial graphs and their geometry.

mod diagnostics;
mod geometry;
mod grid;
mod laplace;
pub mod sh;

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

pub use diagnostics::{shape_diagnostics, ShapeDiagnostics};
pub use geometry::{embed, EuclideanNode, NodeGeometry, SurfaceGeometry};
pub use grid::{gauss_legendre, Derivs, QuadratureGrid};
pub use laplace::{laplace_beltrami, surface_gradient};
pub use sh::{real_sh_all, sh_count, sh_degree_order, sh_index};

use crate::error::{Error, Result};
use crate::tensor::{from_array, Mat3};

/// Star-shaped sphere `x = center + ρ(ω) ω` with `ρ = Σ a_lm Y_lm`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceShape {
    pub center: [f64; 3],
    pub l_max: usize,
    pub coeffs: Vec<f64>,
}

impl SurfaceShape {
    pub fn new(center: [f64; 3], l_max: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != sh_count(l_max) {
            return Err(Error::InvalidInput(format!(
                "l_max = {l_max} needs {} coefficients, got {}",
                sh_count(l_max),
                coeffs.len()
            )));
        }
        if !coeffs.iter().chain(center.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("shape has non-finite entries".into()));
        }
        Ok(Self {
            center,
            l_max,
            coeffs,
        })
    }

    /// Coordinate sphere of radius `radius`.
    pub fn round(center: [f64; 3], radius: f64, l_max: usize) -> Self {
        let mut coeffs = vec![0.0; sh_count(l_max)];
        coeffs[0] = radius * (4.0 * PI).sqrt();
        Self {
            center,
            l_max,
            coeffs,
        }
    }

    pub fn coeff(&self, l: usize, m: i64) -> f64 {
        if l > self.l_max {
            return 0.0;
        }
        self.coeffs[sh_index(l, m)]
    }

    pub fn set_coeff(&mut self, l: usize, m: i64, value: f64) {
        self.coeffs[sh_index(l, m)] = value;
    }

    /// Mean radius `a_00 / √(4π)`.
    pub fn mean_radius(&self) -> f64 {
        self.coeffs[0] / (4.0 * PI).sqrt()
    }

    /// `ρ` in an arbitrary unit direction.
    pub fn radius_at(&self, dir: [f64; 3]) -> f64 {
        real_sh_all(self.l_max, dir)
            .iter()
            .zip(&self.coeffs)
            .map(|(y, a)| y * a)
            .sum()
    }

    /// Same shape with `ρ` multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            center: self.center,
            l_max: self.l_max,
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    /// Same radial function at a different resolution (zero padded or truncated).
    pub fn with_l_max(&self, l_max: usize) -> Self {
        let mut coeffs = vec![0.0; sh_count(l_max)];
        let n = coeffs.len().min(self.coeffs.len());
        coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        Self {
            center: self.center,
            l_max,
            coeffs,
        }
    }

    /// The image of the shape under the rotation `r` about the chart origin.
    pub fn rotated(&self, r: &Mat3, grid: &QuadratureGrid) -> Result<Self> {
        if self.l_max > grid.band() {
            return Err(Error::InvalidInput(
                "grid band too small to rotate shape".into(),
            ));
        }
        let rt = r.transpose();
        let samples: Vec<f64> = grid
            .nodes
            .iter()
            .map(|n| {
                let back = rt * from_array(*n);
                self.radius_at([back[0], back[1], back[2]])
            })
            .collect();
        let coeffs = grid.analyze(&samples, self.l_max)?;
        let c = r * from_array(self.center);
        Ok(Self {
            center: [c[0], c[1], c[2]],
            l_max: self.l_max,
            coeffs,
        })
    }

    /// The same surface described as a radial graph over `center`, resampled
    /// on `grid` and truncated to the shape's band.
    pub fn recentered(&self, center: [f64; 3], grid: &QuadratureGrid) -> Result<Self> {
        if self.l_max > grid.band() {
            return Err(Error::InvalidInput(
                "grid band too small to recenter shape".into(),
            ));
        }
        let shift = from_array(center) - from_array(self.center);
        let mut samples = Vec::with_capacity(grid.len());
        for n in &grid.nodes {
            let dir = from_array(*n);
            let mut rho = self.mean_radius();
            let mut residual = f64::INFINITY;
            for _ in 0..100 {
                let u = shift + dir * rho;
                let r = u.norm();
                residual = r - self.radius_at([u[0] / r, u[1] / r, u[2] / r]);
                if residual.abs() <= 1e-14 * r {
                    break;
                }
                rho -= residual / (u.dot(&dir) / r);
            }
            if !(residual.abs() <= 1e-12 * rho.abs()) || !(rho > 0.0) {
                return Err(Error::Immersion(format!(
                    "surface is not star-shaped about {center:?}"
                )));
            }
            samples.push(rho);
        }
        let coeffs = grid.analyze(&samples, self.l_max)?;
        Ok(Self {
            center,
            l_max: self.l_max,
            coeffs,
        })
    }

    /// Plain-text form: `center x y z`, `l_max L`, then one `l m a_lm` line per
    /// coefficient. Floats use the shortest representation that round-trips.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = self.center;
        let _ = writeln!(s, "center {} {} {}", c[0], c[1], c[2]);
        let _ = writeln!(s, "l_max {}", self.l_max);
        for l in 0..=self.l_max {
            for m in -(l as i64)..=(l as i64) {
                let _ = writeln!(s, "{} {} {}", l, m, self.coeffs[sh_index(l, m)]);
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidInput(format!("shape file: {msg}"));
        let mut center = None;
        let mut l_max = None;
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| bad(format!("line {}: {e}", n + 1)))
            };
            match parts[0] {
                "center" if parts.len() == 4 => {
                    center = Some([num(parts[1])?, num(parts[2])?, num(parts[3])?]);
                }
                "l_max" if parts.len() == 2 => {
                    l_max = Some(
                        parts[1]
                            .parse::<usize>()
                            .map_err(|e| bad(format!("line {}: {e}", n + 1)))?,
                    );
                }
                _ if parts.len() == 3 => {
                    let l = parts[0]
                        .parse::<usize>()
                        .map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
                    let m = parts[1]
                        .parse::<i64>()
                        .map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
                    entries.push((l, m, num(parts[2])?));
                }
                _ => return Err(bad(format!("line {}: cannot parse {line:?}", n + 1))),
            }
        }
        let center = center.ok_or_else(|| bad("missing center line".into()))?;
        let l_max = l_max.ok_or_else(|| bad("missing l_max line".into()))?;
        let mut coeffs = vec![0.0; sh_count(l_max)];
        for (l, m, v) in entries {
            if l > l_max || m.unsigned_abs() as usize > l {
                return Err(bad(format!("invalid index ({l}, {m})")));
            }
            coeffs[sh_index(l, m)] = v;
        }
        Self::new(center, l_max, coeffs)
    }
}
