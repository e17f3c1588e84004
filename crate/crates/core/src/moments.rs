//! Exact sphere moments, c-moments and the concentration vectors `V` and `W`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ambient::{sqrt_spd, AffineK, ManifoldModel};
use crate::error::{Error, Result};
use crate::functionals::LagrangianSpec;
use crate::surface::QuadratureGrid;
use crate::tensor::{Mat3, Tensor3, ZERO3};

pub const MAX_MOMENT_DEGREE: usize = 6;

/// A rational multiple of `π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PiMultiple(pub Ratio<i64>);

impl PiMultiple {
    pub fn value(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64 * PI
    }
}

impl fmt::Display for PiMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (*self.0.numer(), *self.0.denom());
        match (n, d) {
            (0, _) => write!(f, "0"),
            (1, 1) => write!(f, "π"),
            (n, 1) => write!(f, "{n}π"),
            (1, d) => write!(f, "π/{d}"),
            (n, d) => write!(f, "{n}π/{d}"),
        }
    }
}

fn double_factorial(n: i64) -> i64 {
    (1..=n).rev().step_by(2).product::<i64>().max(1)
}

/// `∫_{S²} ν^{α₁} ⋯ ν^{α_n} dΩ` for axes `α_i ∈ {0, 1, 2}`.
///
/// Each even axis power `2k` contributes `(2k - 1)!!` δ-pairings and the
/// integral is the pairing count times `4π / (n + 1)!!`.
pub fn exact_monomial_integral(axes: &[usize]) -> Result<PiMultiple> {
    let n = axes.len();
    if n > MAX_MOMENT_DEGREE {
        return Err(Error::UnsupportedDegree { degree: n });
    }
    let mut counts = [0i64; 3];
    for &a in axes {
        if a > 2 {
            return Err(Error::InvalidInput(format!("moment axis {a} out of range")));
        }
        counts[a] += 1;
    }
    Ok(monomial_by_exponents(counts))
}

fn monomial_by_exponents(counts: [i64; 3]) -> PiMultiple {
    if counts.iter().any(|c| c % 2 == 1) {
        return PiMultiple(Ratio::from_integer(0));
    }
    let n: i64 = counts.iter().sum();
    let pairings: i64 = counts.iter().map(|&c| double_factorial(c - 1)).product();
    PiMultiple(Ratio::new(4 * pairings, double_factorial(n + 1)))
}

/// Parses a 1-based multi-index such as `"1,1,2,2"`.
pub fn parse_moment_key(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| match t.trim().parse::<usize>() {
            Ok(v @ 1..=3) => Ok(v - 1),
            _ => Err(Error::InvalidInput(format!(
                "moment index {t:?} must be 1, 2 or 3"
            ))),
        })
        .collect()
}

/// Polynomial in the components of `ν`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NuPoly {
    terms: BTreeMap<[u8; 3], f64>,
}

impl NuPoly {
    pub fn constant(c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert([0, 0, 0], c);
        }
        Self { terms }
    }

    pub fn component(axis: usize) -> Self {
        let mut e = [0u8; 3];
        e[axis] = 1;
        Self {
            terms: BTreeMap::from([(e, 1.0)]),
        }
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&v| v as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, nu: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * nu[0].powi(e[0] as i32) * nu[1].powi(e[1] as i32) * nu[2].powi(e[2] as i32)
            })
            .sum()
    }

    /// `∫_{S²} p(ν) dΩ` from exact moments.
    pub fn integrate_exact(&self) -> Result<f64> {
        let mut total = 0.0;
        for (e, c) in &self.terms {
            let deg: usize = e.iter().map(|&v| v as usize).sum();
            if deg > MAX_MOMENT_DEGREE {
                return Err(Error::UnsupportedDegree { degree: deg });
            }
            total += c * monomial_by_exponents([e[0] as i64, e[1] as i64, e[2] as i64]).value();
        }
        Ok(total)
    }
}

impl Add for NuPoly {
    type Output = NuPoly;
    fn add(mut self, rhs: NuPoly) -> NuPoly {
        for (e, c) in rhs.terms {
            *self.terms.entry(e).or_insert(0.0) += c;
        }
        self
    }
}

impl Sub for NuPoly {
    type Output = NuPoly;
    fn sub(self, rhs: NuPoly) -> NuPoly {
        self + rhs * -1.0
    }
}

impl Mul for NuPoly {
    type Output = NuPoly;
    fn mul(self, rhs: NuPoly) -> NuPoly {
        let mut out = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                *out.entry(e).or_insert(0.0) += x * y;
            }
        }
        NuPoly { terms: out }
    }
}

impl Mul<f64> for NuPoly {
    type Output = NuPoly;
    fn mul(mut self, rhs: f64) -> NuPoly {
        for c in self.terms.values_mut() {
            *c *= rhs;
        }
        self
    }
}

/// Values that can stand in for a function of `ν`: exact polynomials or
/// pointwise samples.
pub trait NuAlgebra:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self>
{
    fn lift(c: f64) -> Self;
}

impl NuAlgebra for NuPoly {
    fn lift(c: f64) -> Self {
        NuPoly::constant(c)
    }
}

impl NuAlgebra for f64 {
    fn lift(c: f64) -> Self {
        c
    }
}

/// `K` and `∇K` at a point, in a `g`-orthonormal frame.
#[derive(Clone, Debug, Serialize)]
pub struct FrameData {
    pub k: Mat3,
    /// `dk[i][j][k] = ∇_k K_ij`.
    pub dk: Tensor3,
    /// Scalar-curvature gradient in the same frame.
    pub grad_scalar: [f64; 3],
}

impl FrameData {
    /// Frame `E = g(a)^{-1/2}` applied to every slot.
    pub fn at(model: &ManifoldModel, a: [f64; 3]) -> Result<Self> {
        let amb = model.curvature_at(a)?;
        let (_, e) = sqrt_spd(&amb.g);
        let k = e * amb.k * e;
        let mut dk = ZERO3;
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    let mut s = 0.0;
                    for p in 0..3 {
                        for q in 0..3 {
                            for r in 0..3 {
                                s += e[(i, p)] * e[(j, q)] * e[(l, r)] * amb.grad_k[p][q][r];
                            }
                        }
                    }
                    dk[i][j][l] = s;
                }
            }
        }
        let gs = e * crate::tensor::from_array(amb.grad_scalar);
        Ok(Self {
            k,
            dk,
            grad_scalar: [gs[0], gs[1], gs[2]],
        })
    }

    pub fn flat(k: Mat3, dk: Tensor3) -> Self {
        Self {
            k,
            dk,
            grad_scalar: [0.0; 3],
        }
    }

    pub fn tr_k(&self) -> f64 {
        self.k.trace()
    }

    pub fn norm_k2(&self) -> f64 {
        (self.k * self.k).trace()
    }

    /// `∂_γ (tr K)`.
    pub fn d_tr(&self, g: usize) -> f64 {
        (0..3).map(|i| self.dk[i][i][g]).sum()
    }

    /// `∂_γ |K|²`.
    pub fn d_norm2(&self, g: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += 2.0 * self.k[(i, j)] * self.dk[i][j][g];
            }
        }
        s
    }
}

fn quad_form<T: NuAlgebra>(m: impl Fn(usize, usize) -> f64, nu: &[T; 3]) -> T {
    let mut s = T::lift(0.0);
    for i in 0..3 {
        for j in 0..3 {
            let c = m(i, j);
            if c != 0.0 {
                s = s + nu[i].clone() * nu[j].clone() * c;
            }
        }
    }
    s
}

fn apply<T: NuAlgebra>(m: impl Fn(usize, usize) -> f64, nu: &[T; 3], i: usize) -> T {
    let mut s = T::lift(0.0);
    for j in 0..3 {
        let c = m(i, j);
        if c != 0.0 {
            s = s + nu[j].clone() * c;
        }
    }
    s
}

/// The ν-dependent pieces of a family Lagrangian at a point.
struct FamilyTerms<'a> {
    lag: &'a LagrangianSpec,
    frame: &'a FrameData,
}

impl FamilyTerms<'_> {
    fn q<T: NuAlgebra>(&self, nu: &[T; 3]) -> T {
        quad_form(|i, j| self.frame.k[(i, j)], nu)
    }

    fn dq<T: NuAlgebra>(&self, nu: &[T; 3], g: usize) -> T {
        quad_form(|i, j| self.frame.dk[i][j][g], nu)
    }

    fn l<T: NuAlgebra>(&self, nu: &[T; 3]) -> T {
        let t = self.frame.tr_k();
        let q = self.q(nu);
        let l = self.lag;
        q.clone() * q.clone() * l.beta + q * (l.c0 * t) + T::lift(l.alpha * t * t + l.ct)
    }

    /// `m = 4β K(ν,ν) + 2c₀ tr K`.
    fn m<T: NuAlgebra>(&self, nu: &[T; 3]) -> T {
        self.q(nu) * (4.0 * self.lag.beta) + T::lift(2.0 * self.lag.c0 * self.frame.tr_k())
    }

    /// `(d_V L)_α = m (Kν)_α`.
    fn d_v<T: NuAlgebra>(&self, nu: &[T; 3], a: usize) -> T {
        self.m(nu) * apply(|i, j| self.frame.k[(i, j)], nu, a)
    }

    /// `(d_M L)_β`.
    fn d_m<T: NuAlgebra>(&self, nu: &[T; 3], b: usize) -> T {
        let l = self.lag;
        let t = self.frame.tr_k();
        let dt = self.frame.d_tr(b);
        let q = self.q(nu);
        let dq = self.dq(nu, b);
        T::lift(2.0 * l.alpha * t * dt)
            + q.clone() * dq.clone() * (2.0 * l.beta)
            + (q * dt + dq * t) * l.c0
    }

    /// `∇_γ (d_V L)_β`.
    fn grad_d_v<T: NuAlgebra>(&self, nu: &[T; 3], g: usize, b: usize) -> T {
        let dm = self.dq(nu, g) * (4.0 * self.lag.beta)
            + T::lift(2.0 * self.lag.c0 * self.frame.d_tr(g));
        dm * apply(|i, j| self.frame.k[(i, j)], nu, b)
            + self.m(nu) * apply(|i, j| self.frame.dk[i][j][g], nu, b)
    }
}

/// Integration of a function of `ν` over the unit sphere.
trait SphereIntegral<T> {
    fn integrate(&self, f: &dyn Fn(&[T; 3]) -> T) -> Result<f64>;
}

struct Exact;

impl SphereIntegral<NuPoly> for Exact {
    fn integrate(&self, f: &dyn Fn(&[NuPoly; 3]) -> NuPoly) -> Result<f64> {
        let nu = [
            NuPoly::component(0),
            NuPoly::component(1),
            NuPoly::component(2),
        ];
        f(&nu).integrate_exact()
    }
}

struct Quadrature<'a>(&'a QuadratureGrid);

impl SphereIntegral<f64> for Quadrature<'_> {
    fn integrate(&self, f: &dyn Fn(&[f64; 3]) -> f64) -> Result<f64> {
        let values: Vec<f64> = self.0.nodes.iter().map(f).collect();
        Ok(self.0.integrate(&values))
    }
}

fn monomial<T: NuAlgebra>(nu: &[T; 3], axes: &[usize]) -> T {
    axes.iter()
        .fold(T::lift(1.0), |acc, &a| acc * nu[a].clone())
}

/// `c^{(α₁…α_k)}(L, a) = ∫_{S²₁(a)} L(a, ν) (x - a)^{α₁} ⋯ (x - a)^{α_k}`, exact.
pub fn c_moment(lag: &LagrangianSpec, frame: &FrameData, axes: &[usize]) -> Result<f64> {
    let terms = FamilyTerms { lag, frame };
    Exact.integrate(&|nu| terms.l(nu) * monomial(nu, axes))
}

/// The same c-moment by grid quadrature.
pub fn c_moment_quadrature(
    lag: &LagrangianSpec,
    frame: &FrameData,
    axes: &[usize],
    grid: &QuadratureGrid,
) -> Result<f64> {
    let terms = FamilyTerms { lag, frame };
    Quadrature(grid).integrate(&|nu| terms.l(nu) * monomial(nu, axes))
}

fn vectors<T: NuAlgebra, I: SphereIntegral<T>>(
    integ: &I,
    lag: &LagrangianSpec,
    frame: &FrameData,
) -> Result<([f64; 3], [f64; 3])> {
    let t = FamilyTerms { lag, frame };
    let mut v = [0.0; 3];
    let mut w = [0.0; 3];
    for a in 0..3 {
        let va = integ.integrate(&|nu| {
            let mut s = t.d_v(nu, a) * -1.0 + t.l(nu) * nu[a].clone() * 2.0;
            for b in 0..3 {
                s = s + t.d_v(nu, b) * nu[a].clone() * nu[b].clone();
            }
            s
        })?;
        let wa = integ.integrate(&|nu| {
            let mut s = T::lift(0.0);
            for b in 0..3 {
                s = s - t.grad_d_v(nu, b, a) * nu[b].clone();
                s = s + t.d_m(nu, b) * nu[a].clone() * nu[b].clone() * 3.0;
                for g in 0..3 {
                    s = s + t.grad_d_v(nu, g, b) * nu[a].clone() * nu[b].clone() * nu[g].clone();
                }
            }
            s
        })?;
        v[a] = va;
        w[a] = 3.0 / (2.0 * PI) * wa;
    }
    Ok((v, w))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationVectors {
    pub point: [f64; 3],
    pub lagrangian: LagrangianSpec,
    pub v: [f64; 3],
    pub w: [f64; 3],
    pub v_quadrature: [f64; 3],
    pub w_quadrature: [f64; 3],
    /// `∇Sc` in the orthonormal frame; concentration requires `∇Sc = W`.
    pub grad_scalar: [f64; 3],
}

/// `V^α = -c(d_V L_α) + 2c^α(L) + c^{(α,β)}(d_V L_β)` and
/// `W^α = (3/2π)(-c^β(∇_β d_V L_α) + 3c^{(α,β)}(d_M L_β) + c^{(α,β,γ)}(∇_γ d_V L_β))`.
pub fn concentration_vectors_in_frame(
    lag: &LagrangianSpec,
    frame: &FrameData,
    grid: &QuadratureGrid,
) -> Result<ConcentrationVectors> {
    let (v, w) = vectors(&Exact, lag, frame)?;
    let (vq, wq) = vectors(&Quadrature(grid), lag, frame)?;
    Ok(ConcentrationVectors {
        point: [0.0; 3],
        lagrangian: *lag,
        v,
        w,
        v_quadrature: vq,
        w_quadrature: wq,
        grad_scalar: frame.grad_scalar,
    })
}

pub fn concentration_vectors(
    lag: &LagrangianSpec,
    model: &ManifoldModel,
    a: [f64; 3],
) -> Result<ConcentrationVectors> {
    let frame = FrameData::at(model, a)?;
    let grid = QuadratureGrid::new(8)?;
    let mut out = concentration_vectors_in_frame(lag, &frame, &grid)?;
    out.point = a;
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub name: String,
    pub draws: usize,
    pub max_err_exact: f64,
    pub max_err_quadrature: f64,
    pub tol_exact: f64,
    pub tol_quadrature: f64,
    pub pass: bool,
}

struct Check {
    name: &'static str,
    lag: LagrangianSpec,
    /// Expected `W` from the frame data.
    expect: fn(&FrameData, &LagrangianSpec) -> [f64; 3],
    /// Compare `V` (against zero) instead of `W`.
    use_v: bool,
}

fn grad_combo(f: &FrameData, a: f64, b: f64) -> [f64; 3] {
    // a ∂(tr K)² + b ∂|K|²
    std::array::from_fn(|g| a * 2.0 * f.tr_k() * f.d_tr(g) + b * f.d_norm2(g))
}

/// `(3/2π) ∇ c(L, ·)` from the closed form of `c(L)` for the family.
fn grad_c(f: &FrameData, l: &LagrangianSpec) -> [f64; 3] {
    // c(L) = 4π(α + c₀/3 + β/15) t² + (8π/15) β |K|² + 4π cₜ
    let a = 4.0 * PI * (l.alpha + l.c0 / 3.0 + l.beta / 15.0);
    let b = 8.0 * PI / 15.0 * l.beta;
    grad_combo(f, a, b).map(|v| 1.5 / PI * v)
}

fn random_k(rng: &mut ChaCha8Rng, with_gradient: bool) -> AffineK {
    let k0: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let k1: [f64; 18] = std::array::from_fn(|_| {
        if with_gradient {
            rng.random_range(-1.0..1.0)
        } else {
            0.0
        }
    });
    AffineK::from_components(k0, k1)
}

/// Checks the closed-form `W`/`V` table at `a` for random affine `K`.
pub fn identity_suite(
    model: &ManifoldModel,
    a: [f64; 3],
    draws: usize,
    seed: u64,
) -> Result<Vec<IdentityRow>> {
    let grid = QuadratureGrid::new(8)?;
    let checks = [
        Check {
            name: "W[-1/4 P^2] = -(1/5) d(3 trK^2 + |K|^2)",
            lag: LagrangianSpec::hawking(),
            expect: |f, _| grad_combo(f, -0.6, -0.2),
            use_v: false,
        },
        Check {
            name: "W[trK^2] = 6 d trK^2",
            lag: LagrangianSpec::new(1.0, 0.0, 0.0, 0.0),
            expect: |f, _| grad_combo(f, 6.0, 0.0),
            use_v: false,
        },
        Check {
            name: "W[K(nu,nu)^2] = (2/5) d(trK^2 + 2|K|^2)",
            lag: LagrangianSpec::new(0.0, 1.0, 0.0, 0.0),
            expect: |f, _| grad_combo(f, 0.4, 0.8),
            use_v: false,
        },
        Check {
            name: "W[trK K(nu,nu)] = 2 d trK^2",
            lag: LagrangianSpec::new(0.0, 0.0, 1.0, 0.0),
            expect: |f, _| grad_combo(f, 2.0, 0.0),
            use_v: false,
        },
        Check {
            name: "W[-3/4 P^2 + 2 K(nu,nu)^2] = -d(trK^2 - |K|^2)",
            lag: LagrangianSpec::new(-0.75, 1.25, 1.5, 0.0),
            expect: |f, _| grad_combo(f, -1.0, 1.0),
            use_v: false,
        },
        Check {
            name: "W[-1/4 trK^2 + 5/4 K(nu,nu)^2] = -d(trK^2 - |K|^2)",
            lag: LagrangianSpec::new(-0.25, 1.25, 0.0, 0.0),
            expect: |f, _| grad_combo(f, -1.0, 1.0),
            use_v: false,
        },
        Check {
            name: "W[L] = (3/2pi) grad c(L) for a random family member",
            lag: LagrangianSpec::new(0.3, -0.7, 1.1, 0.4),
            expect: grad_c,
            use_v: false,
        },
        Check {
            name: "V[L] = 0 for even L",
            lag: LagrangianSpec::new(0.3, -0.7, 1.1, 0.4),
            expect: |_, _| [0.0; 3],
            use_v: true,
        },
    ];
    let mut rows = Vec::new();
    for (with_gradient, suffix) in [(true, ""), (false, " [K1 = 0]")] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = if with_gradient {
            draws
        } else {
            draws.div_ceil(10)
        };
        let frames: Vec<FrameData> = (0..n)
            .map(|_| FrameData::at(&model.with_extrinsic(random_k(&mut rng, with_gradient))?, a))
            .collect::<Result<_>>()?;
        for check in &checks {
            if !with_gradient && check.use_v {
                continue;
            }
            let mut err_e: f64 = 0.0;
            let mut err_q: f64 = 0.0;
            for f in &frames {
                let cv = concentration_vectors_in_frame(&check.lag, f, &grid)?;
                let expect = (check.expect)(f, &check.lag);
                let (e, q) = if check.use_v {
                    (cv.v, cv.v_quadrature)
                } else {
                    (cv.w, cv.w_quadrature)
                };
                for k in 0..3 {
                    err_e = err_e.max((e[k] - expect[k]).abs());
                    err_q = err_q.max((q[k] - expect[k]).abs());
                }
            }
            let (te, tq) = (1e-10, 1e-8);
            rows.push(IdentityRow {
                name: format!("{}{}", check.name, suffix),
                draws: frames.len(),
                max_err_exact: err_e,
                max_err_quadrature: err_q,
                tol_exact: te,
                tol_quadrature: tq,
                pass: err_e <= te && err_q <= tq,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appendix_values() {
        let v = |k: &[usize]| exact_monomial_integral(k).unwrap();
        assert_eq!(v(&[0, 0]).to_string(), "4π/3");
        assert_eq!(v(&[0, 1, 2]).to_string(), "0");
        assert_eq!(v(&[0, 0, 0, 0]).to_string(), "4π/5");
        assert_eq!(v(&[0, 0, 1, 1]).to_string(), "4π/15");
        assert_eq!(v(&[0, 0, 1, 1, 2, 2]).to_string(), "4π/105");
        assert_eq!(v(&[0; 6]).to_string(), "4π/7");
        assert_eq!(v(&[]).to_string(), "4π");
        assert!(matches!(
            exact_monomial_integral(&[0; 8]),
            Err(Error::UnsupportedDegree { degree: 8 })
        ));
    }

    #[test]
    fn key_parsing() {
        assert_eq!(parse_moment_key("1,1,2,3").unwrap(), vec![0, 0, 1, 2]);
        assert!(parse_moment_key("1,4").is_err());
    }
}
