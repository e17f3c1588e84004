//! Truncated multivariate Taylor polynomials in three variables.
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar field around a base
//! point up to total degree three. Arithmetic propagates derivatives exactly,
//! which is how the built-in metrics obtain analytic derivatives up to third
//! order without hand-written formulas. Each jet carries the degree up to which
//! its coefficients are valid; products and derivatives lower it as needed.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::LazyLock;

/// Number of monomials of total degree at most three in three variables.
pub const JET_LEN: usize = 20;

/// Maximum supported degree.
pub const MAX_DEGREE: u8 = 3;

struct Tables {
    exps: [[u8; 3]; JET_LEN],
    degree: [u8; JET_LEN],
    /// (i, j, k): monomial i times monomial j is monomial k.
    products: Vec<(u8, u8, u8)>,
    /// derivative[v][k] = (source index, factor): coefficient k of d/dx_v
    /// comes from coefficient `source` multiplied by `factor`.
    derivative: [[(u8, f64); JET_LEN]; 3],
}

fn monomial_index(exps: &[[u8; 3]; JET_LEN], e: [u8; 3]) -> Option<usize> {
    exps.iter().position(|x| *x == e)
}

static TABLES: LazyLock<Tables> = LazyLock::new(|| {
    let mut exps = [[0u8; 3]; JET_LEN];
    let mut degree = [0u8; JET_LEN];
    let mut n = 0;
    for d in 0..=MAX_DEGREE {
        for a in (0..=d).rev() {
            for b in (0..=(d - a)).rev() {
                let c = d - a - b;
                exps[n] = [a, b, c];
                degree[n] = d;
                n += 1;
            }
        }
    }
    debug_assert_eq!(n, JET_LEN);

    let mut products = Vec::new();
    for i in 0..JET_LEN {
        for j in 0..JET_LEN {
            if degree[i] + degree[j] <= MAX_DEGREE {
                let e = [
                    exps[i][0] + exps[j][0],
                    exps[i][1] + exps[j][1],
                    exps[i][2] + exps[j][2],
                ];
                let k = monomial_index(&exps, e).expect("product monomial");
                products.push((i as u8, j as u8, k as u8));
            }
        }
    }
    // Sorting by result degree lets truncated products stop early.
    products.sort_by_key(|&(_, _, k)| degree[k as usize]);

    let mut derivative = [[(0u8, 0.0f64); JET_LEN]; 3];
    for (v, table) in derivative.iter_mut().enumerate() {
        for k in 0..JET_LEN {
            if degree[k] == MAX_DEGREE {
                continue;
            }
            let mut e = exps[k];
            e[v] += 1;
            let src = monomial_index(&exps, e).expect("derivative monomial");
            table[k] = (src as u8, e[v] as f64);
        }
    }

    Tables {
        exps,
        degree,
        products,
        derivative,
    }
});

fn count_up_to(deg: u8) -> usize {
    match deg {
        0 => 1,
        1 => 4,
        2 => 10,
        _ => 20,
    }
}

/// Truncated Taylor polynomial of a scalar field in three variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; JET_LEN],
    deg: u8,
}

impl Jet {
    pub fn constant(value: f64, deg: u8) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = value;
        Self {
            c,
            deg: deg.min(MAX_DEGREE),
        }
    }

    /// The coordinate function `x_v` expanded around `base`.
    pub fn variable(v: usize, base: f64, deg: u8) -> Self {
        let mut j = Self::constant(base, deg);
        if deg >= 1 {
            j.c[1 + v] = 1.0;
        }
        j
    }

    pub fn zero(deg: u8) -> Self {
        Self::constant(0.0, deg)
    }

    pub fn degree(&self) -> u8 {
        self.deg
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeff(&self, exps: [u8; 3]) -> f64 {
        let t = &*TABLES;
        match monomial_index(&t.exps, exps) {
            Some(i) if t.degree[i] <= self.deg => self.c[i],
            _ => 0.0,
        }
    }

    pub fn set_coeff(&mut self, exps: [u8; 3], value: f64) {
        let t = &*TABLES;
        let i = monomial_index(&t.exps, exps).expect("monomial of degree <= 3");
        self.c[i] = value;
    }

    /// Partial derivative of the represented field at the base point.
    pub fn partial(&self, exps: [u8; 3]) -> f64 {
        let fact = |n: u8| (1..=n as u32).product::<u32>() as f64;
        self.coeff(exps) * fact(exps[0]) * fact(exps[1]) * fact(exps[2])
    }

    /// First derivatives at the base point.
    pub fn gradient(&self) -> [f64; 3] {
        [self.c[1], self.c[2], self.c[3]]
    }

    pub fn truncate(mut self, deg: u8) -> Self {
        let deg = deg.min(self.deg);
        for k in count_up_to(deg)..JET_LEN {
            self.c[k] = 0.0;
        }
        self.deg = deg;
        self
    }

    /// d/dx_v, valid to one degree less.
    pub fn deriv(&self, v: usize) -> Self {
        assert!(self.deg >= 1, "derivative of a degree-0 jet");
        let t = &*TABLES;
        let deg = self.deg - 1;
        let mut c = [0.0; JET_LEN];
        for (k, slot) in c.iter_mut().enumerate().take(count_up_to(deg)) {
            let (src, factor) = t.derivative[v][k];
            *slot = factor * self.c[src as usize];
        }
        Self { c, deg }
    }

    pub fn scale(mut self, s: f64) -> Self {
        for x in self.c.iter_mut() {
            *x *= s;
        }
        self
    }

    /// Composes a univariate function with this jet, given the function's
    /// value and first three derivatives at `self.value()`.
    pub fn compose(&self, f: [f64; 4]) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Self::constant(f[0], self.deg);
        if self.deg == 0 {
            return out;
        }
        let d2 = delta * delta;
        let d3 = d2 * delta;
        out = out + delta.scale(f[1]) + d2.scale(f[2] / 2.0) + d3.scale(f[3] / 6.0);
        out
    }

    pub fn recip(&self) -> Self {
        let v = self.value();
        let r = 1.0 / v;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn sqrt(&self) -> Self {
        let v = self.value();
        let s = v.sqrt();
        self.compose([s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v)])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(1.0, self.deg);
        for _ in 0..n {
            out = out * *self;
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let deg = self.deg.min(rhs.deg);
        let mut c = [0.0; JET_LEN];
        for (k, slot) in c.iter_mut().enumerate().take(count_up_to(deg)) {
            *slot = self.c[k] + rhs.c[k];
        }
        Jet { c, deg }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let deg = self.deg.min(rhs.deg);
        let t = &*TABLES;
        let mut c = [0.0; JET_LEN];
        for &(i, j, k) in &t.products {
            if t.degree[k as usize] > deg {
                break;
            }
            c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        Jet { c, deg }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

/// Symmetric 3x3 matrix of jets.
pub type JetMatrix = [[Jet; 3]; 3];

/// Inverse of a jet-valued 3x3 matrix via the adjugate.
pub fn invert(m: &JetMatrix) -> JetMatrix {
    let cof = |a: usize, b: usize, c: usize, d: usize| m[a][c] * m[b][d] - m[a][d] * m[b][c];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
    let inv_det = det.recip();
    let mut out = [[Jet::zero(det.degree()); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = adj[i][j] * inv_det;
        }
    }
    out
}
