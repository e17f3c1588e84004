//! Real orthonormal spherical harmonics (no Condon–Shortley phase).
//!
//! `Y_lm = p_lm(cos θ) · {√2 cos(mφ), 1, √2 sin(|m|φ)}` for `m > 0, m = 0, m < 0`,
//! with `p_lm` normalized so that `∫ Y_lm² dΩ = 1`.

use std::f64::consts::PI;

/// Position of `Y_lm` in a coefficient vector.
pub fn sh_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

/// Number of coefficients for bands `0..=l_max`.
pub fn sh_count(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Inverse of [`sh_index`].
pub fn sh_degree_order(index: usize) -> (usize, i64) {
    let l = (index as f64).sqrt() as usize;
    let l = if (l + 1) * (l + 1) <= index { l + 1 } else { l };
    (l, index as i64 - (l * l + l) as i64)
}

pub(crate) fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Associated Legendre values `p_lm(cos θ)` with first and second θ-derivatives,
/// indexed by [`tri`]. `sin θ` must be nonzero.
pub(crate) fn legendre_with_derivatives(
    band: usize,
    x: f64,
    s: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = tri(band, band) + 1;
    let mut p = vec![0.0; n];
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=band {
        let mf = m as f64;
        p[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
    }
    for m in 0..band {
        p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * p[tri(m, m)];
    }
    for m in 0..=band {
        for l in (m + 2)..=band {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    let mut dp = vec![0.0; n];
    let mut d2p = vec![0.0; n];
    let cot = x / s;
    for l in 0..=band {
        for m in 0..=l {
            let (lf, mf) = (l as f64, m as f64);
            let prev = if l > m {
                ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf + mf) * (lf - mf)).sqrt()
                    * p[tri(l - 1, m)]
            } else {
                0.0
            };
            let v = p[tri(l, m)];
            let d = (lf * x * v - prev) / s;
            dp[tri(l, m)] = d;
            d2p[tri(l, m)] = -cot * d - (lf * (lf + 1.0) - mf * mf / (s * s)) * v;
        }
    }
    (p, dp, d2p)
}

/// Values of every `Y_lm`, `l ≤ l_max`, in direction `dir` (unit vector).
pub fn real_sh_all(l_max: usize, dir: [f64; 3]) -> Vec<f64> {
    let x = dir[2].clamp(-1.0, 1.0);
    let s = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    let phi = dir[1].atan2(dir[0]);
    // Derivatives are meaningless at the poles; only the values are used.
    let (p, _, _) = legendre_with_derivatives(l_max, x, s);
    let mut out = vec![0.0; sh_count(l_max)];
    for l in 0..=l_max {
        out[sh_index(l, 0)] = p[tri(l, 0)];
        for m in 1..=l {
            let (sn, cs) = (m as f64 * phi).sin_cos();
            let v = std::f64::consts::SQRT_2 * p[tri(l, m)];
            out[sh_index(l, m as i64)] = v * cs;
            out[sh_index(l, -(m as i64))] = v * sn;
        }
    }
    out
}
