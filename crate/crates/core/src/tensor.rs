//! Small fixed-size tensor helpers shared across modules.

use nalgebra::{Matrix2, Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Mat2 = Matrix2<f64>;

/// Rank-3 tensor, indexed `[a][b][c]`.
pub type Tensor3 = [[[f64; 3]; 3]; 3];

/// Rank-4 tensor, indexed `[a][b][c][d]`.
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

pub const ZERO3: Tensor3 = [[[0.0; 3]; 3]; 3];
pub const ZERO4: Tensor4 = [[[[0.0; 3]; 3]; 3]; 3];

pub fn to_array(v: &Vec3) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

pub fn from_array(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Bilinear form `m(u, v)`.
pub fn bilinear(m: &Mat3, u: &Vec3, v: &Vec3) -> f64 {
    (u.transpose() * m * v)[0]
}

/// `t(u, v, w)` with `t` indexed `[a][b][c]`.
pub fn trilinear(t: &Tensor3, u: &Vec3, v: &Vec3, w: &Vec3) -> f64 {
    let mut s = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                s += t[a][b][c] * u[a] * v[b] * w[c];
            }
        }
    }
    s
}

/// Rotates every slot of a rank-3 tensor: `t'_{abc} = R_ai R_bj R_ck t_ijk`.
pub fn rotate3(t: &Tensor3, r: &Mat3) -> Tensor3 {
    let mut out = ZERO3;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        for k in 0..3 {
                            s += r[(a, i)] * r[(b, j)] * r[(c, k)] * t[i][j][k];
                        }
                    }
                }
                out[a][b][c] = s;
            }
        }
    }
    out
}

pub fn rotate4(t: &Tensor4, r: &Mat3) -> Tensor4 {
    let mut out = ZERO4;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let mut s = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            for k in 0..3 {
                                for l in 0..3 {
                                    s += r[(a, i)]
                                        * r[(b, j)]
                                        * r[(c, k)]
                                        * r[(d, l)]
                                        * t[i][j][k][l];
                                }
                            }
                        }
                    }
                    out[a][b][c][d] = s;
                }
            }
        }
    }
    out
}

/// Rotation matrix from an axis (not necessarily unit) and an angle.
pub fn rotation(axis: [f64; 3], angle: f64) -> Mat3 {
    let axis = nalgebra::Unit::new_normalize(from_array(axis));
    *nalgebra::Rotation3::from_axis_angle(&axis, angle).matrix()
}

/// Kahan-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
