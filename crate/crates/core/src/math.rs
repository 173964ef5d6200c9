//! Minimal plane linear algebra: 2-vectors and 2x2 matrices over `f64` and
//! `i64`, plus recognition of floats as exact integers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Default relative tolerance for recognizing a float as an exact integer.
pub const INT_TOL: f64 = 1e-9;

/// Recognizes `x` as an integer iff `|x - round(x)| <= tol * (1 + |x|)`.
pub fn recognize_int(x: f64, tol: f64) -> Option<i64> {
    if !x.is_finite() {
        return None;
    }
    let r = x.round();
    if (x - r).abs() <= tol * (1.0 + x.abs()) && r.abs() < 9.0e15 {
        Some(r as i64)
    } else {
        None
    }
}

/// A point or vector in the plane. Serializes as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product, i.e. `det [self; o]` with vectors as rows.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Polar angle in `[0, 2*pi)`.
    pub fn polar_angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Vec2 { x: z.re, y: z.im }
    }

    /// Row vector times matrix: `(v M)_j = sum_i v_i M[i][j]`.
    pub fn mul_mat(self, m: &Mat2) -> Vec2 {
        Vec2 {
            x: self.x * m.0[0][0] + self.y * m.0[1][0],
            y: self.x * m.0[0][1] + self.y * m.0[1][1],
        }
    }

    pub fn rotated(self, phi: f64) -> Vec2 {
        let (s, c) = phi.sin_cos();
        Vec2 {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2 { x: a[0], y: a[1] }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// A real 2x2 matrix stored by rows. Serializes as `[[m00, m01], [m10, m11]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn from_rows(r0: Vec2, r1: Vec2) -> Self {
        Mat2([[r0.x, r0.y], [r1.x, r1.y]])
    }

    pub fn row(&self, i: usize) -> Vec2 {
        Vec2::new(self.0[i][0], self.0[i][1])
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2([
            [self.0[1][1] / d, -self.0[0][1] / d],
            [-self.0[1][0] / d, self.0[0][0] / d],
        ]))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let mut r = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j];
            }
        }
        Mat2(r)
    }

    /// Matrix times column vector.
    pub fn mul_col(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.0[0][0] * v.x + self.0[0][1] * v.y,
            self.0[1][0] * v.x + self.0[1][1] * v.y,
        )
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2([
            [self.0[0][0] * s, self.0[0][1] * s],
            [self.0[1][0] * s, self.0[1][1] * s],
        ])
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2([
            [self.0[0][0] + o.0[0][0], self.0[0][1] + o.0[0][1]],
            [self.0[1][0] + o.0[1][0], self.0[1][1] + o.0[1][1]],
        ])
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2([
            [self.0[0][0] - o.0[0][0], self.0[0][1] - o.0[0][1]],
            [self.0[1][0] - o.0[1][0], self.0[1][1] - o.0[1][1]],
        ])
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Spectral condition number (ratio of singular values).
    pub fn condition_number(&self) -> f64 {
        // Singular values from the eigenvalues of M^T M.
        let g = self.transpose().mul(self);
        let tr = g.0[0][0] + g.0[1][1];
        let dd = g.det().max(0.0);
        let disc = (tr * tr - 4.0 * dd).max(0.0).sqrt();
        let s_max = ((tr + disc) / 2.0).max(0.0).sqrt();
        let s_min = ((tr - disc) / 2.0).max(0.0).sqrt();
        if s_min == 0.0 {
            f64::INFINITY
        } else {
            s_max / s_min
        }
    }
}

/// Rotation by `phi` acting on column vectors.
pub fn rotation(phi: f64) -> Mat2 {
    let (s, c) = phi.sin_cos();
    Mat2([[c, -s], [s, c]])
}

/// An integer 2-vector. Serializes as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IVec2(pub [i64; 2]);

impl IVec2 {
    pub const ZERO: IVec2 = IVec2([0, 0]);

    pub fn new(x: i64, y: i64) -> Self {
        IVec2([x, y])
    }

    pub fn to_vec2(self) -> Vec2 {
        Vec2::new(self.0[0] as f64, self.0[1] as f64)
    }

    pub fn add(self, o: IVec2) -> IVec2 {
        IVec2([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }

    pub fn neg(self) -> IVec2 {
        IVec2([-self.0[0], -self.0[1]])
    }

    /// Row vector times integer matrix.
    pub fn mul_mat(self, m: &IMat2) -> IVec2 {
        IVec2([
            self.0[0] * m.0[0][0] + self.0[1] * m.0[1][0],
            self.0[0] * m.0[0][1] + self.0[1] * m.0[1][1],
        ])
    }
}

/// An integer 2x2 matrix stored by rows. Serializes as nested arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IMat2(pub [[i64; 2]; 2]);

impl IMat2 {
    pub const IDENTITY: IMat2 = IMat2([[1, 0], [0, 1]]);

    pub fn det(&self) -> i64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn mul(&self, o: &IMat2) -> IMat2 {
        let mut r = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j];
            }
        }
        IMat2(r)
    }

    pub fn transpose(&self) -> IMat2 {
        IMat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    /// Exact inverse of a determinant-one matrix (the adjugate).
    pub fn unimodular_inverse(&self) -> IMat2 {
        debug_assert_eq!(self.det(), 1);
        IMat2([
            [self.0[1][1], -self.0[0][1]],
            [-self.0[1][0], self.0[0][0]],
        ])
    }

    pub fn mul_ivec(&self, v: IVec2) -> IVec2 {
        IVec2([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2([
            [self.0[0][0] as f64, self.0[0][1] as f64],
            [self.0[1][0] as f64, self.0[1][1] as f64],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_recognition_is_relative() {
        assert_eq!(recognize_int(3.0 + 1e-12, 1e-9), Some(3));
        assert_eq!(recognize_int(3.0 + 1e-6, 1e-9), None);
        assert_eq!(recognize_int(1e12 + 1.0, 1e-9), Some(1_000_000_000_001));
        assert_eq!(recognize_int(f64::NAN, 1e-9), None);
    }

    #[test]
    fn matrix_inverse_roundtrip() {
        let m = Mat2([[2.0, 1.0], [0.5, 3.0]]);
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        assert!((id.sub(&Mat2::IDENTITY)).max_abs() < 1e-14);
    }

    #[test]
    fn condition_number_of_rotation_is_one() {
        let r = rotation(0.7);
        assert!((r.condition_number() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_times_matrix_convention() {
        let m = Mat2([[1.0, 2.0], [3.0, 4.0]]);
        let v = Vec2::new(1.0, 1.0);
        // (1,1) . rows -> column sums
        assert_eq!(v.mul_mat(&m), Vec2::new(4.0, 6.0));
        assert_eq!(m.mul_col(v), Vec2::new(3.0, 7.0));
    }

    #[test]
    fn unimodular_inverse_exact() {
        let m = IMat2([[2, -1], [1, 0]]);
        assert_eq!(m.det(), 1);
        let inv = m.unimodular_inverse();
        assert_eq!(m.mul(&inv), IMat2::IDENTITY);
    }
}
