//! Plane vectors and 2×2 matrices over any [`Scalar`].

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use super::field::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T> Vec2<T> {
    pub const fn new(x: T, y: T) -> Self {
        Vec2 { x, y }
    }
}

impl<T: Scalar> Vec2<T> {
    pub fn scale(&self, c: &T) -> Self {
        Vec2::new(c.clone() * self.x.clone(), c.clone() * self.y.clone())
    }

    pub fn to_f64(&self) -> Vec2<f64> {
        Vec2::new(self.x.to_f64(), self.y.to_f64())
    }

    /// Sup norm of the float embedding.
    pub fn sup_norm(&self) -> f64 {
        self.x.abs_f64().max(self.y.abs_f64())
    }

    pub fn key(&self) -> (T::Key, T::Key) {
        (self.x.key(), self.y.key())
    }
}

impl Vec2<f64> {
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec2::new(-self.x, -self.y)
    }
}

/// Scalar wedge product `x_u y_v - x_v y_u`.
pub fn wedge<T: Scalar>(u: &Vec2<T>, v: &Vec2<T>) -> T {
    u.x.clone() * v.y.clone() - v.x.clone() * u.y.clone()
}

/// Dot product `x_u x_v + y_u y_v`.
pub fn dot<T: Scalar>(u: &Vec2<T>, v: &Vec2<T>) -> T {
    u.x.clone() * v.x.clone() + u.y.clone() * v.y.clone()
}

/// Row-major 2×2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Mat2<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
}

impl<T: Scalar> Mat2<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    /// Matrix with the given columns.
    pub fn from_columns(c0: &Vec2<T>, c1: &Vec2<T>) -> Self {
        Mat2::new(c0.x.clone(), c1.x.clone(), c0.y.clone(), c1.y.clone())
    }

    pub fn identity_like(t: &T) -> Self {
        Mat2::new(t.one_like(), t.zero_like(), t.zero_like(), t.one_like())
    }

    pub fn col0(&self) -> Vec2<T> {
        Vec2::new(self.a11.clone(), self.a21.clone())
    }

    pub fn col1(&self) -> Vec2<T> {
        Vec2::new(self.a12.clone(), self.a22.clone())
    }

    pub fn det(&self) -> T {
        self.a11.clone() * self.a22.clone() - self.a12.clone() * self.a21.clone()
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a11.clone(), self.a21.clone(), self.a12.clone(), self.a22.clone())
    }

    /// Inverse of a unimodular matrix (adjugate, no division).
    pub fn inverse_unimodular(&self) -> Self {
        Mat2::new(self.a22.clone(), -self.a12.clone(), -self.a21.clone(), self.a11.clone())
    }

    /// General inverse.
    pub fn inverse(&self) -> Self {
        let d = self.det();
        let adj = self.inverse_unimodular();
        Mat2::new(
            adj.a11 / d.clone(),
            adj.a12 / d.clone(),
            adj.a21 / d.clone(),
            adj.a22 / d,
        )
    }

    pub fn apply(&self, v: &Vec2<T>) -> Vec2<T> {
        Vec2::new(
            self.a11.clone() * v.x.clone() + self.a12.clone() * v.y.clone(),
            self.a21.clone() * v.x.clone() + self.a22.clone() * v.y.clone(),
        )
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Mat2::identity_like(&self.a11);
        for _ in 0..n {
            out = out * self.clone();
        }
        out
    }

    pub fn to_f64(&self) -> Mat2<f64> {
        Mat2::new(self.a11.to_f64(), self.a12.to_f64(), self.a21.to_f64(), self.a22.to_f64())
    }
}

impl Mat2<f64> {
    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Mat2<f64>) -> f64 {
        [
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
        ]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()))
    }

    /// Horocycle flow matrix `h_s = [[1, 0], [-s, 1]]`.
    pub fn horocycle(s: f64) -> Self {
        Mat2::new(1.0, 0.0, -s, 1.0)
    }

    /// Geodesic flow matrix `g_t = diag(e^t, e^{-t})`.
    pub fn geodesic(t: f64) -> Self {
        Mat2::new(t.exp(), 0.0, 0.0, (-t).exp())
    }

    /// `g_{a,b} = [[a, b], [0, 1/a]]`.
    pub fn g_ab(a: f64, b: f64) -> Self {
        Mat2::new(a, b, 0.0, 1.0 / a)
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        Mat2::new(
            self.a11.clone() * r.a11.clone() + self.a12.clone() * r.a21.clone(),
            self.a11 * r.a12.clone() + self.a12 * r.a22.clone(),
            self.a21.clone() * r.a11 + self.a22.clone() * r.a21,
            self.a21 * r.a12 + self.a22 * r.a22,
        )
    }
}

impl<T: Scalar> Neg for Mat2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Mat2::new(-self.a11, -self.a12, -self.a21, -self.a22)
    }
}
