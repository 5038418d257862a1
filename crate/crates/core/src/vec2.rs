//! Minimal planar vector and 2x2 matrix types.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    /// Clockwise rotation by a quarter turn: `(a, b) -> (b, -a)`.
    ///
    /// Every normal in the crate is derived from this single operator.
    pub fn perp(self) -> Self {
        Self::new(self.y, -self.x)
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self.scale(T::one() / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Self, s: T) -> Self {
        self + (o - self).scale(s)
    }

    pub fn cast<U: Real>(self) -> Vec2<U> {
        Vec2::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> AddAssign for Vec2<T> {
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<T: Real> SubAssign for Vec2<T> {
    fn sub_assign(&mut self, o: Self) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
}

impl<T: Real> Mat2<T> {
    pub fn identity() -> Self {
        Self::diag(T::one())
    }

    pub fn diag(d: T) -> Self {
        Self { a11: d, a12: T::zero(), a21: T::zero(), a22: d }
    }

    /// `u vᵀ`
    pub fn outer(u: Vec2<T>, v: Vec2<T>) -> Self {
        Self { a11: u.x * v.x, a12: u.x * v.y, a21: u.y * v.x, a22: u.y * v.y }
    }

    pub fn apply(&self, v: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.a11 * v.x + self.a12 * v.y, self.a21 * v.x + self.a22 * v.y)
    }

    pub fn transpose(&self) -> Self {
        Self { a11: self.a11, a12: self.a21, a21: self.a12, a22: self.a22 }
    }

    pub fn is_symmetric(&self) -> bool {
        self.a12 == self.a21
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        (self.a11 - o.a11)
            .abs()
            .max((self.a12 - o.a12).abs())
            .max((self.a21 - o.a21).abs())
            .max((self.a22 - o.a22).abs())
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            a11: self.a11 + o.a11,
            a12: self.a12 + o.a12,
            a21: self.a21 + o.a21,
            a22: self.a22 + o.a22,
        }
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            a11: self.a11 - o.a11,
            a12: self.a12 - o.a12,
            a21: self.a21 - o.a21,
            a22: self.a22 - o.a22,
        }
    }
}

impl<T: Real> Mul<T> for Mat2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self { a11: self.a11 * s, a12: self.a12 * s, a21: self.a21 * s, a22: self.a22 * s }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perp_is_clockwise() {
        let e1 = Vec2::new(1.0, 0.0);
        assert_eq!(e1.perp(), Vec2::new(0.0, -1.0));
        assert_eq!(Vec2::new(0.0, 1.0).perp(), Vec2::new(1.0, 0.0));
    }

    #[test]
    fn perp_preserves_dot() {
        let a = Vec2::new(0.3f64, -1.7);
        let b = Vec2::new(2.1, 0.4);
        assert!((a.perp().dot(b.perp()) - a.dot(b)).abs() < 1e-15);
        assert!((a.perp().dot(a)).abs() < 1e-15);
    }
}
