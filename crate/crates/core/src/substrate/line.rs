use crate::real::Real;
use crate::vec2::Vec2;

use super::Substrate;

/// Straight substrate `r(c) = origin + c·direction`.
#[derive(Debug, Clone)]
pub struct Line<T> {
    origin: Vec2<T>,
    direction: Vec2<T>,
}

impl<T: Real> Line<T> {
    /// Panics if `direction` is zero.
    pub fn new(origin: Vec2<T>, direction: Vec2<T>) -> Self {
        let direction = direction.normalized().expect("line direction must be nonzero");
        Self { origin, direction }
    }

    /// The x-axis traversed left to right, film above.
    pub fn horizontal() -> Self {
        Self::new(Vec2::zero(), Vec2::new(T::one(), T::zero()))
    }
}

impl<T: Real> Substrate<T> for Line<T> {
    fn point(&self, c: T) -> Vec2<T> {
        self.origin + self.direction.scale(c)
    }

    fn tangent(&self, _c: T) -> Vec2<T> {
        self.direction
    }

    fn curvature(&self, _c: T) -> T {
        T::zero()
    }

    fn name(&self) -> &str {
        "line"
    }
}
