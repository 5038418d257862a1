use crate::real::Real;
use crate::vec2::Vec2;

use super::Substrate;

/// Circle of radius `R` traversed with unit speed. Counterclockwise puts
/// the film inside (concave substrate), clockwise puts it outside (convex).
#[derive(Debug, Clone)]
pub struct Circle<T> {
    center: Vec2<T>,
    radius: T,
    phase: T,
    sign: T,
}

impl<T: Real> Circle<T> {
    /// `r(c) = center + R(cos θ, sin θ)` with `θ = phase ± c/R`.
    pub fn new(center: Vec2<T>, radius: T, phase: T, counterclockwise: bool) -> Self {
        assert!(radius > T::zero(), "circle radius must be positive");
        let sign = if counterclockwise { T::one() } else { -T::one() };
        Self { center, radius, phase, sign }
    }

    /// Film inside a circle resting on the origin; `r(0) = 0`, `r_c(0) = e₁`.
    pub fn concave(radius: T) -> Self {
        Self::new(Vec2::new(T::zero(), radius), radius, -T::lit(std::f64::consts::FRAC_PI_2), true)
    }

    /// Film outside a circle whose top is the origin; `r(0) = 0`, `r_c(0) = e₁`.
    pub fn convex(radius: T) -> Self {
        Self::new(Vec2::new(T::zero(), -radius), radius, T::lit(std::f64::consts::FRAC_PI_2), false)
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn is_concave(&self) -> bool {
        self.sign > T::zero()
    }

    fn angle(&self, c: T) -> T {
        self.phase + self.sign * c / self.radius
    }
}

impl<T: Real> Substrate<T> for Circle<T> {
    fn point(&self, c: T) -> Vec2<T> {
        let th = self.angle(c);
        self.center + Vec2::new(th.cos(), th.sin()).scale(self.radius)
    }

    fn tangent(&self, c: T) -> Vec2<T> {
        let th = self.angle(c);
        Vec2::new(-th.sin(), th.cos()).scale(self.sign)
    }

    fn curvature(&self, _c: T) -> T {
        self.sign / self.radius
    }

    fn name(&self) -> &str {
        if self.is_concave() {
            "circle_concave"
        } else {
            "circle_convex"
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_rest_on_origin() {
        for c in [Circle::<f64>::concave(20.0), Circle::convex(20.0)] {
            assert!(c.point(0.0).norm() < 1e-14);
            assert!((c.tangent(0.0) - Vec2::new(1.0, 0.0)).norm() < 1e-15);
            assert!((c.normal(0.0) - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        }
        assert!(Circle::<f64>::concave(20.0).point(5.0).y > 0.0);
        assert!(Circle::<f64>::convex(20.0).point(5.0).y < 0.0);
    }

    #[test]
    fn unit_speed_and_closure() {
        let c = Circle::<f64>::concave(20.0);
        let l = 2.0 * std::f64::consts::PI * 20.0;
        assert!((l - 125.6637).abs() < 1e-4);
        assert!((c.point(l) - c.point(0.0)).norm() < 1e-12);
        for i in 0..1000 {
            let s = -50.0 + 0.1 * i as f64;
            assert!((c.tangent(s).norm() - 1.0).abs() < 1e-15);
            let h = 1e-5;
            let fd = (c.point(s + h) - c.point(s - h)).scale(0.5 / h);
            assert!((fd - c.tangent(s)).norm() < 1e-8);
        }
    }

    #[test]
    fn curvature_sign() {
        let cc = Circle::<f64>::concave(4.0);
        let cv = Circle::<f64>::convex(4.0);
        assert_eq!(cc.curvature(1.0), 0.25);
        assert_eq!(cv.curvature(1.0), -0.25);
        // default finite-difference curvature agrees with the analytic one
        let fd = |s: &dyn Substrate<f64>, c: f64| {
            let d = 1e-5;
            (s.tangent(c + d) - s.tangent(c - d)).dot(s.normal(c)) / (2.0 * d)
        };
        assert!((fd(&cc, 1.0) - 0.25).abs() < 1e-8);
        assert!((fd(&cv, 1.0) + 0.25).abs() < 1e-8);
    }
}
