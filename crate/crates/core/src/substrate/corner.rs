use crate::real::Real;
use crate::vec2::Vec2;

use super::Substrate;

/// A step of height `2ρ` between the terraces `y = 0` and `y = 2ρ`, smoothed
/// by a concave quarter arc centred at `(−ρ, ρ)` and a convex quarter arc
/// centred at `(ρ, ρ)`. Arclength zero is the inflection point `(0, ρ)`; the
/// arcs occupy `c ∈ [−πρ/2, πρ/2]`.
#[derive(Debug, Clone)]
pub struct SmoothedCorner<T> {
    rho: T,
}

impl<T: Real> SmoothedCorner<T> {
    pub fn new(rho: T) -> Self {
        assert!(rho > T::zero(), "corner radius must be positive");
        Self { rho }
    }

    pub fn radius(&self) -> T {
        self.rho
    }

    fn quarter(&self) -> T {
        T::lit(std::f64::consts::FRAC_PI_2) * self.rho
    }
}

impl<T: Real> Substrate<T> for SmoothedCorner<T> {
    fn point(&self, c: T) -> Vec2<T> {
        let r = self.rho;
        let q = self.quarter();
        if c <= -q {
            Vec2::new(-r + (c + q), T::zero())
        } else if c <= T::zero() {
            let th = -T::lit(std::f64::consts::FRAC_PI_2) + (c + q) / r;
            Vec2::new(-r + r * th.cos(), r + r * th.sin())
        } else if c <= q {
            let ph = T::lit(std::f64::consts::PI) - c / r;
            Vec2::new(r + r * ph.cos(), r + r * ph.sin())
        } else {
            Vec2::new(r + (c - q), r + r)
        }
    }

    fn tangent(&self, c: T) -> Vec2<T> {
        let r = self.rho;
        let q = self.quarter();
        if c <= -q || c > q {
            Vec2::new(T::one(), T::zero())
        } else if c <= T::zero() {
            let th = -T::lit(std::f64::consts::FRAC_PI_2) + (c + q) / r;
            Vec2::new(-th.sin(), th.cos())
        } else {
            let ph = T::lit(std::f64::consts::PI) - c / r;
            Vec2::new(ph.sin(), -ph.cos())
        }
    }

    fn curvature(&self, c: T) -> T {
        let q = self.quarter();
        if c <= -q || c > q {
            T::zero()
        } else if c <= T::zero() {
            T::one() / self.rho
        } else {
            -T::one() / self.rho
        }
    }

    fn breakpoints(&self, a: T, b: T) -> Vec<T> {
        let q = self.quarter();
        [-q, T::zero(), q].into_iter().filter(|&x| x > a && x < b).collect()
    }

    fn name(&self) -> &str {
        "smoothed_corner"
    }
}
