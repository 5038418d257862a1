//! Fixed substrate curves parameterized by arclength, plus the chord and
//! area functionals the scheme needs at the contact points.

mod circle;
mod corner;
mod line;
mod reparam;

pub use circle::Circle;
pub use corner::SmoothedCorner;
pub use line::Line;
pub use reparam::{ArclengthCurve, ReparamOptions};

use std::fmt;

use crate::error::{Result, SsdError};
use crate::quadrature::integrate_split;
use crate::real::Real;
use crate::vec2::Vec2;

/// A static curve `r(c)` with `|r_c| = 1`. The film sits on the side of
/// `n_sub = −r_c^⊥`, i.e. to the left when walking in the direction of
/// increasing `c`.
pub trait Substrate<T: Real>: Send + Sync + fmt::Debug {
    fn point(&self, c: T) -> Vec2<T>;

    /// Unit tangent `r_c(c)`.
    fn tangent(&self, c: T) -> Vec2<T>;

    fn normal(&self, c: T) -> Vec2<T> {
        -self.tangent(c).perp()
    }

    /// Signed curvature with `r_cc = κ n_sub`; positive when the substrate
    /// bends towards the film.
    fn curvature(&self, c: T) -> T {
        let d = T::lit(1e-5);
        let dt = self.tangent(c + d) - self.tangent(c - d);
        dt.dot(self.normal(c)) / (d + d)
    }

    /// Admissible arclength interval; infinite ends for unbounded curves.
    fn domain(&self) -> (T, T) {
        (T::neg_infinity(), T::infinity())
    }

    /// Arclength values in `(a, b)` where the curve is only piecewise smooth.
    fn breakpoints(&self, _a: T, _b: T) -> Vec<T> {
        Vec::new()
    }

    fn name(&self) -> &str;
}

fn check_arg<T: Real, S: Substrate<T> + ?Sized>(sub: &S, c: T) -> Result<()> {
    let (lo, hi) = sub.domain();
    if !c.is_finite() || c < lo || c > hi {
        return Err(SsdError::InvalidParameter(format!(
            "arclength {} outside {} domain [{}, {}]",
            c, sub.name(), lo, hi
        )));
    }
    Ok(())
}

/// `G(c1, c2) = (c2 − c1)(r(c2) − r(c1)) / |r(c2) − r(c1)|²`, the chord
/// approximation of `r_c(c1)`.
pub fn chord_g<T: Real, S: Substrate<T> + ?Sized>(sub: &S, c1: T, c2: T) -> Result<Vec2<T>> {
    let ch = sub.point(c2) - sub.point(c1);
    let l2 = ch.norm_sq();
    if !(l2 > T::zero()) {
        return Err(SsdError::DegenerateChord(c1.to_f64_lossy(), c2.to_f64_lossy()));
    }
    Ok(ch.scale((c2 - c1) / l2))
}

/// `½ ∫_{c1}^{c2} r · n_sub dc`.
pub fn substrate_flux_integral<T: Real, S: Substrate<T> + ?Sized>(sub: &S, c1: T, c2: T, qtol: T) -> Result<T> {
    check_arg(sub, c1)?;
    check_arg(sub, c2)?;
    let (a, b) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
    let breaks = sub.breakpoints(a, b);
    let v = integrate_split(|c| sub.point(c).dot(sub.normal(c)), c1, c2, &breaks, qtol + qtol)?;
    Ok(v * T::lit(0.5))
}

/// Signed area between the substrate arc from `c1` to `c2` and the chord
/// joining its ends, measured with the same orientation as the film mass:
/// the flux of the closed loop (chord `r(c1) → r(c2)`, arc back to `r(c1)`).
pub fn segment_area<T: Real, S: Substrate<T> + ?Sized>(sub: &S, c1: T, c2: T, qtol: T) -> Result<T> {
    if c1 == c2 {
        return Ok(T::zero());
    }
    let p = sub.point(c1);
    let q = sub.point(c2);
    let chord = (p.y * q.x - p.x * q.y) * T::lit(0.5);
    Ok(chord - substrate_flux_integral(sub, c1, c2, qtol)?)
}

/// Nearest substrate point to `p` searched over `[lo, hi]`, returning the
/// arclength. Two well-separated minimizers at equal distance are an error.
pub fn project<T: Real, S: Substrate<T> + ?Sized>(sub: &S, p: Vec2<T>, lo: T, hi: T) -> Result<T> {
    let samples = 512usize;
    let step = (hi - lo) / T::from_usize_lossy(samples);
    let dist = |c: T| (sub.point(c) - p).norm_sq();
    let vals: Vec<T> = (0..=samples).map(|i| dist(lo + step * T::from_usize_lossy(i))).collect();
    let mut candidates = Vec::new();
    for i in 0..=samples {
        let left = if i == 0 { T::infinity() } else { vals[i - 1] };
        let right = if i == samples { T::infinity() } else { vals[i + 1] };
        if vals[i] <= left && vals[i] <= right {
            let a = lo + step * T::from_usize_lossy(i.saturating_sub(1));
            let b = lo + step * T::from_usize_lossy((i + 1).min(samples));
            let c = golden_min(&dist, a, b);
            candidates.push((c, dist(c)));
        }
    }
    candidates.sort_by(|x, y| x.1.partial_cmp(&y.1).expect("finite distances"));
    let (best, d0) = candidates[0];
    let scale = (hi - lo).abs().max(T::one());
    let fence = T::lit(1e-10) * scale * scale;
    for &(c, d) in &candidates[1..] {
        if (c - best).abs() > step + step && (d - d0).abs() <= fence {
            return Err(SsdError::AmbiguousProjection { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
        }
    }
    Ok(best)
}

fn golden_min<T: Real, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T) -> T {
    let g = T::lit(0.618_033_988_749_894_8);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() <= T::epsilon() * T::lit(4.0) * (a.abs() + b.abs() + T::one()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    (a + b) * T::lit(0.5)
}
