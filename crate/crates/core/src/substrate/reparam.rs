use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SsdError};
use crate::quadrature::integrate;
use crate::real::Real;
use crate::vec2::Vec2;

use super::Substrate;

pub type CurveFn<T> = Arc<dyn Fn(T) -> Vec2<T> + Send + Sync>;

#[derive(Debug, Clone, Copy)]
pub struct ReparamOptions<T> {
    /// Target for `||r_c| − 1|`.
    pub tol: T,
    pub initial_intervals: usize,
    pub max_intervals: usize,
}

impl<T: Real> Default for ReparamOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-10), initial_intervals: 64, max_intervals: 1 << 22 }
    }
}

/// Unit-speed reparameterization of a regular curve `u ↦ raw(u)`,
/// `u ∈ [u₀, u₁]`. The cumulative arclength is tabulated by adaptive
/// quadrature of `|raw′|` and inverted with a cubic Hermite `u(c)` whose knot
/// slopes are the exact `1/|raw′|`. Points always lie on the raw curve; only
/// the speed carries interpolation error.
///
/// With a period shift the curve is extended by `raw(u + (u₁ − u₀)) =
/// raw(u) + shift`, which covers graphs of periodic functions on all of ℝ.
pub struct ArclengthCurve<T> {
    name: String,
    raw: CurveFn<T>,
    draw: CurveFn<T>,
    s: Vec<T>,
    u: Vec<T>,
    du: Vec<T>,
    length: T,
    shift: Option<Vec2<T>>,
    achieved: T,
}

impl<T: Real> fmt::Debug for ArclengthCurve<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArclengthCurve")
            .field("name", &self.name)
            .field("length", &self.length)
            .field("intervals", &(self.s.len() - 1))
            .field("periodic", &self.shift.is_some())
            .finish()
    }
}

impl<T: Real> ArclengthCurve<T> {
    pub fn new(
        name: impl Into<String>,
        raw: CurveFn<T>,
        draw: CurveFn<T>,
        (u0, u1): (T, T),
        shift: Option<Vec2<T>>,
        opts: ReparamOptions<T>,
    ) -> Result<Self> {
        if !(u1 > u0) {
            return Err(SsdError::InvalidParameter(format!("empty parameter interval [{u0}, {u1}]")));
        }
        let name: String = name.into();
        let mut n = opts.initial_intervals.max(2);
        loop {
            let curve = Self::build(name.clone(), &raw, &draw, u0, u1, shift, n, opts.tol)?;
            if curve.achieved <= opts.tol * T::lit(0.25) {
                return Ok(curve);
            }
            if n * 2 > opts.max_intervals {
                return Err(SsdError::ReparameterizationTolerance {
                    target: opts.tol.to_f64_lossy(),
                    achieved: curve.achieved.to_f64_lossy(),
                    samples: n + 1,
                });
            }
            n *= 2;
        }
    }

    /// Graph `x ↦ (x, f(x))` of a function with period `p`, with `c = 0` at `x = 0`.
    pub fn periodic_graph(
        name: impl Into<String>,
        f: Arc<dyn Fn(T) -> T + Send + Sync>,
        df: Arc<dyn Fn(T) -> T + Send + Sync>,
        period: T,
        opts: ReparamOptions<T>,
    ) -> Result<Self> {
        let raw: CurveFn<T> = Arc::new(move |x| Vec2::new(x, f(x)));
        let draw: CurveFn<T> = Arc::new(move |x| Vec2::new(T::one(), df(x)));
        Self::new(name, raw, draw, (T::zero(), period), Some(Vec2::new(period, T::zero())), opts)
    }

    /// `y = A cos(k x)`.
    pub fn cosine(amplitude: T, wavenumber: T, opts: ReparamOptions<T>) -> Result<Self> {
        let (a, k) = (amplitude, wavenumber);
        let period = T::lit(std::f64::consts::TAU) / k;
        Self::periodic_graph(
            "cos",
            Arc::new(move |x: T| a * (k * x).cos()),
            Arc::new(move |x: T| -a * k * (k * x).sin()),
            period,
            opts,
        )
    }

    /// `y = A sin(k x)`.
    pub fn sine(amplitude: T, wavenumber: T, opts: ReparamOptions<T>) -> Result<Self> {
        let (a, k) = (amplitude, wavenumber);
        let period = T::lit(std::f64::consts::TAU) / k;
        Self::periodic_graph(
            "sin",
            Arc::new(move |x: T| a * (k * x).sin()),
            Arc::new(move |x: T| a * k * (k * x).cos()),
            period,
            opts,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        name: String,
        raw: &CurveFn<T>,
        draw: &CurveFn<T>,
        u0: T,
        u1: T,
        shift: Option<Vec2<T>>,
        n: usize,
        tol: T,
    ) -> Result<Self> {
        let width = u1 - u0;
        let u: Vec<T> = (0..=n).map(|i| u0 + width * T::from_usize_lossy(i) / T::from_usize_lossy(n)).collect();
        let mut du = Vec::with_capacity(n + 1);
        for &ui in &u {
            let speed = draw(ui).norm();
            if !(speed > T::epsilon()) {
                return Err(SsdError::VanishingDerivative(ui.to_f64_lossy()));
            }
            du.push(T::one() / speed);
        }
        let mut s = Vec::with_capacity(n + 1);
        s.push(T::zero());
        let qtol = tol * T::lit(1e-3) / T::from_usize_lossy(n);
        for w in u.windows(2) {
            let piece = integrate(|x| draw(x).norm(), w[0], w[1], qtol)?;
            let last = *s.last().expect("nonempty");
            s.push(last + piece);
        }
        let length = s[n];
        let mut curve = Self {
            name,
            raw: raw.clone(),
            draw: draw.clone(),
            s,
            u,
            du,
            length,
            shift,
            achieved: T::zero(),
        };
        let mut worst = T::zero();
        for i in 0..n {
            let (a, b) = (curve.s[i], curve.s[i + 1]);
            for frac in [0.25, 0.5, 0.75] {
                let c = a + (b - a) * T::lit(frac);
                let (uu, up) = curve.local_param(c);
                let speed = (draw(uu).scale(up)).norm();
                worst = worst.max((speed - T::one()).abs());
            }
        }
        curve.achieved = worst;
        Ok(curve)
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn achieved_tolerance(&self) -> T {
        self.achieved
    }

    pub fn intervals(&self) -> usize {
        self.s.len() - 1
    }

    /// `(u(c), u′(c))` for `c ∈ [0, L]`.
    fn local_param(&self, c: T) -> (T, T) {
        let n = self.s.len() - 1;
        let i = self.s.partition_point(|&x| x <= c).saturating_sub(1).min(n - 1);
        let h = self.s[i + 1] - self.s[i];
        let t = (c - self.s[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let (u0, u1) = (self.u[i], self.u[i + 1]);
        let (m0, m1) = (self.du[i], self.du[i + 1]);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        let six = T::lit(6.0);
        let d00 = six * t2 - six * t;
        let d10 = three * t2 - T::lit(4.0) * t + T::one();
        let d11 = three * t2 - two * t;
        let uu = h00 * u0 + h10 * h * m0 + h01 * u1 + h11 * h * m1;
        let up = d00 * (u0 - u1) / h + d10 * m0 + d11 * m1;
        (uu, up)
    }

    /// Splits `c` into a period count and a local arclength in `[0, L]`.
    fn wrap(&self, c: T) -> (T, T) {
        match self.shift {
            Some(_) => {
                let k = (c / self.length).floor();
                let local = c - k * self.length;
                (k, local.max(T::zero()).min(self.length))
            }
            None => (T::zero(), c),
        }
    }
}

impl<T: Real> Substrate<T> for ArclengthCurve<T> {
    fn point(&self, c: T) -> Vec2<T> {
        let (k, local) = self.wrap(c);
        if self.shift.is_none() {
            // linear continuation past the ends of an open curve
            if local < T::zero() {
                return (self.raw)(self.u[0]) + self.tangent(T::zero()).scale(local);
            }
            if local > self.length {
                let end = self.u[self.u.len() - 1];
                return (self.raw)(end) + self.tangent(self.length).scale(local - self.length);
            }
        }
        let (u, _) = self.local_param(local);
        let p = (self.raw)(u);
        match self.shift {
            Some(shift) => p + shift.scale(k),
            None => p,
        }
    }

    fn tangent(&self, c: T) -> Vec2<T> {
        let (_, local) = self.wrap(c);
        let local = local.max(T::zero()).min(self.length);
        let (u, up) = self.local_param(local);
        (self.draw)(u).scale(up)
    }

    fn name(&self) -> &str {
        &self.name
    }
}
