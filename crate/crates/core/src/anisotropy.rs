//! Surface energy densities, the symmetrized stabilization matrix `Z_k`,
//! and grid certification of the stability inequality it has to satisfy.

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SsdError};
use crate::real::Real;
use crate::vec2::{Mat2, Vec2};

pub type ScalarFn<T> = Arc<dyn Fn(Vec2<T>) -> T + Send + Sync>;
pub type VectorFn<T> = Arc<dyn Fn(Vec2<T>) -> Vec2<T> + Send + Sync>;

#[derive(Clone)]
enum Density<T> {
    Isotropic,
    L4,
    Custom { gamma: ScalarFn<T>, grad: Option<VectorFn<T>> },
}

/// The stabilizing function `k(n)` added along `n nᵀ`.
#[derive(Clone)]
pub enum Stabilizer<T> {
    Constant(T),
    /// `k(n) = scale · γ(n)^{-3}`
    InverseCubeGamma(T),
    Custom(ScalarFn<T>),
}

impl<T: Real> fmt::Debug for Stabilizer<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(k) => write!(f, "Constant({k})"),
            Self::InverseCubeGamma(s) => write!(f, "InverseCubeGamma({s})"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A positively 1-homogeneous surface energy `γ` with gradient and
/// stabilizer.
#[derive(Clone)]
pub struct Anisotropy<T> {
    name: String,
    density: Density<T>,
    stabilizer: Stabilizer<T>,
}

impl<T: Real> fmt::Debug for Anisotropy<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Anisotropy")
            .field("name", &self.name)
            .field("stabilizer", &self.stabilizer)
            .finish()
    }
}

impl<T: Real> Anisotropy<T> {
    /// `γ(p) = |p|` with `k ≡ 2`, which makes `Z_k = I`.
    pub fn isotropic() -> Self {
        Self {
            name: "isotropic".into(),
            density: Density::Isotropic,
            stabilizer: Stabilizer::Constant(T::lit(2.0)),
        }
    }

    /// `γ(p) = (p₁⁴ + p₂⁴)^{1/4}` with `k(n) = 2γ(n)^{-3}`.
    pub fn l4() -> Self {
        Self {
            name: "l4".into(),
            density: Density::L4,
            stabilizer: Stabilizer::InverseCubeGamma(T::lit(2.0)),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "isotropic" => Ok(Self::isotropic()),
            "l4" => Ok(Self::l4()),
            other => Err(SsdError::UnknownAnisotropy(other.to_string())),
        }
    }

    /// Registers a user density. Without an analytic gradient a central
    /// finite difference is used. The Euler identity `∇γ(p)·p = γ(p)` is
    /// checked on sampled directions before the anisotropy is accepted.
    pub fn custom(
        name: impl Into<String>,
        gamma: ScalarFn<T>,
        grad: Option<VectorFn<T>>,
        stabilizer: Stabilizer<T>,
    ) -> Result<Self> {
        let a = Self { name: name.into(), density: Density::Custom { gamma, grad }, stabilizer };
        let tol = if T::epsilon() < T::lit(1e-10) { T::lit(1e-6) } else { T::lit(1e-2) };
        let mut worst = T::zero();
        for i in 0..64 {
            let th = T::lit(std::f64::consts::TAU * i as f64 / 64.0 + 0.1);
            let p = Vec2::new(th.cos(), th.sin());
            let g = a.gamma(p)?;
            let r = (a.grad_gamma(p)?.dot(p) - g).abs() / g;
            worst = worst.max(r);
        }
        if !(worst <= tol) {
            return Err(SsdError::EulerIdentity { name: a.name, residual: worst.to_f64_lossy() });
        }
        Ok(a)
    }

    pub fn with_stabilizer(mut self, stabilizer: Stabilizer<T>) -> Self {
        self.stabilizer = stabilizer;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stabilizer(&self) -> &Stabilizer<T> {
        &self.stabilizer
    }

    fn check_nonzero(&self, p: Vec2<T>) -> Result<()> {
        if p.x == T::zero() && p.y == T::zero() {
            Err(SsdError::ZeroVector(self.name.clone()))
        } else {
            Ok(())
        }
    }

    pub fn gamma(&self, p: Vec2<T>) -> Result<T> {
        self.check_nonzero(p)?;
        Ok(self.gamma_unchecked(p))
    }

    fn gamma_unchecked(&self, p: Vec2<T>) -> T {
        match &self.density {
            Density::Isotropic => p.norm(),
            Density::L4 => {
                // scale first so that p⁴ neither overflows nor underflows
                let s = p.x.abs().max(p.y.abs());
                let (a, b) = (p.x / s, p.y / s);
                s * (a.powi(4) + b.powi(4)).sqrt().sqrt()
            }
            Density::Custom { gamma, .. } => gamma(p),
        }
    }

    /// The Cahn–Hoffman vector `∇γ(p)`.
    pub fn grad_gamma(&self, p: Vec2<T>) -> Result<Vec2<T>> {
        self.check_nonzero(p)?;
        Ok(match &self.density {
            Density::Isotropic => p.scale(T::one() / p.norm()),
            Density::L4 => {
                let s = p.x.abs().max(p.y.abs());
                let q = p.scale(T::one() / s);
                let g = (q.x.powi(4) + q.y.powi(4)).sqrt().sqrt();
                let g3 = g * g * g;
                Vec2::new(q.x.powi(3) / g3, q.y.powi(3) / g3)
            }
            Density::Custom { grad: Some(grad), .. } => grad(p),
            Density::Custom { grad: None, .. } => self.fd_gradient(p),
        })
    }

    fn fd_gradient(&self, p: Vec2<T>) -> Vec2<T> {
        let step = T::lit(1e-6).max(T::epsilon().cbrt()) * p.norm();
        let two = step + step;
        let ex = Vec2::new(step, T::zero());
        let ey = Vec2::new(T::zero(), step);
        Vec2::new(
            (self.gamma_unchecked(p + ex) - self.gamma_unchecked(p - ex)) / two,
            (self.gamma_unchecked(p + ey) - self.gamma_unchecked(p - ey)) / two,
        )
    }

    /// `k(n)` for a unit normal.
    pub fn k(&self, n: Vec2<T>) -> Result<T> {
        Ok(match &self.stabilizer {
            Stabilizer::Constant(k) => *k,
            Stabilizer::InverseCubeGamma(s) => {
                let g = self.gamma(n)?;
                *s / (g * g * g)
            }
            Stabilizer::Custom(f) => f(n),
        })
    }

    /// `Z_k(n) = γ(n) I − n ∇γ(n)ᵀ − ∇γ(n) nᵀ + k(n) n nᵀ`.
    pub fn zk_matrix(&self, n: Vec2<T>) -> Result<Mat2<T>> {
        let len = n.norm();
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        if !((len - T::one()).abs() <= tol) {
            return Err(SsdError::NonUnitNormal(len.to_f64_lossy()));
        }
        Ok(self.zk_matrix_unchecked(n, self.k(n)?))
    }

    pub(crate) fn zk_matrix_unchecked(&self, n: Vec2<T>, k: T) -> Mat2<T> {
        if let Density::Isotropic = self.density {
            // I + (k - 2) n nᵀ, which is exactly I for the default k = 2
            let d = k - T::lit(2.0);
            let off = d * n.x * n.y;
            return Mat2 { a11: T::one() + d * n.x * n.x, a12: off, a21: off, a22: T::one() + d * n.y * n.y };
        }
        let g = self.gamma_unchecked(n);
        let xi = self.grad_gamma(n).expect("unit normal is nonzero");
        // assembled entrywise so the off-diagonals are bitwise equal
        let off = k * n.x * n.y - n.x * xi.y - xi.x * n.y;
        Mat2 {
            a11: g - (n.x * xi.x + n.x * xi.x) + k * n.x * n.x,
            a12: off,
            a21: off,
            a22: g - (n.y * xi.y + n.y * xi.y) + k * n.y * n.y,
        }
    }

    /// Residual `{Z_k(n) ĥ/|h|}·(ĥ − h) − [γ(−ĥ^⊥) − γ(−h^⊥)]` with
    /// `n = −h^⊥/|h|`. Non-negative iff the stability inequality holds for
    /// this pair.
    pub fn stability_gap(&self, h_old: Vec2<T>, h_new: Vec2<T>) -> Result<T> {
        self.check_nonzero(h_old)?;
        self.check_nonzero(h_new)?;
        let len = h_old.norm();
        let n = -h_old.perp().scale(T::one() / len);
        let z = self.zk_matrix_unchecked(n, self.k(n)?);
        let lhs = z.apply(h_new).scale(T::one() / len).dot(h_new - h_old);
        let rhs = self.gamma_unchecked(-h_new.perp()) - self.gamma_unchecked(-h_old.perp());
        Ok(lhs - rhs)
    }

    /// Best (most negative) stability gap over an angular grid of `h`, `ĥ`
    /// and a set of length ratios `|ĥ|/|h|`.
    pub fn certify(&self, directions: usize, ratios: &[T]) -> Result<StabilityCertificate<T>> {
        let mut worst = StabilityCertificate { min_gap: T::infinity(), h_old: Vec2::zero(), h_new: Vec2::zero() };
        for i in 0..directions {
            let a = T::lit(std::f64::consts::TAU * i as f64 / directions as f64);
            let h = Vec2::new(a.cos(), a.sin());
            for j in 0..directions {
                let b = T::lit(std::f64::consts::TAU * j as f64 / directions as f64);
                let dir = Vec2::new(b.cos(), b.sin());
                for &r in ratios {
                    let hn = dir.scale(r);
                    let gap = self.stability_gap(h, hn)?;
                    if gap < worst.min_gap {
                        worst = StabilityCertificate { min_gap: gap, h_old: h, h_new: hn };
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// Geometric ratios `4^{-1} .. 4` with `count` samples.
pub fn default_ratios<T: Real>(count: usize) -> Vec<T> {
    if count == 1 {
        return vec![T::one()];
    }
    (0..count)
        .map(|i| T::lit(4f64.powf(2.0 * i as f64 / (count - 1) as f64 - 1.0)))
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct StabilityCertificate<T> {
    pub min_gap: T,
    pub h_old: Vec2<T>,
    pub h_new: Vec2<T>,
}

/// `P_α(n, n̂) − Q(n, n̂)`; `None` where the radicand of `P_α` is negative.
pub fn auxiliary_margin<T: Real>(a: &Anisotropy<T>, n: Vec2<T>, n_hat: Vec2<T>, alpha: T) -> Result<Option<T>> {
    let g = a.gamma(n)?;
    let xi = a.grad_gamma(n)?;
    let s = n_hat.dot(n.perp());
    let radicand = (-g + T::lit(2.0) * n.dot(n_hat) * xi.dot(n_hat) + alpha * s * s) * g;
    let q = a.gamma(n_hat)? + xi.dot(n_hat);
    if radicand < T::zero() {
        return Ok(None);
    }
    Ok(Some(T::lit(2.0) * radicand.sqrt() - q))
}

/// Sampling parameters for [`min_stabilizer_search`].
#[derive(Debug, Clone, Copy)]
pub struct StabilizerGrid<T> {
    /// Number of sampled `n̂` on the unit circle.
    pub directions: usize,
    /// Upper end of the searched `α` range.
    pub alpha_max: T,
    /// Bisection stops once the bracket is narrower than this.
    pub alpha_tol: T,
}

impl<T: Real> Default for StabilizerGrid<T> {
    fn default() -> Self {
        Self { directions: 360, alpha_max: T::lit(1e3), alpha_tol: T::lit(1e-6) }
    }
}

/// Worst margin over the `n̂` grid; negative means the inequality fails.
pub fn worst_margin<T: Real>(a: &Anisotropy<T>, n: Vec2<T>, alpha: T, directions: usize) -> Result<T> {
    let tol = T::lit(1e-12);
    let mut worst = T::infinity();
    for j in 0..directions {
        let b = T::lit(std::f64::consts::TAU * j as f64 / directions as f64);
        let nh = Vec2::new(b.cos(), b.sin());
        let m = match auxiliary_margin(a, n, nh, alpha)? {
            Some(m) => m,
            None => -T::one(),
        };
        // n̂ = n is an equality case; absorb roundoff there
        let m = if m.abs() <= tol { T::zero() } else { m };
        worst = worst.min(m);
    }
    Ok(worst)
}

/// Smallest `α ≥ 0` (to `alpha_tol`) for which `P_α − Q ≥ 0` at every
/// sampled `n̂`. The margin is non-decreasing in `α`, so bisection applies.
pub fn min_stabilizer_search<T: Real>(a: &Anisotropy<T>, n: Vec2<T>, grid: StabilizerGrid<T>) -> Result<T> {
    let n = n.normalized().ok_or_else(|| SsdError::ZeroVector(a.name().to_string()))?;
    let minus = a.gamma(-n)?;
    let plus = a.gamma(n)?;
    if !(minus < T::lit(3.0) * plus) {
        return Err(SsdError::StabilizerDoesNotExist {
            minus: minus.to_f64_lossy(),
            three_plus: (T::lit(3.0) * plus).to_f64_lossy(),
        });
    }
    if worst_margin(a, n, T::zero(), grid.directions)? >= T::zero() {
        return Ok(T::zero());
    }
    if worst_margin(a, n, grid.alpha_max, grid.directions)? < T::zero() {
        return Err(SsdError::StabilizerSearchExhausted(grid.alpha_max.to_f64_lossy()));
    }
    let (mut lo, mut hi) = (T::zero(), grid.alpha_max);
    while hi - lo > grid.alpha_tol {
        let mid = (lo + hi) * T::lit(0.5);
        if worst_margin(a, n, mid, grid.directions)? >= T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
