//! Polygonal curves over the uniform reference partition of `[0, 1]`,
//! element-wise tangents and normals, and the mass-lumped inner product.

use std::ops::Index;

use crate::error::{Result, SsdError};
use crate::real::Real;
use crate::vec2::Vec2;

/// Relative length below which an element is considered degenerate.
pub const DEGENERATE_REL: f64 = 1e-14;

/// Ordered nodes `X(ρ_j)`, `j = 0..=N`, with `ρ_j = j / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalCurve<T> {
    nodes: Vec<Vec2<T>>,
}

impl<T: Real> PolygonalCurve<T> {
    pub fn new(nodes: Vec<Vec2<T>>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(SsdError::TooFewElements { min: 1, got: nodes.len().saturating_sub(1) });
        }
        let curve = Self { nodes };
        curve.check_elements()?;
        Ok(curve)
    }

    pub fn nodes(&self) -> &[Vec2<T>] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<Vec2<T>> {
        self.nodes
    }

    pub fn node_mut(&mut self, j: usize) -> &mut Vec2<T> {
        &mut self.nodes[j]
    }

    /// Element count `N`.
    pub fn element_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Reference mesh size `h = 1/N`.
    pub fn mesh_size(&self) -> T {
        T::one() / T::from_usize_lossy(self.element_count())
    }

    pub fn first(&self) -> Vec2<T> {
        self.nodes[0]
    }

    pub fn last(&self) -> Vec2<T> {
        self.nodes[self.nodes.len() - 1]
    }

    /// Chord vector of element `j` (1-based, joining nodes `j-1` and `j`).
    pub fn element_vector(&self, j: usize) -> Vec2<T> {
        self.nodes[j] - self.nodes[j - 1]
    }

    /// Element chords, indexed `0..N` (entry `e` joins nodes `e` and `e+1`).
    pub fn element_vectors(&self) -> Vec<Vec2<T>> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn element_lengths(&self) -> ElementField<T> {
        ElementField(self.nodes.windows(2).map(|w| (w[1] - w[0]).norm()).collect())
    }

    pub fn length(&self) -> T {
        self.element_lengths().0.into_iter().sum()
    }

    pub fn diameter(&self) -> T {
        let (mut lo, mut hi) = (self.nodes[0], self.nodes[0]);
        for p in &self.nodes {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (hi - lo).norm()
    }

    fn degenerate_threshold(&self) -> T {
        let d = self.diameter();
        let scale = if d > T::zero() { d } else { T::one() };
        T::lit(DEGENERATE_REL) * scale
    }

    pub(crate) fn check_elements(&self) -> Result<()> {
        let thr = self.degenerate_threshold();
        for (e, w) in self.nodes.windows(2).enumerate() {
            let l = (w[1] - w[0]).norm();
            if !(l > thr) {
                return Err(SsdError::DegenerateElement(e + 1));
            }
        }
        Ok(())
    }
}

/// One value per element, indexed `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementField<V>(pub Vec<V>);

impl<V> ElementField<V> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[V] {
        &self.0
    }
}

impl<V> Index<usize> for ElementField<V> {
    type Output = V;
    fn index(&self, i: usize) -> &V {
        &self.0[i]
    }
}

/// Unit tangent `τ^m` and normal `n^m = -(τ^m)^⊥` on each element.
pub fn element_tangent_normal<T: Real>(
    curve: &PolygonalCurve<T>,
) -> Result<(ElementField<Vec2<T>>, ElementField<Vec2<T>>)> {
    let thr = curve.degenerate_threshold();
    let mut tangents = Vec::with_capacity(curve.element_count());
    let mut normals = Vec::with_capacity(curve.element_count());
    for (e, v) in curve.element_vectors().into_iter().enumerate() {
        let l = v.norm();
        if !(l > thr) {
            return Err(SsdError::DegenerateElement(e + 1));
        }
        let t = v.scale(T::one() / l);
        tangents.push(t);
        normals.push(-t.perp());
    }
    Ok((ElementField(tangents), ElementField(normals)))
}

/// Time-weighted normal `-(X^m_ρ + X^{m+1}_ρ)^⊥ / (2|X^m_ρ|)` per element.
///
/// Not unit length in general; only the old element length enters the
/// denominator.
pub fn time_weighted_normal<T: Real>(
    old: &PolygonalCurve<T>,
    new: &PolygonalCurve<T>,
) -> Result<ElementField<Vec2<T>>> {
    if old.element_count() != new.element_count() {
        return Err(SsdError::LengthMismatch {
            expected: old.element_count(),
            got: new.element_count(),
        });
    }
    let thr = old.degenerate_threshold();
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(old.element_count());
    for j in 1..=old.element_count() {
        let a = old.element_vector(j);
        let b = new.element_vector(j);
        let l = a.norm();
        if !(l > thr) {
            return Err(SsdError::DegenerateElement(j));
        }
        out.push(-(a + b).perp().scale(half / l));
    }
    Ok(ElementField(out))
}

/// Values for which a pointwise product is defined.
pub trait Pairing<T>: Copy {
    fn pair(self, other: Self) -> T;
}

impl<T: Real> Pairing<T> for T {
    fn pair(self, other: Self) -> T {
        self * other
    }
}

impl<T: Real> Pairing<T> for Vec2<T> {
    fn pair(self, other: Self) -> T {
        self.dot(other)
    }
}

/// A piecewise function on the reference partition, evaluable at one-sided
/// limits `q_j^±`.
#[derive(Debug, Clone, Copy)]
pub enum PiecewiseField<'a, V> {
    /// Continuous piecewise-linear, given by its `N+1` nodal values.
    Nodal(&'a [V]),
    /// Piecewise constant, one value per element.
    Element(&'a [V]),
}

impl<'a, V: Copy> PiecewiseField<'a, V> {
    fn check(&self, n: usize) -> Result<()> {
        let (expected, got) = match self {
            Self::Nodal(v) => (n + 1, v.len()),
            Self::Element(v) => (n, v.len()),
        };
        if expected == got {
            Ok(())
        } else {
            Err(SsdError::LengthMismatch { expected, got })
        }
    }

    /// Limit from the left at node `j` (inside element `j`, 1-based).
    fn left(&self, j: usize) -> V {
        match self {
            Self::Nodal(v) => v[j],
            Self::Element(v) => v[j - 1],
        }
    }

    /// Limit from the right at node `j` (inside element `j+1`).
    fn right(&self, j: usize) -> V {
        match self {
            Self::Nodal(v) => v[j],
            Self::Element(v) => v[j],
        }
    }
}

/// `(h/2) Σ_j [(f·g)(q_j⁻) + (f·g)(q_{j-1}⁺)]` on the uniform partition.
pub fn mass_lumped_inner<T: Real, V: Pairing<T>>(
    curve: &PolygonalCurve<T>,
    f: PiecewiseField<'_, V>,
    g: PiecewiseField<'_, V>,
) -> Result<T> {
    let n = curve.element_count();
    f.check(n)?;
    g.check(n)?;
    let mut acc = T::zero();
    for j in 1..=n {
        acc += f.left(j).pair(g.left(j)) + f.right(j - 1).pair(g.right(j - 1));
    }
    Ok(acc * curve.mesh_size() * T::lit(0.5))
}

/// `Σ_j weight_j |X(ρ_j) - X(ρ_{j-1})|`.
pub fn curve_weighted_length<T: Real>(curve: &PolygonalCurve<T>, weight: &ElementField<T>) -> Result<T> {
    if weight.len() != curve.element_count() {
        return Err(SsdError::LengthMismatch { expected: curve.element_count(), got: weight.len() });
    }
    Ok(curve.element_lengths().0.iter().zip(weight.values()).map(|(&l, &w)| l * w).sum())
}

/// `(1/2) Σ_j midpoint_j · n_j |element_j|`, the discrete `½∫ X·n ds`.
///
/// With `n = -τ^⊥` the normal points to the left of the direction of
/// travel, so a closed clockwise polygon returns its (positive) area.
pub fn polygon_flux_integral<T: Real>(curve: &PolygonalCurve<T>) -> T {
    // midpoint · (-(Δ)^⊥) = (p + q)/2 · (−Δy, Δx) = (p_y q_x − p_x q_y)
    let mut acc = T::zero();
    for w in curve.nodes().windows(2) {
        acc += w[0].y * w[1].x - w[0].x * w[1].y;
    }
    acc * T::lit(0.5)
}

/// Ratio of the longest to the shortest element.
pub fn mesh_ratio<T: Real>(curve: &PolygonalCurve<T>) -> Result<T> {
    let lengths = curve.element_lengths();
    let thr = curve.degenerate_threshold();
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for (e, &l) in lengths.values().iter().enumerate() {
        if !(l > thr) {
            return Err(SsdError::DegenerateElement(e + 1));
        }
        lo = lo.min(l);
        hi = hi.max(l);
    }
    Ok(hi / lo)
}
