//! Discrete energy and mass, and the manifold distance between two films.

use serde::{Deserialize, Serialize};

use crate::anisotropy::Anisotropy;
use crate::error::{Result, SsdError};
use crate::geometry::polygon_flux_integral;
use crate::real::Real;
use crate::scheme::SchemeState;
use crate::substrate::{substrate_flux_integral, Substrate};
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub energy: f64,
    pub mass: f64,
    pub c_l: f64,
    pub c_r: f64,
    pub iterations: usize,
    pub mesh_ratio: f64,
}

/// `W = Σ_j γ(n_j)|h_j| − σ(c_r − c_l)`.
pub fn total_energy<T: Real>(state: &SchemeState<T>, aniso: &Anisotropy<T>, sigma: T) -> Result<T> {
    let mut w = T::zero();
    for a in state.curve.element_vectors() {
        // γ(n)|a| = γ(−a^⊥) by homogeneity
        w += aniso.gamma(-a.perp())?;
    }
    Ok(w - sigma * (state.c_r - state.c_l))
}

/// Signed area between the film and the substrate arc `[c_l, c_r]`.
pub fn total_mass<T: Real, S: Substrate<T> + ?Sized>(state: &SchemeState<T>, sub: &S, qtol: T) -> Result<T> {
    Ok(polygon_flux_integral(&state.curve) - substrate_flux_integral(sub, state.c_l, state.c_r, qtol)?)
}

/// Closed film region: the film polyline followed by the substrate arc back
/// from `c_r` to `c_l`, sampled at the multiples of `spacing` so that two
/// regions on the same substrate share their common arc points exactly.
pub fn film_region<T: Real, S: Substrate<T> + ?Sized>(state: &SchemeState<T>, sub: &S, spacing: T) -> Vec<Vec2<T>> {
    let mut pts = state.curve.nodes().to_vec();
    let n = pts.len() - 1;
    pts[0] = sub.point(state.c_l);
    pts[n] = sub.point(state.c_r);
    let guard = spacing * T::lit(1e-6);
    let hi = (state.c_r / spacing).floor().to_i64().expect("finite arclength");
    let lo = (state.c_l / spacing).ceil().to_i64().expect("finite arclength");
    for k in (lo..=hi).rev() {
        let c = spacing * T::from_i64(k).expect("representable");
        if c > state.c_l + guard && c < state.c_r - guard {
            pts.push(sub.point(c));
        }
    }
    pts
}

fn segments_cross<T: Real>(p1: Vec2<T>, p2: Vec2<T>, q1: Vec2<T>, q2: Vec2<T>) -> Option<T> {
    // parameter along p where the open segments intersect transversally
    let r = p2 - p1;
    let s = q2 - q1;
    let den = r.cross(s);
    let scale = r.norm() * s.norm();
    if den.abs() <= T::lit(1e-14) * scale {
        return None;
    }
    let d = q1 - p1;
    let t = d.cross(s) / den;
    let u = d.cross(r) / den;
    let (lo, hi) = (T::zero(), T::one());
    if t > lo && t < hi && u > lo && u < hi {
        Some(t)
    } else {
        None
    }
}

/// Errors if two non-adjacent edges of the closed polygon cross.
pub fn check_simple<T: Real>(poly: &[Vec2<T>]) -> Result<()> {
    let m = poly.len();
    for i in 0..m {
        let (a, b) = (poly[i], poly[(i + 1) % m]);
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            if segments_cross(a, b, poly[j], poly[(j + 1) % m]).is_some() {
                return Err(SsdError::SelfIntersection(i, j));
            }
        }
    }
    Ok(())
}

struct Edge<T> {
    a: Vec2<T>,
    b: Vec2<T>,
    owner: usize,
    wind: i32,
}

impl<T: Real> Edge<T> {
    fn y_at(&self, x: T) -> T {
        let t = (x - self.a.x) / (self.b.x - self.a.x);
        self.a.y + (self.b.y - self.a.y) * t
    }
    fn x_range(&self) -> (T, T) {
        (self.a.x.min(self.b.x), self.a.x.max(self.b.x))
    }
}

/// `|A∖B| + |B∖A|` for two simple closed polygons of either orientation,
/// by vertical slab decomposition with winding numbers.
pub fn symmetric_difference_area<T: Real>(a: &[Vec2<T>], b: &[Vec2<T>]) -> T {
    let mut edges: Vec<Edge<T>> = Vec::new();
    for (owner, poly) in [a, b].into_iter().enumerate() {
        let m = poly.len();
        for i in 0..m {
            let (p, q) = (poly[i], poly[(i + 1) % m]);
            if p.x != q.x {
                edges.push(Edge { a: p, b: q, owner, wind: if q.x > p.x { 1 } else { -1 } });
            }
        }
    }
    let mut xs: Vec<T> = a.iter().chain(b).map(|p| p.x).collect();
    let split = edges.iter().position(|e| e.owner == 1).unwrap_or(edges.len());
    let (ea, eb) = edges.split_at(split);
    for e in ea {
        let (lo, hi) = e.x_range();
        for f in eb {
            let (flo, fhi) = f.x_range();
            if fhi < lo || flo > hi {
                continue;
            }
            if let Some(t) = segments_cross(e.a, e.b, f.a, f.b) {
                xs.push(e.a.x + (e.b.x - e.a.x) * t);
            }
        }
    }
    xs.sort_by(|p, q| p.partial_cmp(q).expect("finite coordinates"));
    xs.dedup();

    // sweep: edges sorted by left end, an active list pruned per slab
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&i, &j| edges[i].x_range().0.partial_cmp(&edges[j].x_range().0).expect("finite"));
    let mut next = 0;
    let mut active: Vec<usize> = Vec::new();
    let mut area = T::zero();
    let half = T::lit(0.5);
    let mut stack: Vec<(T, T, T, usize, i32)> = Vec::new();
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if !(x1 > x0) {
            continue;
        }
        while next < order.len() && edges[order[next]].x_range().0 <= x0 {
            active.push(order[next]);
            next += 1;
        }
        active.retain(|&i| edges[i].x_range().1 > x0);
        let xm = (x0 + x1) * half;
        stack.clear();
        for &i in &active {
            let e = &edges[i];
            let (lo, hi) = e.x_range();
            if lo <= x0 && hi >= x1 {
                stack.push((e.y_at(xm), e.y_at(x0), e.y_at(x1), e.owner, e.wind));
            }
        }
        stack.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite"));
        let (mut wa, mut wb) = (0i32, 0i32);
        for k in 0..stack.len().saturating_sub(1) {
            let (_, y0, y1, owner, wind) = stack[k];
            if owner == 0 {
                wa += wind;
            } else {
                wb += wind;
            }
            if (wa != 0) != (wb != 0) {
                let (_, z0, z1, _, _) = stack[k + 1];
                area += ((z0 - y0) + (z1 - y1)) * half * (x1 - x0);
            }
        }
    }
    area
}

/// Area of the symmetric difference of the two film regions. The shared
/// substrate arc is sampled at a quarter of the smaller minimum element
/// length.
pub fn manifold_distance<T: Real, S: Substrate<T> + ?Sized>(
    a: &SchemeState<T>,
    b: &SchemeState<T>,
    sub: &S,
) -> Result<T> {
    let hmin = |s: &SchemeState<T>| s.curve.element_lengths().values().iter().copied().fold(T::infinity(), T::min);
    let spacing = hmin(a).min(hmin(b)) * T::lit(0.25);
    let pa = film_region(a, sub, spacing);
    let pb = film_region(b, sub, spacing);
    check_simple(&pa)?;
    check_simple(&pb)?;
    Ok(symmetric_difference_area(&pa, &pb))
}

/// First time the sampled trace `(t, x)` reaches `level` from below,
/// linearly interpolated.
pub fn crossing_time(trace: &[(f64, f64)], level: f64) -> Option<f64> {
    trace.windows(2).find_map(|w| {
        let ((t0, x0), (t1, x1)) = (w[0], w[1]);
        (x0 < level && x1 >= level).then(|| t0 + (level - x0) / (x1 - x0) * (t1 - t0))
    })
}

/// Least-squares slope of the points with `lo ≤ t ≤ hi`.
pub fn windowed_slope(trace: &[(f64, f64)], lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<_> = trace.iter().filter(|(t, _)| *t >= lo && *t <= hi).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerPassage {
    pub t_before: f64,
    pub t_after: f64,
    pub slope_before: f64,
    pub slope_after: f64,
}

impl CornerPassage {
    pub fn ratio(&self) -> f64 {
        self.slope_after / self.slope_before
    }
}

/// Retraction rates of an edge trace over `window` time units just before it
/// reaches `before` and just after it reaches `after`.
pub fn corner_passage(trace: &[(f64, f64)], before: f64, after: f64, window: f64) -> Option<CornerPassage> {
    let t_before = crossing_time(trace, before)?;
    let t_after = crossing_time(trace, after)?;
    let end = trace.last()?.0;
    if t_before - window < trace.first()?.0 || t_after + window > end {
        return None;
    }
    Some(CornerPassage {
        t_before,
        t_after,
        slope_before: windowed_slope(trace, t_before - window, t_before)?,
        slope_after: windowed_slope(trace, t_after, t_after + window)?,
    })
}
