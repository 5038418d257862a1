//! Initial film geometries attached to a substrate.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsdError};
use crate::geometry::PolygonalCurve;
use crate::real::Real;
use crate::scheme::SchemeState;
use crate::substrate::Substrate;
use crate::vec2::Vec2;

/// Samples per unit arclength used to place nodes on curved pieces.
const DENSITY: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilmSpec {
    /// Walls along the substrate normal and a top at constant normal offset.
    OffsetBand { c_left: f64, c_right: f64, thickness: f64 },
    /// Vertical walls and a top translated vertically by `thickness`.
    StepFilm { c_left: f64, c_right: f64, thickness: f64 },
    /// Explicit nodes; the endpoints are replaced by `r(c_left)`, `r(c_right)`.
    CustomNodes { c_left: f64, c_right: f64, nodes: Vec<[f64; 2]> },
}

impl FilmSpec {
    pub fn contacts(&self) -> (f64, f64) {
        match self {
            Self::OffsetBand { c_left, c_right, .. }
            | Self::StepFilm { c_left, c_right, .. }
            | Self::CustomNodes { c_left, c_right, .. } => (*c_left, *c_right),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (l, r) = self.contacts();
        if !(l.is_finite() && r.is_finite() && l < r) {
            return Err(SsdError::Config {
                field: "films.c_left".into(),
                message: format!("contact interval [{l}, {r}] must be finite and increasing"),
            });
        }
        match self {
            Self::OffsetBand { thickness, .. } | Self::StepFilm { thickness, .. } => {
                if !(*thickness > 0.0 && thickness.is_finite()) {
                    return Err(SsdError::Config {
                        field: "films.thickness".into(),
                        message: format!("must be positive, got {thickness}"),
                    });
                }
            }
            Self::CustomNodes { nodes, .. } => {
                if nodes.len() < 5 {
                    return Err(SsdError::Config {
                        field: "films.nodes".into(),
                        message: format!("need at least 5 nodes, got {}", nodes.len()),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A densely sampled piece of the film boundary.
struct Piece<T> {
    points: Vec<Vec2<T>>,
    cumulative: Vec<T>,
}

impl<T: Real> Piece<T> {
    fn new(points: Vec<Vec2<T>>) -> Self {
        let mut cumulative = vec![T::zero()];
        for w in points.windows(2) {
            let last = *cumulative.last().expect("non-empty");
            cumulative.push(last + (w[1] - w[0]).norm());
        }
        Self { points, cumulative }
    }

    fn length(&self) -> T {
        *self.cumulative.last().expect("non-empty")
    }

    /// Point at arclength fraction `s ∈ [0, 1]` along the sampled polyline.
    fn at(&self, s: T) -> Vec2<T> {
        let target = s * self.length();
        let k = self.cumulative.partition_point(|&x| x < target).clamp(1, self.points.len() - 1);
        let (a, b) = (self.cumulative[k - 1], self.cumulative[k]);
        let t = if b > a { (target - a) / (b - a) } else { T::zero() };
        self.points[k - 1].lerp(self.points[k], t)
    }
}

/// Splits `n` elements over pieces proportionally to length, rounding down
/// with at least one each; the longest piece takes the remainder. Rounding
/// down keeps dyadic refinements nested (walls of 1, 2, 4, ... elements).
fn distribute<T: Real>(lengths: &[T], n: usize) -> Vec<usize> {
    let total: T = lengths.iter().copied().sum();
    let mut counts: Vec<usize> = lengths
        .iter()
        .map(|&l| ((T::from_usize_lossy(n) * l / total).floor().to_f64_lossy() as usize).max(1))
        .collect();
    let longest = (0..lengths.len()).max_by(|&a, &b| lengths[a].partial_cmp(&lengths[b]).expect("finite")).expect("pieces");
    let others: usize = counts.iter().enumerate().filter(|&(i, _)| i != longest).map(|(_, c)| c).sum();
    counts[longest] = n.saturating_sub(others).max(1);
    counts
}

/// Nodes uniform by arclength within each piece, so piece junctions
/// (the film corners) are always nodes.
fn place<T: Real>(pieces: &[Piece<T>], n: usize) -> Vec<Vec2<T>> {
    let lengths: Vec<T> = pieces.iter().map(Piece::length).collect();
    let counts = distribute(&lengths, n);
    let mut nodes = Vec::with_capacity(n + 1);
    for (piece, &k) in pieces.iter().zip(&counts) {
        for i in 0..k {
            nodes.push(piece.at(T::from_usize_lossy(i) / T::from_usize_lossy(k)));
        }
    }
    nodes.push(*pieces.last().expect("pieces").points.last().expect("points"));
    nodes
}

fn arc_samples<T: Real>(c_l: T, c_r: T) -> usize {
    ((c_r - c_l).to_f64_lossy() * DENSITY as f64).ceil().max(64.0) as usize
}

fn check_offset<T: Real, S: Substrate<T> + ?Sized>(sub: &S, c_l: T, c_r: T, thickness: T) -> Result<()> {
    let m = arc_samples(c_l, c_r);
    let mut kmax = T::zero();
    for i in 0..=m {
        let c = c_l + (c_r - c_l) * T::from_usize_lossy(i) / T::from_usize_lossy(m);
        kmax = kmax.max(sub.curvature(c));
    }
    if thickness * kmax >= T::one() {
        return Err(SsdError::OffsetDegenerate {
            thickness: thickness.to_f64_lossy(),
            radius: (T::one() / kmax).to_f64_lossy(),
        });
    }
    Ok(())
}

fn wall<T: Real>(from: Vec2<T>, to: Vec2<T>) -> Piece<T> {
    Piece::new(vec![from, to])
}

fn top<T: Real>(c_l: T, c_r: T, f: impl Fn(T) -> Vec2<T>) -> Piece<T> {
    let m = arc_samples(c_l, c_r);
    Piece::new((0..=m).map(|i| f(c_l + (c_r - c_l) * T::from_usize_lossy(i) / T::from_usize_lossy(m))).collect())
}

/// Builds the initial state with `n` elements and `μ⁰ = 0`.
pub fn build_initial_film<T: Real, S: Substrate<T> + ?Sized>(spec: &FilmSpec, sub: &S, n: usize) -> Result<SchemeState<T>> {
    spec.validate()?;
    if n < 4 {
        return Err(SsdError::TooFewElements { min: 4, got: n });
    }
    let (l, r) = spec.contacts();
    let (c_l, c_r) = (T::lit(l), T::lit(r));
    let nodes = match spec {
        FilmSpec::OffsetBand { thickness, .. } => {
            let t = T::lit(*thickness);
            check_offset(sub, c_l, c_r, t)?;
            let off = |c: T| sub.point(c) + sub.normal(c).scale(t);
            place(&[wall(sub.point(c_l), off(c_l)), top(c_l, c_r, off), wall(off(c_r), sub.point(c_r))], n)
        }
        FilmSpec::StepFilm { thickness, .. } => {
            let t = T::lit(*thickness);
            for c in [c_l, c_r] {
                if !(sub.normal(c).y > T::zero()) {
                    return Err(SsdError::Config {
                        field: "films.kind".into(),
                        message: format!("step film needs the substrate to face upwards at c = {c}"),
                    });
                }
            }
            let up = Vec2::new(T::zero(), t);
            let off = |c: T| sub.point(c) + up;
            place(&[wall(sub.point(c_l), off(c_l)), top(c_l, c_r, off), wall(off(c_r), sub.point(c_r))], n)
        }
        FilmSpec::CustomNodes { nodes, .. } => {
            let mut pts: Vec<Vec2<T>> = nodes.iter().map(|p| Vec2::new(T::lit(p[0]), T::lit(p[1]))).collect();
            let last = pts.len() - 1;
            pts[0] = sub.point(c_l);
            pts[last] = sub.point(c_r);
            pts
        }
    };
    let m = nodes.len();
    SchemeState::new(PolygonalCurve::new(nodes)?, vec![T::zero(); m], c_l, c_r, T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::total_mass;
    use crate::substrate::{Circle, Line, SmoothedCorner};

    fn band(l: f64, r: f64, t: f64) -> FilmSpec {
        FilmSpec::OffsetBand { c_left: l, c_right: r, thickness: t }
    }

    #[test]
    fn flat_rectangle() {
        let sub = Line::horizontal();
        let s: SchemeState<f64> = build_initial_film(&band(0.0, 5.0, 1.0), &sub, 32).unwrap();
        let nodes = s.curve.nodes();
        assert_eq!(nodes.len(), 33);
        for corner in [Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(5.0, 1.0), Vec2::new(5.0, 0.0)] {
            assert!(nodes.iter().any(|p| (*p - corner).norm() < 1e-14), "{corner:?}");
        }
        assert!((total_mass(&s, &sub, 1e-13).unwrap() - 5.0).abs() < 1e-12);
        assert!(s.mu.iter().all(|&m| m == 0.0));
        assert_eq!(s.attachment_error(&sub), 0.0);
    }

    #[test]
    fn piece_counts() {
        assert_eq!(distribute(&[1.0, 5.0, 1.0], 32), vec![4, 24, 4]);
        assert_eq!(distribute(&[1.0, 5.0, 1.0], 16), vec![2, 12, 2]);
        assert_eq!(distribute(&[1.0, 5.0, 1.0], 8), vec![1, 6, 1]);
        assert_eq!(distribute(&[0.01, 5.0, 0.01], 8), vec![1, 6, 1]);
    }

    #[test]
    fn annular_sector_mass() {
        let sub = Circle::convex(20.0);
        let s: SchemeState<f64> = build_initial_film(&band(-2.5, 2.5, 1.0), &sub, 256).unwrap();
        // polygonal top inscribed in the arc of radius 21
        let m = total_mass(&s, &sub, 1e-13).unwrap();
        let exact = 5.0 * (1.0 + 1.0 / 40.0);
        assert!((m - exact).abs() < 2e-3, "{m}");
        assert!(m < exact);
    }

    #[test]
    fn offset_degenerates_inside_small_circle() {
        let sub = Circle::concave(20.0);
        let r: Result<SchemeState<f64>> = build_initial_film(&band(-2.5, 2.5, 25.0), &sub, 32);
        assert!(matches!(r, Err(SsdError::OffsetDegenerate { .. })));
        let ok: Result<SchemeState<f64>> = build_initial_film(&band(-2.5, 2.5, 25.0), &Circle::convex(20.0), 32);
        assert!(ok.is_ok());
    }

    #[test]
    fn step_film_over_corner() {
        let sub = SmoothedCorner::new(1.0);
        let spec = FilmSpec::StepFilm { c_left: -10.0, c_right: 10.0, thickness: 2.0 };
        let s: SchemeState<f64> = build_initial_film(&spec, &sub, 64).unwrap();
        let nodes = s.curve.nodes();
        assert_eq!(nodes[1].x, nodes[0].x);
        assert!(s.attachment_error(&sub) == 0.0);
        // a graph translated upwards encloses thickness × horizontal extent
        let extent = sub.point(10.0).x - sub.point(-10.0).x;
        assert!((total_mass(&s, &sub, 1e-13).unwrap() - 2.0 * extent).abs() < 1e-2);
    }

    #[test]
    fn custom_nodes_snap_endpoints() {
        let sub = Line::horizontal();
        let spec = FilmSpec::CustomNodes {
            c_left: 0.0,
            c_right: 2.0,
            nodes: vec![[0.1, 0.0], [0.0, 1.0], [1.0, 1.5], [2.0, 1.0], [2.0, 0.1]],
        };
        let s: SchemeState<f64> = build_initial_film(&spec, &sub, 4).unwrap();
        assert_eq!(s.curve.first(), Vec2::new(0.0, 0.0));
        assert_eq!(s.curve.last(), Vec2::new(2.0, 0.0));
    }

    #[test]
    fn validation() {
        assert!(band(1.0, 1.0, 1.0).validate().is_err());
        assert!(band(0.0, 1.0, -1.0).validate().is_err());
        let sub = Line::horizontal();
        assert!(matches!(
            build_initial_film::<f64, _>(&band(0.0, 1.0, 1.0), &sub, 3),
            Err(SsdError::TooFewElements { .. })
        ));
    }
}
