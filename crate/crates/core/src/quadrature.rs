//! Globally adaptive Gauss–Legendre quadrature with interval bisection.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Result, SsdError};
use crate::real::Real;

const ORDER: usize = 10;
const MAX_DEPTH: usize = 48;
const MAX_PANELS: usize = 1 << 16;

/// Nodes and weights on [-1, 1], computed once by Newton iteration on the
/// Legendre polynomial.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn default_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(ORDER))
}

fn fixed<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> T {
    let (nodes, weights) = default_rule();
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut acc = T::zero();
    for (x, w) in nodes.iter().zip(weights) {
        acc += T::lit(*w) * f(mid + half * T::lit(*x));
    }
    acc * half
}

struct Panel<T> {
    lo: T,
    hi: T,
    left: T,
    right: T,
    err: T,
    depth: usize,
}

impl<T: Real> Panel<T> {
    fn new<F: FnMut(T) -> T>(f: &mut F, lo: T, hi: T, whole: T, depth: usize) -> Self {
        let mid = (lo + hi) * T::lit(0.5);
        let left = fixed(f, lo, mid);
        let right = fixed(f, mid, hi);
        let err = (left + right - whole).abs();
        Self { lo, hi, left, right, err, depth }
    }
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == std::cmp::Ordering::Equal
    }
}

impl<T: Real> Eq for Panel<T> {}

impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.to_f64_lossy().total_cmp(&o.err.to_f64_lossy())
    }
}

/// `∫_a^b f` to absolute tolerance `tol`, refining the panel with the
/// largest error estimate until the estimates sum below `tol`. Reversed
/// limits give the negated integral.
pub fn integrate<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    if b < a {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let floor = T::epsilon() * T::lit(64.0);
    let whole = fixed(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel::new(&mut f, a, b, whole, 0));
    loop {
        let (value, err) = heap.iter().fold((T::zero(), T::zero()), |(v, e), p| (v + p.left + p.right, e + p.err));
        if err <= tol.max(floor * value.abs()) {
            return Ok(value);
        }
        // refine a batch before re-summing
        for _ in 0..heap.len().clamp(1, 64) {
            let p = heap.pop().expect("non-empty");
            if p.depth >= MAX_DEPTH || heap.len() >= MAX_PANELS {
                return Err(SsdError::Quadrature { a: p.lo.to_f64_lossy(), b: p.hi.to_f64_lossy(), estimate: err.to_f64_lossy() });
            }
            let mid = (p.lo + p.hi) * T::lit(0.5);
            heap.push(Panel::new(&mut f, p.lo, mid, p.left, p.depth + 1));
            heap.push(Panel::new(&mut f, mid, p.hi, p.right, p.depth + 1));
        }
    }
}

/// As [`integrate`], additionally splitting at the given interior points.
pub fn integrate_split<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, breaks: &[T], tol: T) -> Result<T> {
    if b < a {
        return integrate_split(f, b, a, breaks, tol).map(|v| -v);
    }
    let mut cuts: Vec<T> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let total = b - a;
    let mut sum = T::zero();
    for w in edges.windows(2) {
        if total > T::zero() {
            sum += integrate(&mut f, w[0], w[1], tol * (w[1] - w[0]) / total)?;
        }
    }
    Ok(sum)
}
