//! Compressed sparse row storage and a banded LU factorization with
//! partial pivoting, which is all the 1D finite element systems need.

use crate::error::{Result, SsdError};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds an `n × n` matrix, summing duplicate entries.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "entry ({i}, {j}) outside {n}×{n}");
            if last == Some((i, j)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, T::one())).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or_else(T::zero)
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<T>()).fold(T::zero(), T::max)
    }

    /// Lower and upper bandwidths of the sparsity pattern.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

/// `LU = PA` for a band matrix with `kl` sub- and `ku` super-diagonals.
/// Row interchanges widen the upper band of `U` to `kl + ku`.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    width: usize,
    upper: Vec<T>,
    lower: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Real> BandLu<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut upper = vec![T::zero(); n * width];
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            for (j, v) in a.row(i) {
                upper[idx(i, j)] = v;
            }
        }
        let scale = a.norm_inf();
        let mut lower = vec![T::zero(); n * kl.max(1)];
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = upper[idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = upper[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > T::epsilon() * scale * T::lit(1e-6)) {
                return Err(SsdError::SingularMatrix { column: k, pivot: best.to_f64_lossy() });
            }
            pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    upper.swap(idx(k, j), idx(p, j));
                }
            }
            let d = upper[idx(k, k)];
            for i in k + 1..=last_row {
                let m = upper[idx(i, k)] / d;
                lower[k * kl + (i - k - 1)] = m;
                if m != T::zero() {
                    for j in k + 1..=last_col {
                        let u = upper[idx(k, j)];
                        upper[idx(i, j)] -= m * u;
                    }
                }
            }
        }
        Ok(Self { n, kl, width, upper, lower, pivots })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let (n, kl) = (self.n, self.kl);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                x[i] -= self.lower[k * kl + (i - k - 1)] * xk;
            }
        }
        let span = self.width - kl - 1;
        for k in (0..n).rev() {
            let row = &self.upper[k * self.width..(k + 1) * self.width];
            let mut acc = x[k];
            for j in k + 1..=(k + span).min(n - 1) {
                acc -= row[j + kl - k] * x[j];
            }
            x[k] = acc / row[kl];
        }
        x
    }

    /// `max |u_kk| / min |u_kk|`, a cheap lower bound on the condition number.
    pub fn condition_estimate(&self) -> T {
        let diag = (0..self.n).map(|k| self.upper[k * self.width + self.kl].abs());
        let (lo, hi) = diag.fold((T::infinity(), T::zero()), |(lo, hi), d| (lo.min(d), hi.max(d)));
        hi / lo
    }
}

/// Solves `A u = b`, logging ill-conditioning.
pub fn linear_solve<T: Real>(a: &CsrMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if b.len() != a.dim() {
        return Err(SsdError::LengthMismatch { expected: a.dim(), got: b.len() });
    }
    let lu = BandLu::factor(a)?;
    let cond = lu.condition_estimate();
    if cond > T::lit(1e12) {
        log::warn!("ill-conditioned system: condition estimate {:e}", cond.to_f64_lossy());
    }
    Ok(lu.solve(b))
}

pub fn residual_inf<T: Real>(a: &CsrMatrix<T>, u: &[T], b: &[T]) -> T {
    a.mul_vec(u).iter().zip(b).map(|(x, y)| (*x - *y).abs()).fold(T::zero(), T::max)
}

pub fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().map(|x| x.abs()).fold(T::zero(), T::max)
}
