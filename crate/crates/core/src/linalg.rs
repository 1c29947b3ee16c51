//! Dense complex Gaussian elimination with scaled partial pivoting.
//!
//! Sized for the 16×16 steady-state systems of the oracle; no blocking, no
//! iterative refinement.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Pivots whose magnitude relative to their original row scale fall below
/// this are rejected.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Cplx::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Cplx<T> {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Cplx<T>) {
        self.data[r * self.n + c] = v;
    }

    pub fn add(&mut self, r: usize, c: usize, v: Cplx<T>) {
        self.data[r * self.n + c] = self.data[r * self.n + c] + v;
    }

    pub fn row(&self, r: usize) -> &[Cplx<T>] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Cplx<T>] {
        let n = self.n;
        &mut self.data[r * n..(r + 1) * n]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.n {
            self.data.swap(a * self.n + c, b * self.n + c);
        }
    }

    pub fn mul_vec(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        (0..self.n)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(Cplx::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|r| self.row(r).iter().fold(T::zero(), |s, z| s + z.norm()))
            .fold(T::zero(), T::max)
    }
}

pub fn norm_inf_vec<T: Real>(x: &[Cplx<T>]) -> T {
    x.iter().map(|z| z.norm()).fold(T::zero(), T::max)
}

#[derive(Debug, Clone)]
pub struct DenseSolution<T> {
    pub x: Vec<Cplx<T>>,
    /// `‖Ax − b‖∞ / (‖A‖∞ ‖x‖∞)`.
    pub relative_residual: T,
}

/// Solves `a·x = b`.
#[allow(clippy::needless_range_loop)]
pub fn solve<T: Real>(a: &DenseMatrix<T>, b: &[Cplx<T>]) -> Result<DenseSolution<T>> {
    let n = a.dim();
    assert_eq!(b.len(), n, "rhs length must match matrix dimension");
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let mut scale: Vec<T> = (0..n)
        .map(|r| m.row(r).iter().map(|z| z.norm()).fold(T::zero(), T::max))
        .collect();
    let tol = T::lit(PIVOT_TOLERANCE);

    for k in 0..n {
        let mut best = k;
        let mut best_ratio = -T::one();
        for r in k..n {
            let ratio = if scale[r] > T::zero() {
                m.get(r, k).norm() / scale[r]
            } else {
                T::zero()
            };
            if ratio > best_ratio {
                best_ratio = ratio;
                best = r;
            }
        }
        if !(best_ratio > tol) {
            return Err(Error::SingularSystem {
                column: k,
                pivot: best_ratio.as_f64(),
            });
        }
        m.swap_rows(k, best);
        rhs.swap(k, best);
        scale.swap(k, best);

        let pivot = m.get(k, k);
        for r in k + 1..n {
            let f = m.get(r, k) / pivot;
            if f == Cplx::new(T::zero(), T::zero()) {
                continue;
            }
            m.set(r, k, Cplx::new(T::zero(), T::zero()));
            for c in k + 1..n {
                let v = m.get(r, c) - f * m.get(k, c);
                m.set(r, c, v);
            }
            rhs[r] = rhs[r] - f * rhs[k];
        }
    }

    let mut x = vec![Cplx::new(T::zero(), T::zero()); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for c in k + 1..n {
            acc = acc - m.get(k, c) * x[c];
        }
        x[k] = acc / m.get(k, k);
    }

    let ax = a.mul_vec(&x);
    let res = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (*p - *q).norm())
        .fold(T::zero(), T::max);
    let denom = a.norm_inf() * norm_inf_vec(&x);
    let relative_residual = if denom > T::zero() { res / denom } else { res };
    Ok(DenseSolution {
        x,
        relative_residual,
    })
}
