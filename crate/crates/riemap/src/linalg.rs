//! Small dense helpers shared by the geometry and map modules: rank-3/4
//! component arrays and metric-orthonormal frame construction.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Rank-3 array of components indexed `(a, b, c)` over a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank3 {
    n: usize,
    data: Vec<f64>,
}

impl Rank3 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.n + b) * self.n + c] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }
}

/// Rank-4 array of components indexed `(a, b, c, d)` over a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank4 {
    n: usize,
    data: Vec<f64>,
}

impl Rank4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        self.data[((a * self.n + b) * self.n + c) * self.n + d] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }
}

/// Inner product of two vectors under a metric matrix.
pub fn metric_dot(g: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    (g * y).dot(x)
}

/// Norm of a vector under a metric matrix.
pub fn metric_norm(g: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    metric_dot(g, x, x).max(0.0).sqrt()
}

/// Orthonormalizes `candidates` against `fixed` and against each other in the
/// inner product given by `g`, keeping `count` vectors.
///
/// Pivots on the largest remaining metric norm at every step, so the result
/// is deterministic for a given input order. Errors if the candidates span
/// fewer than `count` dimensions beyond `fixed`.
pub fn gram_schmidt(
    g: &DMatrix<f64>,
    fixed: &[DVector<f64>],
    candidates: &[DVector<f64>],
    count: usize,
) -> Result<Vec<DVector<f64>>> {
    let mut pool: Vec<DVector<f64>> = candidates.to_vec();
    for v in pool.iter_mut() {
        for f in fixed {
            let c = metric_dot(g, v, f);
            *v -= f * c;
        }
    }
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let (best, best_norm) = pool
            .iter()
            .enumerate()
            .map(|(i, v)| (i, metric_norm(g, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or(Error::DegenerateFrame { wanted: count })?;
        if best_norm < 1e-12 {
            return Err(Error::DegenerateFrame { wanted: count });
        }
        let e = pool.swap_remove(best) / best_norm;
        for v in pool.iter_mut() {
            let c = metric_dot(g, v, &e);
            *v -= &e * c;
        }
        frame.push(e);
    }
    Ok(frame)
}

/// Component of `x` inside the span of a `g`-orthonormal frame.
pub fn project_onto_frame(
    g: &DMatrix<f64>,
    frame: &[DVector<f64>],
    x: &DVector<f64>,
) -> DVector<f64> {
    let mut out = DVector::zeros(x.len());
    for e in frame {
        out += e * metric_dot(g, x, e);
    }
    out
}

/// Max absolute entry of a matrix.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}
