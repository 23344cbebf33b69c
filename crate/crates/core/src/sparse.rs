//! Symmetric sparse matrices in compressed-row layout.
//!
//! Both triangles are stored so that a matvec is a single pass over the rows.
//! [`TripletBuilder`] does not mirror entries: callers push (i, j) and (j, i)
//! themselves, which element-by-element assembly of symmetric element
//! matrices does naturally.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{arg, Result};

/// Symmetric sparse matrix with full (both triangles) CSR storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Accumulates (row, col, value) triplets; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self { n, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    /// Sorts by (row, col) with a stable sort and sums duplicates in insertion
    /// order, so the result is bit-reproducible for a fixed push sequence.
    pub fn build(mut self) -> SparseSym {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_offsets[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_offsets[i + 1] += row_offsets[i];
        }
        SparseSym { n: self.n, row_offsets, cols, vals }
    }
}

impl SparseSym {
    pub fn zeros(n: usize) -> Self {
        Self { n, row_offsets: vec![0; n + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut b = TripletBuilder::with_capacity(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            b.push(i, i, v);
        }
        b.build()
    }

    /// Builds from a dense matrix, keeping entries with nonzero value.
    /// Fails if the matrix is not symmetric to 1e-14 relative.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return arg("matrix is not square");
        }
        let scale = a.amax().max(f64::MIN_POSITIVE);
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            for j in 0..n {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-14 * scale {
                    return arg(format!("matrix not symmetric at ({i}, {j})"));
                }
                if a[(i, j)] != 0.0 {
                    b.push(i, j, a[(i, j)]);
                }
            }
        }
        Ok(b.build())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// x^T A y.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    /// x^T A x.
    pub fn quad(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// Infinity norm, an upper bound on the spectral norm of a symmetric matrix.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// alpha * self + beta * other.
    pub fn add_scaled(&self, alpha: f64, other: &SparseSym, beta: f64) -> Result<SparseSym> {
        if self.n != other.n {
            return arg(format!("dimension mismatch {} vs {}", self.n, other.n));
        }
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz() + other.nnz());
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                b.push(i, j, alpha * a);
            }
            let (c, v) = other.row(i);
            for (&j, &a) in c.iter().zip(v) {
                b.push(i, j, beta * a);
            }
        }
        Ok(b.build())
    }

    pub fn scaled(&self, alpha: f64) -> SparseSym {
        let mut s = self.clone();
        s.vals.iter_mut().for_each(|v| *v *= alpha);
        s
    }

    /// Principal submatrix on `keep` (sorted or not); row/column k of the
    /// result corresponds to index `keep[k]` of `self`.
    pub fn principal_submatrix(&self, keep: &[usize]) -> SparseSym {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut b = TripletBuilder::with_capacity(keep.len(), self.nnz());
        for (k, &i) in keep.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if map[j] != usize::MAX {
                    b.push(k, map[j], a);
                }
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                d[(i, j)] += a;
            }
        }
        d
    }

    /// MatrixMarket coordinate format, symmetric, lower triangle, 1-based.
    pub fn to_matrix_market(&self) -> String {
        let mut lower = Vec::new();
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if j <= i {
                    lower.push((i, j, a));
                }
            }
        }
        let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
        let _ = writeln!(s, "{} {} {}", self.n, self.n, lower.len());
        for (i, j, a) in lower {
            let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, a);
        }
        s
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += alpha * x
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseSym {
        let mut b = TripletBuilder::new(3);
        b.push(0, 0, 2.0);
        b.push(0, 1, -1.0);
        b.push(1, 0, -1.0);
        b.push(1, 1, 2.0);
        b.push(1, 1, 1.0);
        b.push(2, 2, 4.0);
        b.build()
    }

    #[test]
    fn duplicates_are_summed() {
        let a = small();
        assert_eq!(a.get(1, 1), 3.0);
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.nnz(), 5);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn submatrix_and_dense_roundtrip() {
        let a = small();
        let s = a.principal_submatrix(&[1, 2]);
        assert_eq!(s.to_dense(), DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0]));
        assert_eq!(SparseSym::from_dense(&a.to_dense()).unwrap(), a);
    }

    #[test]
    fn rejects_nonsymmetric_dense() {
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(SparseSym::from_dense(&d).is_err());
    }

    #[test]
    fn matrix_market_lists_lower_triangle() {
        let mm = small().to_matrix_market();
        let lines: Vec<_> = mm.lines().collect();
        assert_eq!(lines[1], "3 3 4");
        assert_eq!(lines.len(), 6);
    }
}
