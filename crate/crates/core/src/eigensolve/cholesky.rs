use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::{norm2, SparseSym};

/// Reverse Cuthill-McKee ordering. Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseSym) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, seen: &mut Vec<bool>| -> Vec<usize> {
        // returns nodes in BFS order; used to locate a pseudo-peripheral node
        let mut out = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < out.len() {
            let v = out[head];
            head += 1;
            for &w in a.row(v).0 {
                if !seen[w] {
                    seen[w] = true;
                    out.push(w);
                }
            }
        }
        out
    };

    while order.len() < n {
        // lowest-degree unvisited node starts a component
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).unwrap();
        // one BFS sweep to move to a far (pseudo-peripheral) node
        let mut scratch = visited.clone();
        let sweep = bfs_levels(seed, &mut scratch);
        let start = *sweep.last().unwrap();

        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope (skyline) Cholesky factorisation `P A Pᵀ = L Lᵀ` under an RCM
/// permutation. Fill stays inside the row envelope, so storage is the
/// profile of the reordered matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    perm: Vec<usize>,
    /// first column of each row's envelope
    first: Vec<usize>,
    /// offset of row `i`'s envelope in `vals`
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl SpdFactor {
    pub fn new(a: &SparseSym) -> Result<Self> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &j in a.row(old).0 {
                let jn = inv[j];
                if jn < first[new] {
                    first[new] = jn;
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for i in 0..n {
            start.push(total);
            total += i - first[i] + 1;
        }
        start.push(total);
        let mut vals = vec![0.0; total];
        for (new, &old) in perm.iter().enumerate() {
            let (c, v) = a.row(old);
            for (&j, &x) in c.iter().zip(v) {
                let jn = inv[j];
                if jn <= new {
                    vals[start[new] + jn - first[new]] += x;
                }
            }
        }
        // row-by-row factorisation
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = vals[start[i] + j - fi];
                let ri = &vals[start[i] + lo - fi..start[i] + j - fi];
                let rj = &vals[start[j] + lo - fj..start[j] + j - fj];
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                if j < i {
                    vals[start[i] + j - fi] = s / vals[start[j] + j - fj];
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::Matrix(format!(
                            "matrix is not positive definite (pivot {s:e} at step {i})"
                        )));
                    }
                    vals[start[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self { perm, first, start, vals })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.vals.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        // L y = Pb
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, x)| l * x).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        // Lᵀ x = y, column sweep
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Solves `A x = b` for symmetric positive definite `A` with a sparse
/// Cholesky factorisation plus iterative refinement, targeting
/// `‖Ax − b‖₂ ≤ 1e−12 ‖b‖₂`.
pub fn solve_spd(a: &SparseSym, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.dim() {
        return Err(Error::Argument(format!("rhs has {} entries, matrix is {}", b.len(), a.dim())));
    }
    let f = SpdFactor::new(a)?;
    let target = 1e-12 * norm2(b);
    let mut x = f.solve(b);
    for _ in 0..8 {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, yi)| bi - yi).collect();
        if norm2(&r) <= target {
            break;
        }
        let dx = f.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
    }
    Ok(x)
}
