//! Sparse SPD solves and the smallest eigenpairs of `A x = λ M x`.

mod cholesky;

pub use cholesky::{reverse_cuthill_mckee, solve_spd, SpdFactor};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{arg, Error, Result};
use crate::sparse::{axpy, dot, norm2, SparseSym};

#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖A x − λ M x‖₂` per pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct EigOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Shift for the inverted operator `(A − τM)⁻¹M`; defaults to
    /// `−1e−8·trace(A)/n`.
    pub shift: Option<f64>,
    /// Extra block vectors beyond `k`.
    pub guard: usize,
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500, shift: None, guard: 6, seed: 42 }
    }
}

/// The `k` smallest eigenpairs of the pencil `(A, M)` with the default options
/// and the given residual tolerance.
pub fn smallest_eigs(a: &SparseSym, m: &SparseSym, k: usize, tol: f64) -> Result<EigResult> {
    smallest_eigs_with(a, m, k, &EigOptions { tol, ..EigOptions::default() })
}

/// A block of M-orthonormal vectors together with their images under A and M.
struct Basis {
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
}

impl Basis {
    fn new() -> Self {
        Self { v: Vec::new(), mv: Vec::new() }
    }

    fn len(&self) -> usize {
        self.v.len()
    }

    /// M-orthogonalises `w` against the basis (two Gram-Schmidt passes) and
    /// appends it unless it is numerically dependent. Returns whether it was kept.
    fn push(&mut self, m: &SparseSym, mut w: Vec<f64>) -> bool {
        let mut mw = m.matvec(&w);
        let before = dot(&w, &mw).max(0.0).sqrt();
        if !(before > 0.0) || !before.is_finite() {
            return false;
        }
        for _ in 0..2 {
            for (v, mv) in self.v.iter().zip(&self.mv) {
                let c = dot(&w, mv);
                axpy(-c, v, &mut w);
            }
        }
        m.matvec_into(&w, &mut mw);
        let after = dot(&w, &mw).max(0.0).sqrt();
        if after <= 1e-10 * before {
            return false;
        }
        w.iter_mut().for_each(|x| *x /= after);
        mw.iter_mut().for_each(|x| *x /= after);
        self.v.push(w);
        self.mv.push(mw);
        true
    }
}

/// Smallest eigenpairs by a restarted block Krylov method on the
/// shift-inverted operator `T = (A − τM)⁻¹M`.
///
/// Each outer step builds `span{X, TX, T²X}` from the current block `X`,
/// performs Rayleigh-Ritz with the original `A` and `M`, and restarts with the
/// lowest Ritz vectors. Working with a block rather than a single vector keeps
/// repeated eigenvalues from being missed.
pub fn smallest_eigs_with(a: &SparseSym, m: &SparseSym, k: usize, opts: &EigOptions) -> Result<EigResult> {
    let n = a.dim();
    if m.dim() != n {
        return arg(format!("A is {n}×{n} but M is {0}×{0}", m.dim()));
    }
    if k == 0 || k > n {
        return arg(format!("requested {k} eigenpairs of a {n}-dimensional problem"));
    }
    if !(opts.tol > 0.0) {
        return arg(format!("tolerance must be positive, got {}", opts.tol));
    }
    let tau = opts.shift.unwrap_or_else(|| {
        let t = -1e-8 * a.trace() / n as f64;
        if t != 0.0 {
            t
        } else {
            -1e-8 * m.trace() / n as f64
        }
    });
    let shifted = a.add_scaled(1.0, m, -tau)?;
    let factor = SpdFactor::new(&shifted)?;
    let apply_t = |x: &[f64]| factor.solve(&m.matvec(x));

    let a_norm = a.norm_inf();
    let m_norm = m.norm_inf();
    let p = (k + opts.guard).min(n);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start = Basis::new();
    while start.len() < p {
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        start.push(m, w);
    }
    // Current block: vectors with their residuals `A x − θ M x`.
    let mut block: Vec<(Vec<f64>, Vec<f64>)> = start
        .v
        .into_iter()
        .zip(start.mv)
        .map(|(x, mx)| {
            let ax = a.matvec(&x);
            let theta = dot(&x, &ax);
            let r = ax.iter().zip(&mx).map(|(p, q)| p - theta * q).collect();
            (x, r)
        })
        .collect();

    let mut worst = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        // span{X, TX, T²X}; the first expansion uses (A − τM)⁻¹R, which spans
        // the same space as TX without cancelling against X.
        let mut basis = Basis::new();
        let mut residuals_kept = Vec::new();
        for (x, r) in block.drain(..) {
            if basis.push(m, x) {
                residuals_kept.push(r);
            }
        }
        let mut previous = Vec::new();
        for r in &residuals_kept {
            if basis.len() >= n {
                break;
            }
            if basis.push(m, factor.solve(r)) {
                previous.push(basis.v.last().unwrap().clone());
            }
        }
        for x in &previous {
            if basis.len() >= n {
                break;
            }
            basis.push(m, apply_t(x));
        }

        let dim = basis.len();
        let av: Vec<Vec<f64>> = basis.v.iter().map(|v| a.matvec(v)).collect();
        let h = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (dot(&basis.v[i], &av[j]) + dot(&basis.v[j], &av[i])));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        let keep = p.min(dim);
        let mut values = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        worst = 0.0f64;
        let mut converged = dim >= k;
        for (slot, &col) in order.iter().take(keep).enumerate() {
            let theta = eig.eigenvalues[col];
            let mut x = vec![0.0; n];
            for (row, v) in basis.v.iter().enumerate() {
                axpy(eig.eigenvectors[(row, col)], v, &mut x);
            }
            let ax = a.matvec(&x);
            let mx = m.matvec(&x);
            let r: Vec<f64> = ax.iter().zip(&mx).map(|(p, q)| p - theta * q).collect();
            if slot < k {
                let res = norm2(&r);
                let scale = a_norm + theta.abs() * m_norm;
                worst = worst.max(res / scale);
                converged &= res <= opts.tol * scale;
                residuals.push(res);
                values.push(theta);
            }
            block.push((x, r));
        }
        if converged {
            let eigenvectors = block.into_iter().take(k).map(|(x, _)| x).collect();
            return Ok(EigResult { eigenvalues: values, eigenvectors, residuals, iterations: iter });
        }
    }
    Err(Error::Convergence { what: "eigensolver", iterations: opts.max_iter, residual: worst })
}
