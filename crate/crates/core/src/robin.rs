//! The Robin eigenvalue `λ₁(σ, Ω)`, its positive ground state, higher Robin
//! eigenvalues, and sequences of coefficients concentrating at a boundary
//! point.

use crate::assembly::{DiscreteForm, SigmaField};
use crate::eigensolve::{smallest_eigs, EigResult};
use crate::error::{arg, Error, Result};
use crate::geometry::{Mesh, Point};
use crate::sparse::{norm2, SparseSym};

/// Residual tolerance used for all Robin eigen solves.
pub const EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RobinResult {
    pub lambda1: f64,
    /// Nodal ground state, normalised to unit L² norm and positive mean.
    pub psi: Vec<f64>,
    /// `‖(K + B − λM)ψ‖₂`.
    pub euler_lagrange_residual: f64,
    /// `‖K + B‖_∞`, the scale for the residual.
    pub operator_norm: f64,
    pub level: usize,
}

impl RobinResult {
    pub fn min_psi(&self) -> f64 {
        self.psi.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Flips `x` so that `Σ M x > 0`.
pub(crate) fn positive_mean(mass: &SparseSym, x: &mut [f64]) {
    let mean: f64 = mass.matvec(x).iter().sum();
    if mean < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

pub(crate) fn residual_norm(a: &SparseSym, m: &SparseSym, lambda: f64, x: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let mx = m.matvec(x);
    let r: Vec<f64> = ax.iter().zip(&mx).map(|(p, q)| p - lambda * q).collect();
    norm2(&r)
}

/// Lowest eigenpair of `(K + B(σ)) x = λ M x`.
pub fn lambda1(mesh: &Mesh, sigma: &SigmaField) -> Result<RobinResult> {
    let form = DiscreteForm::assemble(mesh, sigma)?;
    let a = form.robin_matrix();
    let eig = smallest_eigs(&a, &form.mass, 1, EIG_TOL)?;
    let lambda1 = eig.eigenvalues[0];
    let mut psi = eig.eigenvectors.into_iter().next().unwrap();
    positive_mean(&form.mass, &mut psi);
    Ok(RobinResult {
        lambda1,
        euler_lagrange_residual: residual_norm(&a, &form.mass, lambda1, &psi),
        operator_norm: a.norm_inf(),
        psi,
        level: mesh.level(),
    })
}

/// The first `k` Robin eigenpairs.
pub fn spectrum(mesh: &Mesh, sigma: &SigmaField, k: usize) -> Result<EigResult> {
    let form = DiscreteForm::assemble(mesh, sigma)?;
    smallest_eigs(&form.robin_matrix(), &form.mass, k, EIG_TOL)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationStep {
    pub n: usize,
    /// Radius `2⁻ⁿ` of the boundary ball carrying σ.
    pub radius: f64,
    /// Length of the boundary facets inside the ball.
    pub support: f64,
    /// Value of σ on the support, `m / support`.
    pub alpha: f64,
    /// `∫σ dν`, equal to `m` up to rounding.
    pub mass: f64,
    pub lambda1: f64,
}

/// For `n = 1..=n_max`, puts total mass `m` uniformly on the boundary facets
/// whose midpoints lie within `2⁻ⁿ` of `s0` and computes λ₁.
///
/// The mesh must resolve the smallest ball: every boundary facet has to be no
/// longer than `2^{−n_max}`.
pub fn concentrating_sequence(mesh: &Mesh, m: f64, s0: Point, n_max: usize) -> Result<Vec<ConcentrationStep>> {
    if mesh.dim() != 2 {
        return arg("concentrating sequences need a planar mesh");
    }
    if !(m > 0.0) || !m.is_finite() {
        return arg(format!("mass must be positive, got {m}"));
    }
    if n_max == 0 {
        return arg("n_max must be at least 1");
    }
    if mesh.boundary_distance(s0) > 1e-12 {
        return arg(format!("{s0:?} is not on the boundary"));
    }
    let finest = 0.5f64.powi(n_max as i32);
    let longest = mesh.boundary().iter().map(|f| mesh.facet_measure(f)).fold(0.0, f64::max);
    if longest > finest * (1.0 + 1e-12) {
        return Err(Error::Resolution(format!(
            "boundary facets up to {longest} long cannot resolve radius {finest}"
        )));
    }
    let nodes = mesh.nodes();
    (1..=n_max)
        .map(|n| {
            let radius = 0.5f64.powi(n as i32);
            let inside: Vec<bool> = mesh
                .boundary()
                .iter()
                .map(|f| {
                    let [p, q] = [nodes[f.nodes[0]], nodes[f.nodes[1]]];
                    let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                    (mid[0] - s0[0]).hypot(mid[1] - s0[1]) < radius
                })
                .collect();
            let support: f64 = mesh
                .boundary()
                .iter()
                .zip(&inside)
                .filter(|(_, &i)| i)
                .map(|(f, _)| mesh.facet_measure(f))
                .sum();
            if support == 0.0 {
                return Err(Error::Resolution(format!("no boundary facet within {radius} of {s0:?}")));
            }
            let alpha = m / support;
            let sigma = SigmaField::PerFacet(inside.iter().map(|&i| if i { alpha } else { 0.0 }).collect());
            let mass = sigma.total(mesh)?;
            let lambda1 = lambda1(mesh, &sigma)?.lambda1;
            Ok(ConcentrationStep { n, radius, support, alpha, mass, lambda1 })
        })
        .collect()
}
