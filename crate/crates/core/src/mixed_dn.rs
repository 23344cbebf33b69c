//! The Laplacian with Dirichlet conditions on Γ and Neumann conditions on the
//! rest of the boundary, and the optimal boundary coefficient built from its
//! resolvent.
//!
//! With `U_ξ = (−Δ − ξ)⁻¹𝟙` (Dirichlet on Γ) and
//! `F(ξ) = ξ²∫U_ξ + ξ|Ω|`, the coefficient of mass `m` maximising λ₁ is
//! `σ_m = −ξ ∂ₙU_ξ` on Γ with `ξ = F⁻¹(m)`, and `u_m = ξU_ξ + 1` is its ground
//! state with eigenvalue `ξ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assembly::{assemble_boundary_mass, DiscreteForm, SigmaField};
use crate::eigensolve::{smallest_eigs, solve_spd, EigResult};
use crate::error::{arg, Error, Result};
use crate::geometry::Mesh;
use crate::robin::{self, positive_mean, EIG_TOL};
use crate::sparse::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct MixedDnResult {
    /// Lowest eigenvalue E₁(Γ).
    pub e1: f64,
    /// Nodal eigenfunction, zero on Γ, positive mean, unit L² norm.
    pub phi1: Vec<f64>,
    /// `∫φ₁`.
    pub gamma1: f64,
    pub level: usize,
}

/// A mesh with Γ taken from its boundary markers, together with the
/// eliminated forms and the lowest mixed eigenpair.
#[derive(Debug, Clone)]
pub struct MixedProblem<'a> {
    pub full: DiscreteForm<'a>,
    pub reduced: DiscreteForm<'a>,
    /// Row sums of the full mass matrix, `∫φ_i`.
    pub mass_ones: Vec<f64>,
    pub area: f64,
    pub ground: MixedDnResult,
}

impl<'a> MixedProblem<'a> {
    pub fn new(mesh: &'a Mesh) -> Result<Self> {
        if mesh.boundary().iter().all(|f| !f.gamma) {
            return arg("Γ is empty; the mixed problem needs a Dirichlet part");
        }
        let full = DiscreteForm::neumann(mesh)?;
        let reduced = full.eliminate_gamma()?;
        let mass_ones = full.mass.matvec(&vec![1.0; full.dim()]);
        let area = mass_ones.iter().sum();
        let eig = smallest_eigs(&reduced.stiffness, &reduced.mass, 1, EIG_TOL)?;
        let mut phi = eig.eigenvectors.into_iter().next().unwrap();
        positive_mean(&reduced.mass, &mut phi);
        let phi1 = reduced.extend(&phi);
        let gamma1 = dot(&mass_ones, &phi1);
        let ground = MixedDnResult { e1: eig.eigenvalues[0], phi1, gamma1, level: mesh.level() };
        Ok(Self { full, reduced, mass_ones, area, ground })
    }

    pub fn mesh(&self) -> &'a Mesh {
        self.full.mesh
    }

    pub fn e1(&self) -> f64 {
        self.ground.e1
    }

    fn check_range(&self, xi: f64) -> Result<()> {
        if !(xi > 0.0 && xi < self.e1()) {
            return Err(Error::Range { xi, e1: self.e1() });
        }
        Ok(())
    }

    /// Nodal `U_ξ`: solves `(K − ξM)u = M𝟙` on the nodes off Γ, zero on Γ.
    pub fn resolvent_u(&self, xi: f64) -> Result<Vec<f64>> {
        self.check_range(xi)?;
        let a = self.reduced.stiffness.add_scaled(1.0, &self.reduced.mass, -xi)?;
        let free = self.reduced.free.as_ref().expect("reduced form");
        let rhs: Vec<f64> = free.iter().map(|&i| self.mass_ones[i]).collect();
        let u = solve_spd(&a, &rhs).map_err(|e| match e {
            Error::Matrix(_) => Error::Range { xi, e1: self.e1() },
            other => other,
        })?;
        Ok(self.reduced.extend(&u))
    }

    /// `(F(ξ), F′(ξ))` with `F = ξ²∫U + ξ|Ω|` and
    /// `F′ = 2ξ∫U + ξ²‖U‖² + |Ω|`.
    pub fn f_and_derivative(&self, xi: f64) -> Result<(f64, f64)> {
        let u = self.resolvent_u(xi)?;
        Ok(self.f_from_u(xi, &u))
    }

    fn f_from_u(&self, xi: f64, u: &[f64]) -> (f64, f64) {
        let int_u = dot(&self.mass_ones, u);
        let norm2 = self.full.mass.quad(u);
        (xi * xi * int_u + xi * self.area, 2.0 * xi * int_u + xi * xi * norm2 + self.area)
    }

    pub fn f(&self, xi: f64) -> Result<f64> {
        Ok(self.f_and_derivative(xi)?.0)
    }

    pub fn f_prime(&self, xi: f64) -> Result<f64> {
        Ok(self.f_and_derivative(xi)?.1)
    }

    /// `(ξ, F(ξ), F′(ξ))` on a grid of shifts, evaluated in parallel.
    pub fn f_curve(&self, xis: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
        xis.par_iter()
            .map(|&xi| self.f_and_derivative(xi).map(|(f, df)| (xi, f, df)))
            .collect()
    }

    /// `ξ(m) = F⁻¹(m)` by Newton's method safeguarded with bisection on
    /// `(0, E₁(1 − 10⁻⁹))`.
    pub fn invert_f(&self, m: f64) -> Result<f64> {
        Ok(self.invert_f_detail(m)?.0)
    }

    fn invert_f_detail(&self, m: f64) -> Result<(f64, Vec<f64>)> {
        if !(m > 0.0) || !m.is_finite() {
            return arg(format!("mass must be positive, got {m}"));
        }
        let e1 = self.e1();
        let (mut lo, mut hi) = (0.0, e1 * (1.0 - 1e-9));
        let target = 1e-10 * m.max(1.0);
        let mut xi = m * e1 / (m + self.area * e1);
        let mut best: Option<(f64, f64, Vec<f64>)> = None;
        for _ in 0..200 {
            let step = match self.resolvent_u(xi) {
                Ok(u) => {
                    let (f, df) = self.f_from_u(xi, &u);
                    let gap = f - m;
                    if best.as_ref().is_none_or(|b| gap.abs() < b.1) {
                        best = Some((xi, gap.abs(), u));
                    }
                    if gap.abs() <= target {
                        break;
                    }
                    if gap < 0.0 {
                        lo = xi;
                    } else {
                        hi = xi;
                    }
                    Some(xi - gap / df)
                }
                // the factorisation failing this close to E₁ means F is huge
                Err(Error::Range { .. }) => {
                    hi = xi;
                    None
                }
                Err(e) => return Err(e),
            };
            xi = match step {
                Some(x) if x > lo && x < hi => x,
                _ => 0.5 * (lo + hi),
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        let (xi, _, u) = best.ok_or(Error::Convergence { what: "F inversion", iterations: 200, residual: f64::NAN })?;
        Ok((xi, u))
    }

    /// The optimal coefficient of mass `m` with lumped flux recovery.
    pub fn optimal_sigma(&self, m: f64) -> Result<OptimalSigmaResult> {
        self.optimal_sigma_with(m, FluxRecovery::Lumped)
    }

    /// The optimal coefficient of mass `m`. The flux `g = ∂ₙU` on Γ is
    /// recovered from the discrete residual `r = (K U − ξ M U − M𝟙)|_Γ` by
    /// solving `W g = r` with the Γ boundary mass matrix `W` (or its row-sum
    /// lumping), and `σ_m = −ξ g`.
    pub fn optimal_sigma_with(&self, m: f64, recovery: FluxRecovery) -> Result<OptimalSigmaResult> {
        let (xi, u) = self.invert_f_detail(m)?;
        let mesh = self.mesh();
        let ku = self.full.stiffness.matvec(&u);
        let mu = self.full.mass.matvec(&u);
        let gamma = mesh.gamma_nodes();
        let r: Vec<f64> = gamma.iter().map(|&i| ku[i] - xi * mu[i] - self.mass_ones[i]).collect();
        let w = assemble_boundary_mass(mesh, &SigmaField::on_gamma(mesh, 1.0))?.principal_submatrix(&gamma);
        let g = match recovery {
            FluxRecovery::Consistent => solve_spd(&w, &r)?,
            FluxRecovery::Lumped => {
                let w1 = w.matvec(&vec![1.0; gamma.len()]);
                r.iter().zip(&w1).map(|(ri, wi)| ri / wi).collect()
            }
        };
        let mut raw = vec![0.0; mesh.num_nodes()];
        for (&i, gi) in gamma.iter().zip(&g) {
            raw[i] = -xi * gi;
        }
        let sigma_min = gamma.iter().map(|&i| raw[i]).fold(f64::INFINITY, f64::min);
        let clipped: Vec<f64> = raw.iter().map(|&s| s.max(0.0)).collect();
        let sigma_m = SigmaField::Nodal(clipped);
        let mass = sigma_m.total(mesh)?;
        let u_m: Vec<f64> = u.iter().map(|v| xi * v + 1.0).collect();
        let check = robin::lambda1(mesh, &sigma_m)?;
        let f_value = self.f_from_u(xi, &u).0;
        Ok(OptimalSigmaResult {
            m,
            xi,
            f_value,
            e1: self.e1(),
            u,
            sigma_m,
            sigma_min,
            u_m,
            mass,
            mass_defect: (mass - m).abs(),
            lambda_check: check.lambda1,
            recovery,
        })
    }

    /// Draws random coefficients of mass `m` supported on Γ and checks that
    /// none of them beats σ_m, and that the boundary term of `u_m` equals `m`
    /// for each of them.
    pub fn verify_maximality(&self, opt: &OptimalSigmaResult, trials: usize, seed: u64, tol: f64) -> Result<MaximalityReport> {
        let mesh = self.mesh();
        let gamma = mesh.gamma_nodes();
        let SigmaField::Nodal(base) = &opt.sigma_m else { unreachable!("optimal σ is nodal") };
        let mean = base.iter().sum::<f64>() / gamma.len() as f64;
        let k_um = self.full.stiffness.quad(&opt.u_m);
        let m_um = self.full.mass.quad(&opt.u_m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<Vec<f64>> = (0..trials)
            .map(|_| {
                let amplitude = rng.gen_range(0.0..4.0);
                let mut s = vec![0.0; mesh.num_nodes()];
                for &i in &gamma {
                    s[i] = base[i] + amplitude * mean * rng.gen_range(0.0..1.0);
                }
                s
            })
            .collect();
        let results: Vec<MaximalityTrial> = draws
            .into_par_iter()
            .map(|mut s| {
                let total = SigmaField::Nodal(s.clone()).total(mesh)?;
                s.iter_mut().for_each(|v| *v *= opt.m / total);
                let sigma = SigmaField::Nodal(s);
                let mass = sigma.total(mesh)?;
                let boundary_term = assemble_boundary_mass(mesh, &sigma)?.quad(&opt.u_m);
                let lambda1 = robin::lambda1(mesh, &sigma)?.lambda1;
                Ok(MaximalityTrial {
                    mass,
                    lambda1,
                    boundary_term,
                    rayleigh_u_m: (k_um + boundary_term) / m_um,
                })
            })
            .collect::<Result<_>>()?;
        let reference = opt.lambda_check;
        let violations = results.iter().filter(|t| t.lambda1 > reference + tol).count();
        let max_boundary_term_error =
            results.iter().map(|t| (t.boundary_term - opt.m).abs()).fold(0.0, f64::max);
        Ok(MaximalityReport { reference, tol, trials: results, violations, max_boundary_term_error })
    }

    /// The first `k` eigenpairs of the mixed problem, on the nodes off Γ.
    pub fn spectrum(&self, k: usize) -> Result<EigResult> {
        smallest_eigs(&self.reduced.stiffness, &self.reduced.mass, k, EIG_TOL)
    }
}

/// How the boundary flux of `U_ξ` is recovered from the discrete residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxRecovery {
    /// Row-sum lumped boundary mass. Nonnegative on meshes without obtuse
    /// angles and free of overshoot at corners.
    Lumped,
    /// Full boundary mass matrix. Makes `u_m` an exact discrete eigenvector,
    /// but overshoots below zero where the flux drops sharply, e.g. at
    /// convex corners.
    Consistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSigmaResult {
    pub m: f64,
    pub xi: f64,
    /// `F(ξ)`, equal to `m` up to the inversion tolerance.
    pub f_value: f64,
    pub e1: f64,
    /// Nodal `U_ξ`.
    pub u: Vec<f64>,
    /// Nodal σ_m on Γ (zero elsewhere), with negative recovery noise clipped.
    pub sigma_m: SigmaField,
    /// Smallest recovered nodal value before clipping.
    pub sigma_min: f64,
    /// `ξU + 1`.
    pub u_m: Vec<f64>,
    /// `∫σ_m dν`.
    pub mass: f64,
    pub mass_defect: f64,
    /// λ₁(σ_m) from an independent Robin solve.
    pub lambda_check: f64,
    pub recovery: FluxRecovery,
}

impl OptimalSigmaResult {
    pub fn sigma_values(&self) -> &[f64] {
        match &self.sigma_m {
            SigmaField::Nodal(v) => v,
            _ => unreachable!("optimal σ is nodal"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximalityTrial {
    pub mass: f64,
    pub lambda1: f64,
    /// `u_mᵀ B(σ) u_m`.
    pub boundary_term: f64,
    /// `Q[σ, u_m]`.
    pub rayleigh_u_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximalityReport {
    /// λ₁(σ_m).
    pub reference: f64,
    pub tol: f64,
    pub trials: Vec<MaximalityTrial>,
    pub violations: usize,
    pub max_boundary_term_error: f64,
}

/// E₁(Γ) and φ₁ with Γ taken from the mesh markers.
pub fn e1_gamma(mesh: &Mesh) -> Result<MixedDnResult> {
    Ok(MixedProblem::new(mesh)?.ground)
}

pub fn resolvent_u(mesh: &Mesh, xi: f64) -> Result<Vec<f64>> {
    MixedProblem::new(mesh)?.resolvent_u(xi)
}

pub fn optimal_sigma(mesh: &Mesh, m: f64) -> Result<OptimalSigmaResult> {
    MixedProblem::new(mesh)?.optimal_sigma(m)
}

/// Dirichlet eigenvalues on all of ∂Ω, regardless of the mesh's Γ markers.
pub fn dirichlet_spectrum(mesh: &Mesh, k: usize) -> Result<EigResult> {
    let all = mesh.with_gamma(&crate::geometry::GammaSelector::All)?;
    let form = DiscreteForm::neumann(&all)?.eliminate_gamma()?;
    smallest_eigs(&form.stiffness, &form.mass, k, EIG_TOL)
}

/// `½∬(φ(x) − φ(y))² dx dy`, summed over pairs of cells.
pub fn pair_variance(mesh: &Mesh, phi: &[f64]) -> Result<f64> {
    if phi.len() != mesh.num_nodes() {
        return arg(format!("vector has {} entries for {} nodes", phi.len(), mesh.num_nodes()));
    }
    let cells = mesh.cell_vertices();
    // per cell: (|K|, ∫_K φ, ∫_K φ²) with exact P1 rules
    let stats: Vec<(f64, f64, f64)> = cells
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let area = mesh.cell_measure(k);
            let vals: Vec<f64> = v.iter().map(|&i| phi[i]).collect();
            let n = vals.len() as f64;
            let sum: f64 = vals.iter().sum();
            let sq: f64 = vals.iter().map(|x| x * x).sum();
            let int = area * sum / n;
            // exact integral of the square of a linear function on a simplex
            let int2 = area * (sq + sum * sum) / (n * (n + 1.0));
            (area, int, int2)
        })
        .collect();
    let mut total = 0.0;
    for (i, a) in stats.iter().enumerate() {
        for b in &stats[i..] {
            let pair = a.0 * b.2 + b.0 * a.2 - 2.0 * a.1 * b.1;
            total += if std::ptr::eq(a, b) { 0.5 * pair } else { pair };
        }
    }
    Ok(total)
}
