//! Closed-form bounds on the optimal eigenvalue Λ₁(m) and on λ₁(σ) for convex
//! domains, the convex-domain Hardy inequality, the Dirichlet constants `K_N`
//! of unit balls, and the ε-scaling of λ₁ on dilated domains.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assembly::{DiscreteForm, SigmaField};
use crate::eigensolve::smallest_eigs;
use crate::error::{arg, Result};
use crate::geometry::{DomainSpec, GammaSelector, Mesh, Point};
use crate::mixed_dn::{dirichlet_spectrum, MixedProblem};
use crate::robin::{self, EIG_TOL};
use crate::sparse::{SparseSym, TripletBuilder};

/// `lower ≤ computed ≤ upper`, checked with absolute tolerance `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub quantity: String,
    pub lower: f64,
    pub computed: f64,
    pub upper: f64,
    pub slack_lower: f64,
    pub slack_upper: f64,
    pub tol: f64,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(quantity: impl Into<String>, lower: f64, computed: f64, upper: f64, tol: f64) -> Self {
        Self {
            quantity: quantity.into(),
            lower,
            computed,
            upper,
            slack_lower: computed - lower,
            slack_upper: upper - computed,
            tol,
            pass: lower - tol <= computed && computed <= upper + tol,
        }
    }

    /// Same check with `tol = rel · |computed|`.
    pub fn relative(quantity: impl Into<String>, lower: f64, computed: f64, upper: f64, rel: f64) -> Self {
        Self::new(quantity, lower, computed, upper, rel * computed.abs())
    }
}

/// `m E₁ / (m + |Ω| E₁)`, the lower bound on Λ₁(m).
pub fn lambda_max_lower(m: f64, e1: f64, vol: f64) -> f64 {
    m * e1 / (m + vol * e1)
}

/// `2m E₁ / (m + |Ω| E₁)`, the upper bound on Λ₁(m) that needs no γ₁.
pub fn lambda_max_upper_simple(m: f64, e1: f64, vol: f64) -> f64 {
    2.0 * lambda_max_lower(m, e1, vol)
}

fn check_upper_args(m: f64, e1: f64, vol: f64, gamma1: f64) -> Result<()> {
    if !(m > 0.0 && e1 > 0.0 && vol > 0.0) {
        return arg(format!("need m, E1, |Ω| > 0, got {m}, {e1}, {vol}"));
    }
    if !(gamma1 > 0.0 && gamma1 <= vol.sqrt() * (1.0 + 1e-12)) {
        return arg(format!("γ₁ = {gamma1} outside (0, √|Ω|] with |Ω| = {vol}"));
    }
    Ok(())
}

/// Minimiser `t₀` of the quotient of the interpolated test functions
/// [`test_family`], in a cancellation-free form that stays valid at
/// `γ₁ = √|Ω|`.
pub fn test_family_optimum(m: f64, e1: f64, vol: f64, gamma1: f64) -> Result<f64> {
    check_upper_args(m, e1, vol, gamma1)?;
    let g2 = gamma1 * gamma1;
    let disc = ((vol * e1 - m).powi(2) + 4.0 * g2 * m * e1).sqrt();
    Ok(2.0 * vol * e1 / (vol * e1 + m + disc))
}

/// Upper bound on Λ₁(m) through γ₁ = ∫φ₁:
/// `2mE₁ / (m + |Ω|E₁ + √((|Ω|E₁ − m)² + 4γ₁² m E₁))`.
pub fn lambda_max_upper(m: f64, e1: f64, vol: f64, gamma1: f64) -> Result<f64> {
    Ok(test_family_optimum(m, e1, vol, gamma1)? * m / vol)
}

/// `Q[σ, f_t]` for any σ of mass `m` supported on Γ, in closed form.
pub fn test_family_quotient(t: f64, m: f64, e1: f64, vol: f64, gamma1: f64) -> f64 {
    let r = vol / (gamma1 * gamma1);
    let s = (1.0 - t) * (1.0 - t);
    (e1 * r * s + m * t * t / vol) / (1.0 + (r - 1.0) * s)
}

/// Nodal `f_t = |Ω|(1 − t)φ₁ + γ₁t`.
pub fn test_family(phi1: &[f64], gamma1: f64, vol: f64, t: f64) -> Vec<f64> {
    phi1.iter().map(|p| vol * (1.0 - t) * p + gamma1 * t).collect()
}

/// Λ₁(m) checked against both upper bounds and the lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub m: f64,
    pub e1: f64,
    pub area: f64,
    pub gamma1: f64,
    pub t0: f64,
    /// `[mE₁/(m+|Ω|E₁), 2mE₁/(m+|Ω|E₁)]`.
    pub simple: BoundReport,
    /// Same lower bound, upper bound through γ₁.
    pub tight: BoundReport,
}

impl SandwichReport {
    pub fn pass(&self) -> bool {
        self.simple.pass && self.tight.pass
    }
}

/// Sandwich for a given value of Λ₁, with relative tolerance `rel`.
pub fn sandwich_report(m: f64, e1: f64, vol: f64, gamma1: f64, lambda: f64, rel: f64) -> Result<SandwichReport> {
    let lower = lambda_max_lower(m, e1, vol);
    let tight = lambda_max_upper(m, e1, vol, gamma1)?;
    Ok(SandwichReport {
        m,
        e1,
        area: vol,
        gamma1,
        t0: test_family_optimum(m, e1, vol, gamma1)?,
        simple: BoundReport::relative("Lambda1", lower, lambda, lambda_max_upper_simple(m, e1, vol), rel),
        tight: BoundReport::relative("Lambda1", lower, lambda, tight, rel),
    })
}

/// Λ₁(m) = ξ(m) of the mixed problem on `mesh` (Γ from its markers) against
/// the lower and upper bounds.
pub fn corollary_sandwich(mesh: &Mesh, m: f64, rel: f64) -> Result<SandwichReport> {
    corollary_sandwich_with(&MixedProblem::new(mesh)?, m, rel)
}

pub fn corollary_sandwich_with(problem: &MixedProblem<'_>, m: f64, rel: f64) -> Result<SandwichReport> {
    let xi = problem.invert_f(m)?;
    sandwich_report(m, problem.e1(), problem.area, problem.ground.gamma1, xi, rel)
}

/// `J_ν(x)` from 40 terms of the ascending series; accurate for
/// `0 < x ≤ 12` and `ν` a nonnegative integer or half-integer `≥ −½`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powf(nu) / gamma_half(nu + 1.0);
    let mut sum = term;
    for k in 1..40 {
        let k = k as f64;
        term *= -q / (k * (k + nu));
        sum += term;
    }
    sum
}

/// Γ(x) for `x` a positive multiple of ½.
fn gamma_half(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    debug_assert!(twice >= 1.0 && (2.0 * x - twice).abs() < 1e-12);
    let (mut g, mut y) = if twice as i64 % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while y < x - 0.25 {
        g *= y;
        y += 1.0;
    }
    g
}

/// First positive zero of `J_ν`, by scanning and bisection.
pub fn first_bessel_zero(nu: f64) -> f64 {
    let step = 0.05;
    let mut lo = step;
    while bessel_j(nu, lo + step) > 0.0 {
        lo += step;
        assert!(lo < 12.0, "no zero of J_{nu} below 12");
    }
    let mut hi = lo + step;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if bessel_j(nu, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Largest dimension whose ball constant is covered by the series range.
pub const KN_MAX_DIM: usize = 18;

/// `K_N`, the lowest Dirichlet eigenvalue of the unit ball in ℝᴺ: the squared
/// first zero of `J_{N/2−1}`.
pub fn kn_ball(n: usize) -> Result<f64> {
    if n == 0 || n > KN_MAX_DIM {
        return arg(format!("ball dimension must be in 1..={KN_MAX_DIM}, got {n}"));
    }
    let j = first_bessel_zero(0.5 * n as f64 - 1.0);
    Ok(j * j)
}

/// The Li–Yau lower bound `4N/(N+2) · Γ(1+N/2)^{4/N}` on `K_N`.
pub fn li_yau_bound(n: usize) -> f64 {
    let n = n as f64;
    4.0 * n / (n + 2.0) * gamma_half(1.0 + 0.5 * n).powf(4.0 / n)
}

/// `σ / (R(1 + σR))`, the common scale of the convex-domain sandwich.
pub fn robin_scale(sigma: f64, inradius: f64) -> f64 {
    sigma / (inradius * (1.0 + sigma * inradius))
}

/// `(¼ s, 2K_N s)` with `s = σ/(R(1+σR))`.
pub fn convex_robin_bounds(dim: usize, sigma: f64, inradius: f64) -> Result<(f64, f64)> {
    let s = robin_scale(sigma, inradius);
    Ok((0.25 * s, 2.0 * kn_ball(dim)? * s))
}

fn check_mesh_domain(mesh: &Mesh, domain: &DomainSpec) -> Result<f64> {
    if mesh.dim() != domain.dim() {
        return arg(format!("mesh is {}D but domain is {}D", mesh.dim(), domain.dim()));
    }
    domain.inradius()
}

/// `¼R⁻² ≤ λ₁ᴰ ≤ K_N R⁻²` with λ₁ᴰ = E₁(∂Ω) on `mesh`.
pub fn dirichlet_inradius_check(mesh: &Mesh, domain: &DomainSpec, rel: f64) -> Result<BoundReport> {
    let r = check_mesh_domain(mesh, domain)?;
    let lambda = dirichlet_spectrum(mesh, 1)?.eigenvalues[0];
    let k = kn_ball(mesh.dim())?;
    Ok(BoundReport::relative("lambda1_dirichlet", 0.25 / (r * r), lambda, k / (r * r), rel))
}

/// `¼σ/(R(1+σR)) ≤ λ₁(σ) ≤ 2K_N σ/(R(1+σR))` for constant σ > 0.
pub fn convex_robin_sandwich(mesh: &Mesh, domain: &DomainSpec, sigma: f64, rel: f64) -> Result<BoundReport> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return arg(format!("sigma must be a positive constant, got {sigma}"));
    }
    let r = check_mesh_domain(mesh, domain)?;
    let lambda = robin::lambda1(mesh, &SigmaField::Constant(sigma))?.lambda1;
    let (lo, hi) = convex_robin_bounds(mesh.dim(), sigma, r)?;
    Ok(BoundReport::relative("lambda1_robin", lo, lambda, hi, rel))
}

/// `ασ(1 − ασ)`.
pub fn hardy_coefficient(sigma: f64, alpha: f64) -> f64 {
    alpha * sigma * (1.0 - alpha * sigma)
}

/// Matrix of `∫ uv / (δ + α)²`, with δ the exact distance to the mesh
/// boundary at the quadrature points: three interior points per triangle,
/// two Gauss points per segment.
pub fn hardy_weight_matrix(mesh: &Mesh, alpha: f64) -> Result<SparseSym> {
    if !(alpha > 0.0) {
        return arg(format!("alpha must be positive, got {alpha}"));
    }
    let nodes = mesh.nodes();
    let rules: Vec<(Vec<f64>, f64)> = if mesh.dim() == 1 {
        let g = 0.5 / 3f64.sqrt();
        vec![(vec![0.5 + g, 0.5 - g], 0.5), (vec![0.5 - g, 0.5 + g], 0.5)]
    } else {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        vec![(vec![a, b, b], 1.0 / 3.0), (vec![b, a, b], 1.0 / 3.0), (vec![b, b, a], 1.0 / 3.0)]
    };
    let cells = mesh.cell_vertices();
    let mut t = TripletBuilder::with_capacity(mesh.num_nodes(), cells.len() * 9);
    for (k, verts) in cells.iter().enumerate() {
        let size = mesh.cell_measure(k);
        for (bary, w) in &rules {
            let mut p: Point = [0.0, 0.0];
            for (&v, &l) in verts.iter().zip(bary) {
                p[0] += l * nodes[v][0];
                p[1] += l * nodes[v][1];
            }
            let weight = w * size / (mesh.boundary_distance(p) + alpha).powi(2);
            for (&i, &li) in verts.iter().zip(bary) {
                for (&j, &lj) in verts.iter().zip(bary) {
                    t.push(i, j, weight * li * lj);
                }
            }
        }
    }
    Ok(t.build())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardySample {
    /// `uᵀKu + σ uᵀBu`.
    pub lhs: f64,
    /// `ασ(1−ασ) ∫u²/(δ+α)²`.
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardyReport {
    pub sigma: f64,
    pub alpha: f64,
    pub coefficient: f64,
    /// Relative allowance for quadrature error in the right side.
    pub tol: f64,
    pub ground_state: HardySample,
    pub samples: Vec<HardySample>,
    pub violations: usize,
}

impl HardyReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// Relative quadrature allowance used by [`hardy_check`].
pub const HARDY_TOL: f64 = 1e-3;

/// Tests the Hardy inequality of convex domains on the Robin ground state and
/// on `trials` random nodal functions. The mesh must triangulate a convex
/// domain.
pub fn hardy_check(mesh: &Mesh, sigma: f64, alpha: f64, trials: usize, seed: u64) -> Result<HardyReport> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return arg(format!("sigma must be finite and nonnegative, got {sigma}"));
    }
    let form = DiscreteForm::assemble(mesh, &SigmaField::Constant(sigma))?;
    let a = form.robin_matrix();
    let weight = hardy_weight_matrix(mesh, alpha)?;
    let coefficient = hardy_coefficient(sigma, alpha);
    let sample = |u: &[f64]| {
        let lhs = a.quad(u);
        let rhs = coefficient * weight.quad(u);
        HardySample { lhs, rhs, holds: lhs >= rhs - HARDY_TOL * rhs.abs() }
    };
    let ground_state = sample(&robin::lambda1(mesh, &SigmaField::Constant(sigma))?.psi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<HardySample> = (0..trials)
        .map(|_| {
            let (c, amp) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
            let u: Vec<f64> = (0..mesh.num_nodes()).map(|_| c + amp * rng.gen_range(-1.0..1.0)).collect();
            sample(&u)
        })
        .collect();
    let violations = samples.iter().chain([&ground_state]).filter(|s| !s.holds).count();
    Ok(HardyReport { sigma, alpha, coefficient, tol: HARDY_TOL, ground_state, samples, violations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub eps: f64,
    /// λ₁(σ_ε, εΩ).
    pub lambda1: f64,
    pub eps_lambda: f64,
    pub eps2_lambda: f64,
    /// `ε²λ_j(σ_ε, εΩ)` for `j = 1, 2, 3`.
    pub scaled_spectrum: Vec<f64>,
    /// `ελ₁ ≤ ∫σ/|Ω|`.
    pub small_bound_holds: bool,
    /// `ε²λ₁ ≤ E₁(Γ)`.
    pub large_bound_holds: bool,
    /// `λ_jᴺ ≤ ε²λ_j ≤ λ_jᴰ` for `j = 1, 2, 3`.
    pub sandwich_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub area: f64,
    pub boundary_mass: f64,
    /// `∫σ/|Ω|`, the limit of ελ₁ as ε → 0.
    pub small_limit: f64,
    /// E₁(Γ) on the same mesh, the limit of ε²λ₁ as ε → ∞.
    pub e1: f64,
    pub neumann: Vec<f64>,
    pub dirichlet: Vec<f64>,
    pub rows: Vec<ScalingRow>,
}

fn supported_on_gamma(mesh: &Mesh, sigma: &SigmaField) -> bool {
    let b = mesh.boundary();
    match sigma {
        SigmaField::Constant(c) => *c == 0.0 || b.iter().all(|f| f.gamma),
        SigmaField::PerFacet(v) => b.iter().zip(v).all(|(f, &s)| f.gamma || s == 0.0),
        SigmaField::Nodal(_) => true,
    }
}

/// λ₁ of the Robin Laplacian on εΩ with `σ_ε(s) = σ(s/ε)` for each ε, from
/// the pencil `(ε⁻²K + ε⁻¹B(σ), M)` on the fixed mesh. Γ is taken from the
/// mesh markers and must contain the support of σ.
pub fn scaling_study(mesh: &Mesh, sigma: &SigmaField, eps_grid: &[f64]) -> Result<ScalingStudy> {
    if eps_grid.is_empty() || eps_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return arg("eps grid must be nonempty and positive");
    }
    if !supported_on_gamma(mesh, sigma) {
        return arg("sigma is nonzero outside Γ");
    }
    let form = DiscreteForm::assemble(mesh, sigma)?;
    let area = form.integrate(&vec![1.0; mesh.num_nodes()]);
    let boundary_mass = sigma.total(mesh)?;
    let e1 = MixedProblem::new(mesh)?.e1();
    let neumann = smallest_eigs(&form.stiffness, &form.mass, 3, EIG_TOL)?.eigenvalues;
    let dirichlet = dirichlet_spectrum(mesh, 3)?.eigenvalues;
    let small_limit = boundary_mass / area;
    let rows = eps_grid
        .par_iter()
        .map(|&eps| {
            let a = form.stiffness.add_scaled(1.0, &form.boundary, eps)?;
            let mu = smallest_eigs(&a, &form.mass, 3, EIG_TOL)?.eigenvalues;
            let slack = |v: f64| 1e-9 * v.abs().max(1e-12);
            let sandwich_holds =
                (0..3).all(|j| neumann[j] - slack(mu[j]) <= mu[j] && mu[j] <= dirichlet[j] + slack(mu[j]));
            let eps_lambda = mu[0] / eps;
            Ok(ScalingRow {
                eps,
                lambda1: mu[0] / (eps * eps),
                eps_lambda,
                eps2_lambda: mu[0],
                small_bound_holds: eps_lambda <= small_limit * (1.0 + 1e-9),
                large_bound_holds: mu[0] <= e1 * (1.0 + 1e-9),
                sandwich_holds,
                scaled_spectrum: mu,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingStudy { area, boundary_mass, small_limit, e1, neumann, dirichlet, rows })
}

/// Convenience for the common case of σ constant on Γ.
pub fn scaling_study_on_gamma(mesh: &Mesh, gamma: &GammaSelector, value: f64, eps_grid: &[f64]) -> Result<ScalingStudy> {
    let marked = mesh.with_gamma(gamma)?;
    scaling_study(&marked, &SigmaField::on_gamma(&marked, value), eps_grid)
}
