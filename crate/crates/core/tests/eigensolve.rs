use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robinspec::assembly::DiscreteForm;
use robinspec::eigensolve::{smallest_eigs, smallest_eigs_with, solve_spd, EigOptions};
use robinspec::geometry::{build_mesh, DomainSpec};
use robinspec::sparse::{dot, SparseSym};

/// Gaussian elimination with partial pivoting.
fn lu_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m = a.clone();
    let mut x = b.to_vec();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs())).unwrap();
        m.swap_rows(c, p);
        x.swap(c, p);
        for r in c + 1..n {
            let f = m[(r, c)] / m[(c, c)];
            for k in c..n {
                m[(r, k)] -= f * m[(c, k)];
            }
            x[r] -= f * x[c];
        }
    }
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[(r, k)] * x[k]).sum();
        x[r] = (x[r] - s) / m[(r, r)];
    }
    x
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Eigenvalues of the pencil via `L⁻¹ A L⁻ᵀ` with a hand-rolled Cholesky of M.
fn dense_pencil_eigenvalues(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = m[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = if i == j { s.sqrt() } else { s / l[(j, j)] };
        }
    }
    let linv = l.try_inverse().unwrap();
    let c = &linv * a * linv.transpose();
    jacobi_eigenvalues((&c + c.transpose()) * 0.5)
}

fn random_spd(n: usize, seed: u64, shift: f64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    b.transpose() * b + DMatrix::identity(n, n) * shift
}

fn interval_form(h: f64) -> (SparseSym, SparseSym) {
    let mesh = build_mesh(&DomainSpec::interval(0.0, 1.0), h).unwrap();
    let f = DiscreteForm::neumann(&mesh).unwrap();
    (f.stiffness, f.mass)
}

fn check_invariants(a: &SparseSym, m: &SparseSym, r: &robinspec::eigensolve::EigResult, tol: f64) {
    let (an, mn) = (a.norm_inf(), m.norm_inf());
    for w in r.eigenvalues.windows(2) {
        assert!(w[0] <= w[1]);
    }
    for (i, x) in r.eigenvectors.iter().enumerate() {
        let lam = r.eigenvalues[i];
        let ax = a.matvec(x);
        let mx = m.matvec(x);
        let res: f64 = ax.iter().zip(&mx).map(|(p, q)| (p - lam * q).powi(2)).sum::<f64>().sqrt();
        assert!(res <= tol * (an + lam.abs() * mn), "pair {i}: residual {res}");
        for (j, y) in r.eigenvectors.iter().enumerate() {
            let g = dot(y, &mx);
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-10, "Gram ({i},{j}) = {g}");
        }
    }
}

#[test]
fn solve_matches_lu_oracle_in_1d() {
    let (k, m) = interval_form(1.0 / 64.0);
    let a = k.add_scaled(1.0, &m, 1.0).unwrap();
    let b = m.matvec(&vec![1.0; a.dim()]);
    let x = solve_spd(&a, &b).unwrap();
    let oracle = lu_solve(&a.to_dense(), &b);
    for (p, q) in x.iter().zip(&oracle) {
        assert!((p - q).abs() < 1e-10);
    }
    // K·1 = 0, so (K + M)x = M·1 is solved by x = 1
    assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-10));
}

#[test]
fn solve_random_spd_residual() {
    let a = SparseSym::from_dense(&random_spd(50, 7, 1.0)).unwrap();
    let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
    let x = solve_spd(&a, &b).unwrap();
    let ax = a.matvec(&x);
    let r: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(r <= 1e-12 * bn, "relative residual {}", r / bn);
}

#[test]
fn dirichlet_interval_ground_state() {
    let mesh = build_mesh(&DomainSpec::interval(0.0, 1.0), 1.0 / 64.0).unwrap();
    let f = DiscreteForm::neumann(&mesh).unwrap().eliminate_gamma().unwrap();
    let r = smallest_eigs(&f.stiffness, &f.mass, 3, 1e-10).unwrap();
    let rel = (r.eigenvalues[0] - PI * PI).abs() / (PI * PI);
    assert!(rel <= 2e-3, "relative error {rel}");
    let oracle = dense_pencil_eigenvalues(&f.stiffness.to_dense(), &f.mass.to_dense());
    for (got, want) in r.eigenvalues.iter().zip(&oracle) {
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }
    check_invariants(&f.stiffness, &f.mass, &r, 1e-10);
}

#[test]
fn neumann_kernel_is_constant() {
    let (k, m) = interval_form(1.0 / 32.0);
    let r = smallest_eigs(&k, &m, 2, 1e-10).unwrap();
    assert!(r.eigenvalues[0].abs() < 1e-9);
    let x = &r.eigenvectors[0];
    let spread = x.iter().fold(0.0f64, |s, v| s.max((v - x[0]).abs()));
    assert!(spread < 1e-8 * x[0].abs());
    assert!(r.eigenvalues[1] > 1.0);
}

#[test]
fn random_pencil_matches_dense_oracle() {
    let a = random_spd(20, 1, 0.1);
    let m = random_spd(20, 2, 1.0);
    let oracle = dense_pencil_eigenvalues(&a, &m);
    let (sa, sm) = (SparseSym::from_dense(&a).unwrap(), SparseSym::from_dense(&m).unwrap());
    for k in [1, 4, 8] {
        let r = smallest_eigs(&sa, &sm, k, 1e-10).unwrap();
        for (got, want) in r.eigenvalues.iter().zip(&oracle) {
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "k={k}: {got} vs {want}");
        }
        check_invariants(&sa, &sm, &r, 1e-10);
    }
}

#[test]
fn square_multiplicity_is_resolved() {
    let mesh = build_mesh(&DomainSpec::unit_square(), 0.5).unwrap().refined(4);
    let f = DiscreteForm::neumann(&mesh).unwrap();
    let start = Instant::now();
    let r = smallest_eigs(&f.stiffness, &f.mass, 4, 1e-10).unwrap();
    eprintln!("square level 4: {} nodes, {} iterations, {:?}", mesh.num_nodes(), r.iterations, start.elapsed());
    // Neumann square: 0, π², π², 2π²
    assert!(r.eigenvalues[0].abs() < 1e-9);
    assert!((r.eigenvalues[1] - r.eigenvalues[2]).abs() < 1e-8 * r.eigenvalues[1]);
    assert!((r.eigenvalues[1] / (PI * PI) - 1.0).abs() < 5e-3);
    check_invariants(&f.stiffness, &f.mass, &r, 1e-10);
}

#[test]
fn shift_perturbation_does_not_move_eigenvalues() {
    let mesh = build_mesh(&DomainSpec::right_triangle(), 0.5).unwrap().refined(3);
    let f = DiscreteForm::neumann(&mesh).unwrap();
    let base = -1e-8 * f.stiffness.trace() / f.dim() as f64;
    let run = |tau: f64| {
        let opts = EigOptions { shift: Some(tau), ..EigOptions::default() };
        smallest_eigs_with(&f.stiffness, &f.mass, 3, &opts).unwrap()
    };
    let r0 = run(base);
    let tol_abs = 1e-10 * f.stiffness.norm_inf();
    for factor in [0.1, 10.0] {
        let r = run(base * factor);
        for (p, q) in r.eigenvalues.iter().zip(&r0.eigenvalues) {
            assert!((p - q).abs() <= tol_abs, "{p} vs {q}");
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let mesh = build_mesh(&DomainSpec::disk([0.0, 0.0], 1.0, 16), 1.0).unwrap().refined(2);
    let f = DiscreteForm::neumann(&mesh).unwrap();
    let a = smallest_eigs(&f.stiffness, &f.mass, 3, 1e-10).unwrap();
    let b = smallest_eigs(&f.stiffness, &f.mass, 3, 1e-10).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lowest_value_minimises_rayleigh_quotient(seed in 0u64..1000, n in 8usize..30, k in 1usize..4) {
        let a = SparseSym::from_dense(&random_spd(n, seed, 0.0)).unwrap();
        let m = SparseSym::from_dense(&random_spd(n, seed + 1000, 1.0)).unwrap();
        let r = smallest_eigs(&a, &m, k, 1e-10).unwrap();
        prop_assert!(r.eigenvalues[0] >= -1e-9);
        // minimum Rayleigh quotient over the span of returned vectors
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let c: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut x = vec![0.0; n];
            for (ci, v) in c.iter().zip(&r.eigenvectors) {
                x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += ci * vi);
            }
            let q = a.quad(&x) / m.quad(&x);
            prop_assert!(q >= r.eigenvalues[0] - 1e-12 * r.eigenvalues[0].abs().max(1.0));
        }
        let x0 = &r.eigenvectors[0];
        let q0 = a.quad(x0) / m.quad(x0);
        prop_assert!((q0 - r.eigenvalues[0]).abs() <= 1e-12 * r.eigenvalues[0].abs().max(1.0));
    }
}
