use std::f64::consts::PI;

use proptest::prelude::*;
use robinspec::assembly::{DiscreteForm, SigmaField};
use robinspec::eigensolve::smallest_eigs;
use robinspec::exact1d::{lambda1_exact, IntervalProblem};
use robinspec::geometry::{build_mesh, DomainSpec, Mesh};
use robinspec::mixed_dn::dirichlet_spectrum;
use robinspec::robin::{concentrating_sequence, lambda1, spectrum, RobinResult};
use robinspec::Error;

fn level(domain: &DomainSpec, l: usize) -> Mesh {
    build_mesh(domain, 0.5).unwrap().refined(l)
}

/// `J_n(x) = (1/π)∫₀^π cos(nτ − x sin τ) dτ`, composite Simpson.
fn bessel_j(n: u32, x: f64) -> f64 {
    let steps = 2000;
    let h = PI / steps as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut acc = f(0.0) + f(PI);
    for i in 1..steps {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    acc * h / 3.0 / PI
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_ground_state(r: &RobinResult, mesh: &Mesh) {
    assert!(r.min_psi() > 0.0, "ψ has a nonpositive entry {}", r.min_psi());
    let form = DiscreteForm::neumann(mesh).unwrap();
    assert!((form.l2_norm(&r.psi) - 1.0).abs() < 1e-10);
    assert!(r.lambda1 >= -1e-9);
    assert!(r.euler_lagrange_residual <= 1e-8 * r.operator_norm);
}

#[test]
fn neumann_ground_state_is_constant() {
    let mesh = level(&DomainSpec::right_triangle(), 3);
    let r = lambda1(&mesh, &SigmaField::Constant(0.0)).unwrap();
    assert!(r.lambda1.abs() < 1e-9);
    let c = (1.0 / mesh.area()).sqrt();
    assert!(r.psi.iter().all(|v| (v - c).abs() < 1e-8));
    check_ground_state(&r, &mesh);
}

#[test]
fn interval_matches_transcendental_root() {
    let exact = lambda1_exact(&IntervalProblem::new(0.0, 1.0, 1.0, 1.0).unwrap());
    let errs: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
        .iter()
        .map(|&h| {
            let mesh = build_mesh(&DomainSpec::interval(0.0, 1.0), h).unwrap();
            let r = lambda1(&mesh, &SigmaField::Constant(1.0)).unwrap();
            check_ground_state(&r, &mesh);
            (r.lambda1 - exact).abs() / exact
        })
        .collect();
    assert!(errs[2] <= 2e-3);
    assert!((errs[0] / errs[1]).log2() > 1.9 && (errs[1] / errs[2]).log2() > 1.9);
}

#[test]
fn disk_matches_bessel_root() {
    // J₀(kr) with −kJ₁(k) + J₀(k) = 0 at r = 1
    let k = bisect(|k| k * bessel_j(1, k) - bessel_j(0, k), 0.1, 2.4);
    let want = k * k;
    let mesh = level(&DomainSpec::disk([0.0, 0.0], 1.0, 16), 3);
    let r = lambda1(&mesh, &SigmaField::Constant(1.0)).unwrap();
    check_ground_state(&r, &mesh);
    assert!((r.lambda1 - want).abs() / want < 1e-2, "{} vs {want}", r.lambda1);
}

#[test]
fn neumann_robin_dirichlet_sandwich() {
    for domain in [DomainSpec::unit_square(), DomainSpec::right_triangle(), DomainSpec::disk([0.0, 0.0], 1.0, 16)] {
        let mesh = level(&domain, 3);
        let n = spectrum(&mesh, &SigmaField::Constant(0.0), 3).unwrap();
        let r = spectrum(&mesh, &SigmaField::Constant(1.0), 3).unwrap();
        let d = dirichlet_spectrum(&mesh, 3).unwrap();
        for j in 0..3 {
            let slack = 1e-9 * d.eigenvalues[j];
            assert!(n.eigenvalues[j] <= r.eigenvalues[j] + slack);
            assert!(r.eigenvalues[j] <= d.eigenvalues[j] + slack);
        }
    }
}

#[test]
fn zero_sigma_reproduces_neumann_spectrum() {
    let mesh = level(&DomainSpec::unit_square(), 3);
    let form = DiscreteForm::neumann(&mesh).unwrap();
    let n = smallest_eigs(&form.stiffness, &form.mass, 4, 1e-10).unwrap();
    let r = spectrum(&mesh, &SigmaField::Constant(0.0), 4).unwrap();
    for (a, b) in n.eigenvalues.iter().zip(&r.eigenvalues) {
        assert!((a - b).abs() <= 1e-10 * form.stiffness.norm_inf());
    }
}

#[test]
fn second_interval_eigenvalue() {
    let p = IntervalProblem::new(0.0, 1.0, 1.0, 1.0).unwrap();
    let want = robinspec::exact1d::lambda_exact(&p, 2).unwrap();
    let mesh = build_mesh(&DomainSpec::interval(0.0, 1.0), 1.0 / 64.0).unwrap();
    let r = spectrum(&mesh, &SigmaField::PerFacet(vec![1.0, 1.0]), 2).unwrap();
    assert!((r.eigenvalues[1] - want).abs() / want < 1e-2);
}

#[test]
fn concentrating_coefficients_lower_lambda() {
    let mesh = level(&DomainSpec::unit_square(), 4);
    for s0 in [[0.0, 0.0], [0.5, 0.0]] {
        let steps = concentrating_sequence(&mesh, 1.0, s0, 6).unwrap();
        assert_eq!(steps.len(), 6);
        for s in &steps {
            assert!((s.mass - 1.0).abs() < 1e-10);
            assert!(s.lambda1 > 0.0);
        }
        for w in steps.windows(2) {
            assert!(w[1].lambda1 < w[0].lambda1, "{s0:?}: {:?}", steps.iter().map(|s| s.lambda1).collect::<Vec<_>>());
        }
        eprintln!("{s0:?}: {:?}", steps.iter().map(|s| s.lambda1).collect::<Vec<_>>());
        if s0 == [0.0, 0.0] {
            assert!(steps[5].lambda1 <= 0.5 * steps[0].lambda1);
        }
    }
}

#[test]
fn concentration_needs_resolution() {
    let mesh = level(&DomainSpec::unit_square(), 2);
    assert!(matches!(concentrating_sequence(&mesh, 1.0, [0.5, 0.0], 6), Err(Error::Resolution(_))));
    assert!(concentrating_sequence(&mesh, 1.0, [0.5, 0.5], 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn larger_sigma_larger_lambda(s in 0.0f64..20.0, d in 0.01f64..5.0) {
        let mesh = build_mesh(&DomainSpec::rectangle(2.0, 1.0), 0.5).unwrap().refined(1);
        let lo = lambda1(&mesh, &SigmaField::Constant(s)).unwrap();
        let hi = lambda1(&mesh, &SigmaField::Constant(s + d)).unwrap();
        prop_assert!(hi.lambda1 >= lo.lambda1);
        prop_assert!(lo.min_psi() > 0.0 && hi.min_psi() > 0.0);
    }
}
