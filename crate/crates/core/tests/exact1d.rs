use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robinspec::assembly::{DiscreteForm, SigmaField};
use robinspec::eigensolve::smallest_eigs;
use robinspec::exact1d::{
    endpoint_sweep, f_exact_interval, lambda1_exact, lambda_exact, xi_exact_interval, IntervalProblem,
};
use robinspec::geometry::{build_mesh, DomainSpec};

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Symmetric coefficients on (0,1): the ground state is even about ½, so
/// `k tan(k/2) = σ` with `k ∈ (0, π)`.
fn symmetric_oracle(sigma: f64) -> f64 {
    let k = bisect(|k| k * (k / 2.0).tan() - sigma, 1e-14, PI - 1e-14);
    k * k
}

/// Shooting with RK4: integrate `u″ = −λu`, `u(a)=1`, `u′(a)=σa` and return
/// the mismatch `u′(b) + σb u(b)`.
fn shoot(lambda: f64, len: f64, sa: f64, sb: f64) -> f64 {
    let n = 4000;
    let h = len / n as f64;
    let (mut u, mut v) = (1.0, sa);
    for _ in 0..n {
        let f = |u: f64, v: f64| (v, -lambda * u);
        let k1 = f(u, v);
        let k2 = f(u + 0.5 * h * k1.0, v + 0.5 * h * k1.1);
        let k3 = f(u + 0.5 * h * k2.0, v + 0.5 * h * k2.1);
        let k4 = f(u + h * k3.0, v + h * k3.1);
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    v + sb * u
}

fn shooting_oracle(len: f64, sa: f64, sb: f64) -> f64 {
    let top = PI * PI / (len * len);
    let g = |l: f64| shoot(l, len, sa, sb);
    // first sign change on a fine λ grid
    let steps = 400;
    let mut lo = 1e-12;
    for i in 1..=steps {
        let hi = top * i as f64 / steps as f64;
        if (g(lo) < 0.0) != (g(hi) < 0.0) {
            return bisect(g, lo, hi);
        }
        lo = hi;
    }
    panic!("no root below π²/L²");
}

fn fem_lambda1(len: f64, sa: f64, sb: f64, h: f64) -> f64 {
    let mesh = build_mesh(&DomainSpec::interval(0.0, len), h).unwrap();
    let f = DiscreteForm::assemble(&mesh, &SigmaField::PerFacet(vec![sa, sb])).unwrap();
    smallest_eigs(&f.robin_matrix(), &f.mass, 1, 1e-12).unwrap().eigenvalues[0]
}

#[test]
fn symmetric_coefficients_match_half_interval_oracle() {
    for sigma in [0.1, 1.0, 3.0, 25.0] {
        let p = IntervalProblem::new(0.0, 1.0, sigma, sigma).unwrap();
        let want = symmetric_oracle(sigma);
        assert!((lambda1_exact(&p) - want).abs() < 1e-12 * want, "σ = {sigma}");
    }
}

#[test]
fn unit_coefficients_root() {
    // tan k = 2k/(k² − 1)
    let p = IntervalProblem::new(0.0, 1.0, 1.0, 1.0).unwrap();
    let lam = lambda1_exact(&p);
    let k = lam.sqrt();
    assert!((k.tan() - 2.0 * k / (k * k - 1.0)).abs() < 1e-10);
    assert!((lam - symmetric_oracle(1.0)).abs() < 1e-12);
}

#[test]
fn asymmetric_coefficients_match_shooting() {
    for (len, sa, sb) in [(1.0, 1.0, 0.0), (2.0, 0.3, 4.0), (0.5, 7.0, 2.0)] {
        let p = IntervalProblem::new(1.0, 1.0 + len, sa, sb).unwrap();
        let want = shooting_oracle(len, sa, sb);
        assert!((lambda1_exact(&p) - want).abs() < 1e-9 * want, "({len}, {sa}, {sb})");
    }
}

#[test]
fn second_branch_matches_fem() {
    let p = IntervalProblem::new(0.0, 1.0, 1.0, 1.0).unwrap();
    let l2 = lambda_exact(&p, 2).unwrap();
    assert!(l2 > PI * PI && l2 < 4.0 * PI * PI);
    let mesh = build_mesh(&DomainSpec::interval(0.0, 1.0), 1.0 / 64.0).unwrap();
    let f = DiscreteForm::assemble(&mesh, &SigmaField::Constant(1.0)).unwrap();
    let r = smallest_eigs(&f.robin_matrix(), &f.mass, 2, 1e-10).unwrap();
    assert!((r.eigenvalues[1] - l2).abs() / l2 < 1e-2);
}

#[test]
fn reflection_invariance_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let (sa, sb) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        let p = IntervalProblem::new(0.0, 1.0, sa, sb).unwrap();
        let q = IntervalProblem::new(0.0, 1.0, sb, sa).unwrap();
        assert_eq!(lambda1_exact(&p), lambda1_exact(&q));
    }
    let m = 2.5;
    let p = IntervalProblem::new(0.0, 1.0, m, 0.0).unwrap();
    let q = IntervalProblem::new(0.0, 1.0, 0.0, m).unwrap();
    assert_eq!(lambda1_exact(&p), lambda1_exact(&q));
}

#[test]
fn fem_converges_at_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let (sa, sb) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        let exact = lambda1_exact(&IntervalProblem::new(0.0, 1.0, sa, sb).unwrap());
        let errs: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
            .iter()
            .map(|&h| (fem_lambda1(1.0, sa, sb, h) - exact).abs())
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "σ = ({sa}, {sb}): observed order {order}, errors {errs:?}");
        }
        assert!(errs[2] / exact < 2e-3);
    }
}

#[test]
fn f_closed_form_matches_quadrature() {
    // U(x) = (cos(√ξ(x − ½)) / cos(√ξ/2) − 1)/ξ on (0,1); F = ξ²∫U + ξ
    let xi: f64 = 1.0;
    let s = xi.sqrt();
    let u = |x: f64| ((s * (x - 0.5)).cos() / (s / 2.0).cos() - 1.0) / xi;
    let n = 2000;
    let h = 1.0 / n as f64;
    // composite Simpson
    let mut acc = u(0.0) + u(1.0);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * u(i as f64 * h);
    }
    let integral = acc * h / 3.0;
    let want = xi * xi * integral + xi;
    assert!((f_exact_interval(1.0, xi).unwrap() - want).abs() < 1e-12);
    // flux at the right end carries half the mass: −ξU′(1) = F/2
    let du = -s * (s / 2.0).sin() / (s / 2.0).cos() / xi;
    assert!((-xi * du - f_exact_interval(1.0, xi).unwrap() / 2.0).abs() < 1e-14);
}

#[test]
fn f_small_shift_limit() {
    for len in [0.5, 1.0, 3.0] {
        let xi = 1e-8;
        let ratio = f_exact_interval(len, xi).unwrap() / xi;
        assert!((ratio - len).abs() < 1e-6 * len);
    }
}

#[test]
fn xi_inverts_f() {
    let xi = xi_exact_interval(1.0, 2.0).unwrap();
    let s = xi.sqrt();
    assert!((2.0 * s * (s / 2.0).tan() - 2.0).abs() < 1e-12);
}

#[test]
fn endpoint_split_extremes() {
    let r = endpoint_sweep(1.0, 1.0).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!(r.min_at_endpoint && r.max_at_midpoint);
    assert!((r.lower_bound - 1.0 / 9.0).abs() < 1e-15);
    let end = IntervalProblem::new(0.0, 1.0, 1.0, 0.0).unwrap();
    assert!(lambda1_exact(&end) >= 1.0 / 9.0);
}

#[test]
fn dirichlet_limit_is_monotone() {
    let mut prev = 0.0;
    for m in [1.0, 10.0, 100.0, 1e3, 1e4] {
        let l = lambda1_exact(&IntervalProblem::new(0.0, 1.0, m, m).unwrap());
        assert!(l > prev && l < PI * PI);
        prev = l;
    }
    assert!(prev >= 0.95 * PI * PI);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn increasing_in_each_coefficient(sa in 0.0f64..10.0, sb in 0.0f64..10.0, d in 0.01f64..2.0) {
        let base = lambda1_exact(&IntervalProblem::new(0.0, 1.0, sa, sb).unwrap());
        let up_a = lambda1_exact(&IntervalProblem::new(0.0, 1.0, sa + d, sb).unwrap());
        let up_b = lambda1_exact(&IntervalProblem::new(0.0, 1.0, sa, sb + d).unwrap());
        prop_assert!(up_a > base && up_b > base);
    }

    #[test]
    fn sweep_passes_for_any_mass(len in 0.2f64..5.0, m in 0.01f64..50.0) {
        let r = endpoint_sweep(len, m).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }
}
