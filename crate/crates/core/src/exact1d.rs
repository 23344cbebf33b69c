//! Closed-form and transcendental ground truth for Robin problems on an
//! interval.
//!
//! On `(a, b)` with `u′(a) = σa u(a)` and `u′(b) = −σb u(b)`, writing
//! `u = A cos k(x−a) + B sin k(x−a)` gives eigenvalues `λ = k²` where `k`
//! solves
//!
//! ```text
//! f(k) = (k² − σa σb) sin kL − k (σa + σb) cos kL = 0,   L = b − a.
//! ```
//!
//! The `j`-th root lies in `((j−1)π/L, jπ/L)`.

use std::f64::consts::PI;

use crate::error::{arg, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalProblem {
    pub a: f64,
    pub b: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
}

impl IntervalProblem {
    pub fn new(a: f64, b: f64, sigma_a: f64, sigma_b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return arg(format!("interval needs a < b, got ({a}, {b})"));
        }
        for s in [sigma_a, sigma_b] {
            if !(s >= 0.0) || !s.is_finite() {
                return arg(format!("endpoint coefficients must be finite and nonnegative, got {s}"));
            }
        }
        Ok(Self { a, b, sigma_a, sigma_b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Total boundary mass `σa + σb`.
    pub fn mass(&self) -> f64 {
        self.sigma_a + self.sigma_b
    }

    /// The characteristic function `f(k)` whose roots are the square roots of
    /// the eigenvalues.
    pub fn characteristic(&self, k: f64) -> f64 {
        let (sa, sb, l) = (self.sigma_a, self.sigma_b, self.length());
        (k * k - sa * sb) * (k * l).sin() - k * (sa + sb) * (k * l).cos()
    }
}

const PANELS: usize = 64;
const EDGE: f64 = 1e-12;

/// Bisects `f` on `[lo, hi]` given a sign change, down to adjacent floats.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The `j`-th Robin eigenvalue (`j ≥ 1`) of the interval problem.
pub fn lambda_exact(p: &IntervalProblem, j: usize) -> Result<f64> {
    if j == 0 {
        return arg("eigenvalue index starts at 1");
    }
    let l = p.length();
    let base = (j - 1) as f64 * PI / l;
    if p.mass() == 0.0 {
        return Ok(base * base);
    }
    let lo = base + EDGE;
    let hi = j as f64 * PI / l - EDGE;
    let f = |k: f64| p.characteristic(k);
    let width = (hi - lo) / PANELS as f64;
    let mut left = lo;
    let mut fl = f(left);
    for i in 1..=PANELS {
        let right = if i == PANELS { hi } else { lo + width * i as f64 };
        let fr = f(right);
        if fl == 0.0 {
            return Ok(left * left);
        }
        if (fl < 0.0) != (fr < 0.0) {
            let k = bisect(f, left, right);
            return Ok(k * k);
        }
        left = right;
        fl = fr;
    }
    Err(Error::Convergence { what: "interval root bracketing", iterations: PANELS, residual: fl.abs() })
}

/// The lowest Robin eigenvalue `λ₁((a,b), (σa,σb))`.
pub fn lambda1_exact(p: &IntervalProblem) -> f64 {
    lambda_exact(p, 1).expect("the first root is always bracketed for nonnegative coefficients")
}

/// `F(ξ) = 2√ξ tan(√ξ L / 2)` for the interval of length `L` with Dirichlet
/// conditions at both ends, valid for `0 < ξ < π²/L²`.
pub fn f_exact_interval(length: f64, xi: f64) -> Result<f64> {
    if !(length > 0.0) {
        return arg(format!("length must be positive, got {length}"));
    }
    let e1 = PI * PI / (length * length);
    if !(xi > 0.0 && xi < e1) {
        return Err(Error::Range { xi, e1 });
    }
    let s = xi.sqrt();
    Ok(2.0 * s * (s * length / 2.0).tan())
}

/// `ξ(m)` for the interval: the root of `F(ξ) = m` on `(0, π²/L²)`.
pub fn xi_exact_interval(length: f64, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return arg(format!("mass must be positive, got {m}"));
    }
    if !(length > 0.0) {
        return arg(format!("length must be positive, got {length}"));
    }
    let e1 = PI * PI / (length * length);
    // F is increasing, so bisection on (0, e1) is safe.
    let g = |xi: f64| {
        let s = xi.sqrt();
        2.0 * s * (s * length / 2.0).tan() - m
    };
    Ok(bisect(g, 0.0, e1 * (1.0 - 1e-15)))
}

/// `¼(L + 1/(2m))⁻²`, a lower bound for the smallest λ₁ over endpoint
/// coefficients of total mass `m`.
pub fn endpoint_lower_bound(length: f64, m: f64) -> f64 {
    0.25 / (length + 1.0 / (2.0 * m)).powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointSweep {
    pub length: f64,
    pub m: f64,
    /// `(t, λ₁(t·m, (1−t)·m))` for `t = 0, 0.05, …, 1`.
    pub sweep: Vec<(f64, f64)>,
    pub argmin: f64,
    pub argmax: f64,
    pub min_at_endpoint: bool,
    pub max_at_midpoint: bool,
    pub lower_bound: f64,
    pub bound_holds: bool,
}

impl EndpointSweep {
    pub fn passed(&self) -> bool {
        self.min_at_endpoint && self.max_at_midpoint && self.bound_holds
    }
}

/// Sweeps how mass `m` is split between the two endpoints and locates the
/// smallest and largest λ₁.
pub fn endpoint_sweep(length: f64, m: f64) -> Result<EndpointSweep> {
    if !(length > 0.0) || !(m > 0.0) {
        return arg(format!("need positive length and mass, got L = {length}, m = {m}"));
    }
    let sweep: Vec<(f64, f64)> = (0..=20)
        .map(|i| {
            let t = i as f64 / 20.0;
            let p = IntervalProblem::new(0.0, length, t * m, (1.0 - t) * m)?;
            Ok((t, lambda1_exact(&p)))
        })
        .collect::<Result<_>>()?;
    let by = |better: fn(f64, f64) -> bool| {
        sweep.iter().copied().reduce(|acc, x| if better(x.1, acc.1) { x } else { acc }).unwrap()
    };
    let (argmin, min) = by(|a, b| a < b);
    let (argmax, _) = by(|a, b| a > b);
    let lower_bound = endpoint_lower_bound(length, m);
    Ok(EndpointSweep {
        length,
        m,
        argmin,
        argmax,
        min_at_endpoint: argmin == 0.0 || argmin == 1.0,
        max_at_midpoint: argmax == 0.5,
        lower_bound,
        bound_holds: min >= lower_bound,
        sweep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumann_and_dirichlet_limits() {
        let p = IntervalProblem::new(0.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(lambda1_exact(&p), 0.0);
        assert!((lambda_exact(&p, 2).unwrap() - PI * PI).abs() < 1e-12);
        let p = IntervalProblem::new(0.0, 1.0, 1e3, 1e3).unwrap();
        assert!(lambda1_exact(&p) >= 0.95 * PI * PI);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(IntervalProblem::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(IntervalProblem::new(0.0, 1.0, -1.0, 0.0).is_err());
        assert!(matches!(f_exact_interval(1.0, PI * PI), Err(Error::Range { .. })));
        assert!(f_exact_interval(1.0, 0.0).is_err());
    }

    #[test]
    fn endpoint_bound_arithmetic() {
        assert!((endpoint_lower_bound(1.0, 1.0) - 1.0 / 9.0).abs() < 1e-15);
    }
}
