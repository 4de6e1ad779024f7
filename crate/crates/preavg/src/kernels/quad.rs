//! Composite Gauss-Legendre quadrature with breakpoint splitting.
//!
//! All deterministic kernel constants are integrals of piecewise-smooth
//! functions. The integrand is split at the user-declared breakpoints and
//! each smooth segment is integrated by adaptive Gauss-Legendre bisection,
//! which converges spectrally on smooth pieces.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build an n-point rule by Newton iteration on Legendre polynomials.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-based initial guess for the i-th positive root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate f over [a, b] with a single application of the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn rule32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

fn rule64() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(64))
}

/// Result of an adaptive integration: value and an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
}

/// Adaptive Gauss-Legendre bisection on one smooth segment. The acceptance
/// test carries a floor at machine precision relative to the local value so
/// that integrands computed by an inner quadrature (noisy at ~1e-14 relative)
/// cannot force unbounded recursion.
fn adaptive_segment<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> QuadResult {
    let rule = rule32();
    let whole = rule.integrate(f, a, b);
    let mid = 0.5 * (a + b);
    let left = rule.integrate(f, a, mid);
    let right = rule.integrate(f, mid, b);
    let refined = left + right;
    let err = (refined - whole).abs();
    let floor = 5e-15 * (left.abs() + right.abs());
    if err <= tol.max(floor) || depth >= 16 || (b - a) < 1e-13 {
        return QuadResult {
            value: refined,
            error_estimate: err,
        };
    }
    let l = adaptive_segment(f, a, mid, 0.5 * tol, depth + 1);
    let r = adaptive_segment(f, mid, b, 0.5 * tol, depth + 1);
    QuadResult {
        value: l.value + r.value,
        error_estimate: l.error_estimate + r.error_estimate,
    }
}

/// Integrate f over [a, b], splitting at the given breakpoints, to absolute
/// tolerance `tol`. Returns an error carrying the achieved accuracy when the
/// tolerance cannot be met.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = vec![a, b];
    for &p in breakpoints {
        if p > a + 1e-15 && p < b - 1e-15 {
            cuts.push(p);
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);

    let n_seg = cuts.len() - 1;
    let seg_tol = tol / n_seg as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for w in cuts.windows(2) {
        let r = adaptive_segment(&f, w[0], w[1], seg_tol, 0);
        total += r.value;
        err += r.error_estimate;
    }
    // Fail only when the achieved error is bad both absolutely and relative
    // to the value; integrands of large magnitude are bounded by roundoff.
    if err > tol * 10.0 && err > 1e-12 * total.abs() {
        return Err(Error::QuadratureNonConvergence {
            requested: tol,
            achieved: err,
        });
    }
    Ok(total)
}

/// Fixed 64-point Gauss-Legendre per smooth segment (no adaptivity).
/// Used where the integrand is known smooth between breakpoints.
pub fn integrate_fixed64<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64]) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut cuts: Vec<f64> = vec![a, b];
    for &p in breakpoints {
        if p > a + 1e-15 && p < b - 1e-15 {
            cuts.push(p);
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let rule = rule64();
    cuts.windows(2).map(|w| rule.integrate(&f, w[0], w[1])).sum()
}
