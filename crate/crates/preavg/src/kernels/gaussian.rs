//! Gaussian moment primitives.

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

/// Signed power {x}^p = |x|^p * sign(x). Defined for every real x and p >= 0,
/// avoiding NaN for negative bases with fractional exponents.
pub fn sign_power(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    x.signum() * x.abs().powf(p)
}

/// |x|^p with the convention 0^0 = 1.
pub fn abs_power(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        return 1.0;
    }
    x.abs().powf(p)
}

/// p-th absolute moment of N(0,1): E|N|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
/// For even integer p this equals the double factorial (p-1)!!.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    assert!(p >= 0.0, "moment order must be nonnegative");
    if p == 0.0 {
        return 1.0;
    }
    // Exact double-factorial path for even integers.
    if p.fract() == 0.0 && (p as u64) % 2 == 0 {
        return odd_double_factorial(p as u64);
    }
    2f64.powf(0.5 * p) * gamma(0.5 * (p + 1.0)) / std::f64::consts::PI.sqrt()
}

/// (n-1)!! for even n >= 0 (the n-th Gaussian moment).
fn odd_double_factorial(n: u64) -> f64 {
    let mut res = 1.0f64;
    let mut m = n as i64 - 1;
    while m > 0 {
        res *= m as f64;
        m -= 2;
    }
    res
}

/// Binomial coefficient as f64.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num = 1.0f64;
    for i in 0..k {
        num = num * (n - i) as f64 / (i + 1) as f64;
    }
    num.round()
}

/// E[X^p Y^q] for centered jointly Gaussian (X, Y) with the given covariance
/// matrix, by the Isserlis pairing sum. Exact up to floating point for even
/// integer p, q (odd totals give zero by symmetry).
pub fn bivariate_gaussian_moment(
    p: u32,
    q: u32,
    var_x: f64,
    var_y: f64,
    cov: f64,
) -> Result<f64> {
    if var_x < 0.0 || var_y < 0.0 {
        return Err(Error::InvalidParameter(
            "variances must be nonnegative".into(),
        ));
    }
    // Allow a tiny tolerance for covariances computed by quadrature.
    if cov * cov > var_x * var_y * (1.0 + 1e-9) + 1e-300 {
        return Err(Error::InvalidParameter(format!(
            "covariance matrix not positive semidefinite: var_x={var_x}, var_y={var_y}, cov={cov}"
        )));
    }
    if (p + q) % 2 == 1 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    // j cross-pairs between the X block and the Y block.
    let mut j = p.min(q) % 2; // parity of j must match p (and q) mod 2
    while j <= p.min(q) {
        let px = p - j;
        let qy = q - j;
        if px % 2 == 0 && qy % 2 == 0 {
            let ways = binomial(p as u64, j as u64)
                * binomial(q as u64, j as u64)
                * factorial(j as u64);
            let term = ways
                * cov.powi(j as i32)
                * odd_double_factorial(px as u64)
                * var_x.powi(px as i32 / 2)
                * odd_double_factorial(qy as u64)
                * var_y.powi(qy as i32 / 2);
            total += term;
        }
        j += 2;
    }
    Ok(total)
}

fn factorial(n: u64) -> f64 {
    (1..=n).map(|i| i as f64).product()
}
