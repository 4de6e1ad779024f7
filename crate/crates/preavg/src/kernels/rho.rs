//! Bias-correction coefficients rho_{p,l}.
//!
//! For even p, the coefficients solve the triangular system
//!   rho_{p,0} = 1,
//!   sum_{l=0..j} 2^l m_{2j-2l} C(p-2l, 2j-2l) rho_{p,l} = 0,  j = 1..p/2,
//! where m_q is the q-th absolute Gaussian moment. The system is tiny and its
//! entries are integers, so it is solved in exact rational arithmetic and
//! converted to floats afterwards.

use crate::error::{Error, Result};

/// Minimal exact rational on i128, sufficient for p <= 16.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let mut r = Ratio { num, den };
        r.reduce();
        r
    }

    pub fn from_int(n: i128) -> Self {
        Ratio { num: n, den: 1 }
    }

    fn reduce(&mut self) {
        if self.den < 0 {
            self.num = -self.num;
            self.den = -self.den;
        }
        let g = gcd(self.num.unsigned_abs(), self.den.unsigned_abs());
        if g > 1 {
            self.num /= g as i128;
            self.den /= g as i128;
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn parts(&self) -> (i128, i128) {
        (self.num, self.den)
    }
}

impl std::ops::Add for Ratio {
    type Output = Ratio;
    fn add(self, other: Ratio) -> Ratio {
        Ratio::new(
            self.num * other.den + other.num * self.den,
            self.den * other.den,
        )
    }
}

impl std::ops::Mul for Ratio {
    type Output = Ratio;
    fn mul(self, other: Ratio) -> Ratio {
        Ratio::new(self.num * other.num, self.den * other.den)
    }
}

impl std::ops::Neg for Ratio {
    type Output = Ratio;
    fn neg(self) -> Ratio {
        Ratio {
            num: -self.num,
            den: self.den,
        }
    }
}

impl std::ops::Div for Ratio {
    type Output = Ratio;
    fn div(self, other: Ratio) -> Ratio {
        assert!(other.num != 0, "division by zero");
        Ratio::new(self.num * other.den, self.den * other.num)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

fn binomial_int(n: u64, k: u64) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// (q-1)!! for even q (integer Gaussian moment).
fn gaussian_moment_int(q: u64) -> i128 {
    let mut res: i128 = 1;
    let mut m = q as i128 - 1;
    while m > 0 {
        res *= m;
        m -= 2;
    }
    res
}

/// Solved coefficients rho_{p,0}, ..., rho_{p,p/2}.
#[derive(Debug, Clone)]
pub struct RhoCoefficients {
    p: u32,
    exact: Vec<Ratio>,
    values: Vec<f64>,
}

impl RhoCoefficients {
    pub fn p(&self) -> u32 {
        self.p
    }

    /// rho_{p,l} as f64.
    pub fn value(&self, l: usize) -> f64 {
        self.values[l]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Exact rational rho_{p,l}.
    pub fn exact(&self, l: usize) -> Ratio {
        self.exact[l]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Residual of row j of the defining system, evaluated in f64.
    pub fn residual(&self, j: usize) -> f64 {
        use crate::kernels::gaussian::{binomial, gaussian_abs_moment};
        let mut acc = 0.0;
        for l in 0..=j {
            acc += 2f64.powi(l as i32)
                * gaussian_abs_moment((2 * j - 2 * l) as f64)
                * binomial((self.p as u64).saturating_sub(2 * l as u64), (2 * j - 2 * l) as u64)
                * self.values[l];
        }
        acc
    }
}

/// Solve the triangular system for even p by forward substitution in exact
/// rational arithmetic. p in [2, 16] is validated; larger even p is allowed
/// but unvalidated.
pub fn solve_rho(p: u32) -> Result<RhoCoefficients> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "rho coefficients require even p >= 2, got {p}"
        )));
    }
    if p > 32 {
        return Err(Error::InvalidParameter(format!(
            "rho coefficients limited to p <= 32 to keep exact arithmetic in range, got {p}"
        )));
    }
    let half = (p / 2) as usize;
    let mut exact: Vec<Ratio> = Vec::with_capacity(half + 1);
    exact.push(Ratio::from_int(1));
    for j in 1..=half {
        // 2^j * m_0 * C(p-2j, 0) * rho_{p,j} = -sum_{l<j} ...
        let mut rhs = Ratio::from_int(0);
        for (l, &rho_l) in exact.iter().enumerate().take(j) {
            let coef = Ratio::from_int(
                (1i128 << l)
                    * gaussian_moment_int((2 * (j - l)) as u64)
                    * binomial_int((p as u64) - 2 * l as u64, 2 * (j - l) as u64),
            );
            rhs = rhs + coef * rho_l;
        }
        let lead = Ratio::from_int(1i128 << j);
        exact.push(-rhs / lead);
    }
    let values = exact.iter().map(|r| r.to_f64()).collect();
    Ok(RhoCoefficients { p, exact, values })
}
