//! Deterministic kernel constants of the pre-averaging theory.
//!
//! Everything in this module is a pure function of weight functions on [0,1]:
//! continuous norms, lagged overlap integrals, the rho bias-correction
//! coefficients, Gaussian moment kernels mu_p / mu_{2p} / mu_bar_{2p}, and the
//! four Psi covariance matrices entering the jump limit. All quadrature is
//! composite Gauss-Legendre split at the declared breakpoints.

pub mod gaussian;
pub mod matrix;
pub mod quad;
pub mod rho;
pub mod weights;

pub use gaussian::{abs_power, bivariate_gaussian_moment, gaussian_abs_moment, sign_power};
pub use matrix::{psd_sqrt, SymMatrix};
pub use rho::{solve_rho, RhoCoefficients};
pub use weights::{by_name, DiscreteWeights, WeightConfig, WeightFunction, WeightSpecJson};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-13;

/// Continuous norm gbar(p) = int |g|^p ds, or the derivative norm when
/// `derivative` is set.
pub fn continuous_norm(g: &WeightFunction, p: f64, derivative: bool) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "norm order must be positive, got {p}"
        )));
    }
    let f = |s: f64| {
        let v = if derivative { g.deriv(s) } else { g.eval(s) };
        v.abs().powf(p)
    };
    quad::integrate_with_breakpoints(f, 0.0, 1.0, g.breakpoints(), NORM_TOL)
}

/// Overlap integral (gh)(t) = int g(s) h(s-t) ds, or (g'h')(t) with the flag.
/// Zero for |t| >= 1 by disjoint supports.
pub fn overlap(g: &WeightFunction, h: &WeightFunction, t: f64, derivative: bool) -> Result<f64> {
    if t.abs() >= 1.0 {
        return Ok(0.0);
    }
    let lo = t.max(0.0);
    let hi = (1.0 + t).min(1.0);
    if hi <= lo {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = g.breakpoints().to_vec();
    cuts.extend(h.breakpoints().iter().map(|b| b + t));
    let f = |s: f64| {
        if derivative {
            g.deriv(s) * h.deriv(s - t)
        } else {
            g.eval(s) * h.eval(s - t)
        }
    };
    quad::integrate_with_breakpoints(f, lo, hi, &cuts, NORM_TOL)
}

/// Overlap integral by fixed 64-point Gauss-Legendre per smooth segment;
/// exact to roundoff for the supported piece types and, unlike the adaptive
/// path, a smooth function of t. Used inside nested quadratures.
fn overlap_fixed(g: &WeightFunction, h: &WeightFunction, t: f64, derivative: bool) -> f64 {
    if t.abs() >= 1.0 {
        return 0.0;
    }
    let lo = t.max(0.0);
    let hi = (1.0 + t).min(1.0);
    if hi <= lo {
        return 0.0;
    }
    let mut cuts: Vec<f64> = g.breakpoints().to_vec();
    cuts.extend(h.breakpoints().iter().map(|b| b + t));
    let f = |s: f64| {
        if derivative {
            g.deriv(s) * h.deriv(s - t)
        } else {
            g.eval(s) * h.eval(s - t)
        }
    };
    quad::integrate_fixed64(f, lo, hi, &cuts)
}

/// All pairwise differences of breakpoints of g and h, used as kink locations
/// of t -> (gh)(t).
fn overlap_kinks(g: &WeightFunction, h: &WeightFunction) -> Vec<f64> {
    let mut out = Vec::new();
    for &a in g.breakpoints() {
        for &b in h.breakpoints() {
            out.push(a - b);
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
    out
}

/// The four mu-kernel values for a pair of weights.
#[derive(Debug, Clone, Copy)]
pub struct MuKernels {
    pub mu_p_g: f64,
    pub mu_p_h: f64,
    pub mu_2p: f64,
    pub mu_bar_2p: f64,
}

/// Coefficients of mu_bar_4(g,g; eta, zeta) as a polynomial
/// a*eta^4 + b*eta^2 zeta^2 + c*zeta^4.
#[derive(Debug, Clone, Copy)]
pub struct MuBar4Coeffs {
    pub eta4: f64,
    pub eta2_zeta2: f64,
    pub zeta4: f64,
}

impl MuBar4Coeffs {
    pub fn eval(&self, eta: f64, zeta: f64) -> f64 {
        self.eta4 * eta.powi(4) + self.eta2_zeta2 * eta.powi(2) * zeta.powi(2)
            + self.zeta4 * zeta.powi(4)
    }
}

/// The four covariance matrices of the Gaussian draws in the jump limit.
#[derive(Debug, Clone)]
pub struct PsiMatrices {
    pub p: f64,
    pub minus: SymMatrix,
    pub plus: SymMatrix,
    pub bar_minus: SymMatrix,
    pub bar_plus: SymMatrix,
}

/// A family of weight functions with the cached constants needed by the
/// estimators and the inference layer. Built once, read-only afterwards.
#[derive(Debug, Clone)]
pub struct KernelSet {
    family: Vec<WeightFunction>,
    /// (gbar(2), gbar'(2)) per member.
    norms2: Vec<(f64, f64)>,
}

impl KernelSet {
    pub fn new(family: Vec<WeightFunction>) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::InvalidParameter("empty weight family".into()));
        }
        let mut norms2 = Vec::with_capacity(family.len());
        for g in &family {
            norms2.push((
                continuous_norm(g, 2.0, false)?,
                continuous_norm(g, 2.0, true)?,
            ));
        }
        Ok(KernelSet { family, norms2 })
    }

    pub fn single(g: WeightFunction) -> Result<Self> {
        Self::new(vec![g])
    }

    pub fn dim(&self) -> usize {
        self.family.len()
    }

    pub fn family(&self) -> &[WeightFunction] {
        &self.family
    }

    pub fn weight(&self, i: usize) -> &WeightFunction {
        &self.family[i]
    }

    /// gbar(2) of member i.
    pub fn norm2(&self, i: usize) -> f64 {
        self.norms2[i].0
    }

    /// gbar'(2) of member i.
    pub fn norm2_deriv(&self, i: usize) -> f64 {
        self.norms2[i].1
    }

    /// m_p(g; eta, zeta) by the binomial closed form over the independent
    /// Gaussian pair (L(g)_0, L'(g)_0).
    pub fn m_p_closed(&self, i: usize, p: u32, eta: f64, zeta: f64) -> f64 {
        if p == 0 {
            return 1.0;
        }
        if p % 2 == 1 {
            return 0.0;
        }
        let (g2, gd2) = self.norms2[i];
        let vx = eta * eta * g2;
        let vy = zeta * zeta * gd2;
        let mut acc = 0.0;
        for v in 0..=(p / 2) {
            acc += gaussian::binomial(p as u64, 2 * v as u64)
                * vx.powi(v as i32)
                * vy.powi((p / 2 - v) as i32)
                * gaussian_abs_moment(2.0 * v as f64)
                * gaussian_abs_moment((p - 2 * v) as f64);
        }
        acc
    }

    /// mu_p(g; eta, zeta): the rho-corrected p-th moment kernel.
    pub fn mu_p(&self, i: usize, p: u32, eta: f64, zeta: f64) -> Result<f64> {
        let rho = solve_rho(p)?;
        let gd2 = self.norms2[i].1;
        let two_zeta2_gd2 = 2.0 * zeta * zeta * gd2;
        let mut acc = 0.0;
        for r in 0..=(p as usize / 2) {
            let factor = if r == 0 { 1.0 } else { two_zeta2_gd2.powi(r as i32) };
            acc += rho.value(r) * factor * self.m_p_closed(i, p - 2 * r as u32, eta, zeta);
        }
        Ok(acc)
    }

    /// m_{p,q}(g,h; eta, zeta): the lagged joint moment, integrated over the
    /// lag t in [0,2] by quadrature of exact bivariate Gaussian moments.
    pub fn m_pq(&self, i: usize, j: usize, p: u32, q: u32, eta: f64, zeta: f64) -> Result<f64> {
        let (g2, gd2) = self.norms2[i];
        let (h2, hd2) = self.norms2[j];
        let var_x = eta * eta * g2 + zeta * zeta * gd2;
        let var_y = eta * eta * h2 + zeta * zeta * hd2;
        let g = &self.family[i];
        let h = &self.family[j];

        // kinks of t -> cov(t-1), shifted into [0,2], plus the t=1 seam
        let mut cuts: Vec<f64> = overlap_kinks(g, h).iter().map(|d| 1.0 + d).collect();
        cuts.push(1.0);

        let integrand = |t: f64| {
            let lag = t - 1.0;
            let c_val = overlap_fixed(g, h, lag, false);
            let c_der = overlap_fixed(g, h, lag, true);
            let mut cov = eta * eta * c_val + zeta * zeta * c_der;
            // guard against quadrature noise at the Cauchy-Schwarz boundary
            let bound = (var_x * var_y).sqrt();
            if cov > bound {
                cov = bound;
            } else if cov < -bound {
                cov = -bound;
            }
            bivariate_gaussian_moment(p, q, var_x, var_y, cov).unwrap_or(f64::NAN)
        };
        let val = quad::integrate_with_breakpoints(integrand, 0.0, 2.0, &cuts, 1e-11)?;
        if !val.is_finite() {
            return Err(Error::Numerical("m_pq integrand not finite".into()));
        }
        Ok(val)
    }

    /// mu_{2p}(g,h; eta, zeta).
    pub fn mu_2p(&self, i: usize, j: usize, p: u32, eta: f64, zeta: f64) -> Result<f64> {
        let rho = solve_rho(p)?;
        let gd2 = self.norms2[i].1;
        let hd2 = self.norms2[j].1;
        let zg = 2.0 * zeta * zeta * gd2;
        let zh = 2.0 * zeta * zeta * hd2;
        let half = p as usize / 2;
        let mut acc = 0.0;
        for r in 0..=half {
            let fr = if r == 0 { 1.0 } else { zg.powi(r as i32) };
            for rp in 0..=half {
                let frp = if rp == 0 { 1.0 } else { zh.powi(rp as i32) };
                let m = self.m_pq(i, j, p - 2 * r as u32, p - 2 * rp as u32, eta, zeta)?;
                acc += rho.value(r) * rho.value(rp) * fr * frp * m;
            }
        }
        Ok(acc)
    }

    /// The full kernel bundle (mu_p(g), mu_p(h), mu_{2p}, mu_bar_{2p}).
    pub fn mu_kernels(&self, i: usize, j: usize, p: u32, eta: f64, zeta: f64) -> Result<MuKernels> {
        if p < 2 || p % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "mu kernels require even p >= 2, got {p}"
            )));
        }
        if eta < 0.0 || zeta < 0.0 {
            return Err(Error::InvalidParameter(
                "eta and zeta must be nonnegative".into(),
            ));
        }
        let mu_p_g = self.mu_p(i, p, eta, zeta)?;
        let mu_p_h = self.mu_p(j, p, eta, zeta)?;
        let mu_2p = self.mu_2p(i, j, p, eta, zeta)?;
        Ok(MuKernels {
            mu_p_g,
            mu_p_h,
            mu_2p,
            mu_bar_2p: mu_2p - 2.0 * mu_p_g * mu_p_h,
        })
    }

    /// The matrix [mu_bar_{2p}(g_i, g_j; eta, zeta)]_{ij} over the family.
    pub fn mu_bar_matrix(&self, p: u32, eta: f64, zeta: f64) -> Result<SymMatrix> {
        let d = self.dim();
        let mut m = SymMatrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                let v = self.mu_kernels(i, j, p, eta, zeta)?.mu_bar_2p;
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        Ok(m)
    }

    /// Direct quadrature of mu_bar_4(g,g; eta, zeta) as
    /// 4 int_0^1 (eta^2 (gg)(s) + zeta^2 (g'g')(s))^2 ds.
    pub fn mu_bar_4_closed(&self, i: usize, eta: f64, zeta: f64) -> Result<f64> {
        let g = &self.family[i];
        let kinks = overlap_kinks(g, g);
        let integrand = |s: f64| {
            let a = overlap_fixed(g, g, s, false);
            let b = overlap_fixed(g, g, s, true);
            let v = eta * eta * a + zeta * zeta * b;
            v * v
        };
        let val = quad::integrate_with_breakpoints(integrand, 0.0, 1.0, &kinks, 1e-12)?;
        if !val.is_finite() {
            return Err(Error::Numerical("mu_bar_4 integrand not finite".into()));
        }
        Ok(4.0 * val)
    }

    /// Polynomial coefficients of mu_bar_4(g,g; ., .) in (eta, zeta); used to
    /// integrate the kernel along simulated volatility and noise paths.
    pub fn mu_bar4_coeffs(&self, i: usize) -> Result<MuBar4Coeffs> {
        let g = &self.family[i];
        let kinks = overlap_kinks(g, g);
        let aa = quad::integrate_with_breakpoints(
            |s| {
                let a = overlap_fixed(g, g, s, false);
                a * a
            },
            0.0,
            1.0,
            &kinks,
            1e-12,
        )?;
        let ab = quad::integrate_with_breakpoints(
            |s| {
                let a = overlap_fixed(g, g, s, false);
                let b = overlap_fixed(g, g, s, true);
                a * b
            },
            0.0,
            1.0,
            &kinks,
            1e-12,
        )?;
        let bb = quad::integrate_with_breakpoints(
            |s| {
                let b = overlap_fixed(g, g, s, true);
                b * b
            },
            0.0,
            1.0,
            &kinks,
            1e-12,
        )?;
        Ok(MuBar4Coeffs {
            eta4: 4.0 * aa,
            eta2_zeta2: 8.0 * ab,
            zeta4: 4.0 * bb,
        })
    }

    /// The four Psi covariance matrices for the family at power p
    /// (p = 2 or p > 3). Entries are nested quadratures of the lagged
    /// sign-power products; every matrix is checked positive semidefinite.
    pub fn psi_matrices(&self, p: f64) -> Result<PsiMatrices> {
        if !(p == 2.0 || p > 3.0) {
            return Err(Error::InvalidParameter(format!(
                "Psi matrices defined for p = 2 or p > 3, got {p}"
            )));
        }
        let d = self.dim();
        let mut minus = SymMatrix::zeros(d);
        let mut plus = SymMatrix::zeros(d);
        let mut bar_minus = SymMatrix::zeros(d);
        let mut bar_plus = SymMatrix::zeros(d);

        // inner integrals as functions of the lag t
        let inner = |i: usize, t: f64, deriv: bool, forward: bool| -> f64 {
            let g = &self.family[i];
            let (lo, hi) = if forward { (0.0, 1.0 - t) } else { (t, 1.0) };
            if hi <= lo {
                return 0.0;
            }
            let mut cuts: Vec<f64> = g.breakpoints().to_vec();
            let shift = if forward { -t } else { t };
            cuts.extend(g.breakpoints().iter().map(|b| b + shift));
            let f = |s: f64| {
                let lead = sign_power(g.eval(s), p - 1.0);
                let arg = if forward { s + t } else { s - t };
                let tail = if deriv { g.deriv(arg) } else { g.eval(arg) };
                lead * tail
            };
            quad::integrate_fixed64(f, lo, hi, &cuts)
        };

        for i in 0..d {
            for j in i..d {
                let mut kinks = overlap_kinks(&self.family[i], &self.family[j]);
                kinks.extend(overlap_kinks(&self.family[i], &self.family[i]));
                kinks.extend(overlap_kinks(&self.family[j], &self.family[j]));
                for (mat, deriv, forward) in [
                    (&mut minus, false, false),
                    (&mut plus, false, true),
                    (&mut bar_minus, true, false),
                    (&mut bar_plus, true, true),
                ] {
                    let f = |t: f64| inner(i, t, deriv, forward) * inner(j, t, deriv, forward);
                    let v = quad::integrate_with_breakpoints(f, 0.0, 1.0, &kinks, 1e-12)?;
                    if !v.is_finite() {
                        return Err(Error::Numerical("Psi integrand not finite".into()));
                    }
                    mat.set(i, j, v);
                    mat.set(j, i, v);
                }
            }
        }
        let mut out = PsiMatrices {
            p,
            minus,
            plus,
            bar_minus,
            bar_plus,
        };
        for (name, m) in [
            ("Psi_minus", &mut out.minus),
            ("Psi_plus", &mut out.plus),
            ("Psi_bar_minus", &mut out.bar_minus),
            ("Psi_bar_plus", &mut out.bar_plus),
        ] {
            let scale = (0..d).map(|i| m.get(i, i).abs()).fold(0.0f64, f64::max);
            let min_eig = m.min_eigenvalue();
            if min_eig < -1e-9 * scale.max(1.0) {
                return Err(Error::Numerical(format!(
                    "{name} has eigenvalue {min_eig:e}; quadrature misconfiguration"
                )));
            }
            // project away quadrature-level negative eigenvalues
            if min_eig < 0.0 {
                *m = m.psd_projection();
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_set() -> KernelSet {
        KernelSet::single(weights::triangle().unwrap()).unwrap()
    }

    #[test]
    fn triangle_norms() {
        let g = weights::triangle().unwrap();
        assert!((continuous_norm(&g, 2.0, false).unwrap() - 1.0 / 12.0).abs() < 1e-12);
        assert!((continuous_norm(&g, 2.0, true).unwrap() - 1.0).abs() < 1e-12);
        assert!((continuous_norm(&g, 4.0, false).unwrap() - 1.0 / 80.0).abs() < 1e-12);
    }

    #[test]
    fn sine_norms() {
        let g = weights::sine().unwrap();
        assert!((continuous_norm(&g, 2.0, false).unwrap() - 0.5).abs() < 1e-12);
        assert!((continuous_norm(&g, 4.0, false).unwrap() - 3.0 / 8.0).abs() < 1e-12);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert!((continuous_norm(&g, 2.0, true).unwrap() - pi2 / 2.0).abs() < 1e-11);
    }

    #[test]
    fn overlap_examples() {
        let g = weights::triangle().unwrap();
        // disjoint supports at |t| = 1
        assert_eq!(overlap(&g, &g, 1.0, false).unwrap(), 0.0);
        // (gg)(0) = gbar(2)
        assert!((overlap(&g, &g, 0.0, false).unwrap() - 1.0 / 12.0).abs() < 1e-12);
        // derivative overlap at t = 1/2: g' = -1 on (1/2,1), g'(u-1/2) = +1 there
        assert!((overlap(&g, &g, 0.5, true).unwrap() + 0.5).abs() < 1e-12);
        // overlap is even in t for g = h
        for t in [0.1, 0.3, 0.7] {
            let a = overlap(&g, &g, t, false).unwrap();
            let b = overlap(&g, &g, -t, false).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn m_p_closed_equals_direct_gaussian_moment() {
        // m_p(g; eta, zeta) = m_p (eta^2 gbar(2) + zeta^2 gbar'(2))^{p/2}
        let ks = triangle_set();
        for p in [2u32, 4, 6] {
            for &(eta, zeta) in &[(1.0, 0.5), (0.3, 2.0), (2.0, 0.0), (0.0, 1.0)] {
                let var: f64 = eta * eta / 12.0 + zeta * zeta;
                let direct = gaussian_abs_moment(p as f64) * var.powf(p as f64 / 2.0);
                let closed = ks.m_p_closed(0, p, eta, zeta);
                assert!(
                    (closed - direct).abs() < 1e-12 * direct.max(1.0),
                    "p={p} eta={eta} zeta={zeta}"
                );
            }
        }
    }

    #[test]
    fn lemma_identity_mu_p() {
        // mu_p(g; eta, zeta) = m_p eta^p gbar(2)^{p/2}
        let tri = weights::triangle().unwrap();
        let sin = weights::sine().unwrap();
        let ks = KernelSet::new(vec![tri, sin]).unwrap();
        for i in 0..2 {
            for p in [2u32, 4] {
                for eta in [0.0, 0.7, 1.6] {
                    for zeta in [0.0, 0.9, 2.0] {
                        let mu = ks.mu_p(i, p, eta, zeta).unwrap();
                        let expect = gaussian_abs_moment(p as f64)
                            * eta.powi(p as i32)
                            * ks.norm2(i).powf(p as f64 / 2.0);
                        assert!(
                            (mu - expect).abs() < 1e-10,
                            "i={i} p={p} eta={eta} zeta={zeta}: {mu} vs {expect}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_kernels_vanish() {
        let ks = triangle_set();
        let mk = ks.mu_kernels(0, 0, 2, 0.0, 0.0).unwrap();
        assert_eq!(mk.mu_p_g, 0.0);
        assert!(mk.mu_2p.abs() < 1e-14);
        assert!(mk.mu_bar_2p.abs() < 1e-14);
    }

    #[test]
    fn example_constants_triangle() {
        // Psi_{2+-} = 151/80640, Psi_bar_{2+-} = 1/96 for the triangle weight.
        let ks = triangle_set();
        let psi = ks.psi_matrices(2.0).unwrap();
        let expect_psi = 151.0 / 80640.0;
        let expect_bar = 1.0 / 96.0;
        assert!((psi.minus.get(0, 0) - expect_psi).abs() < 1e-9 * expect_psi);
        assert!((psi.plus.get(0, 0) - expect_psi).abs() < 1e-9 * expect_psi);
        assert!((psi.bar_minus.get(0, 0) - expect_bar).abs() < 1e-9 * expect_bar);
        assert!((psi.bar_plus.get(0, 0) - expect_bar).abs() < 1e-9 * expect_bar);
    }

    #[test]
    fn mu_bar_4_example_closed_form() {
        // mu_bar_4(g,g; eta, zeta) = 4(151/80640 eta^4 + 1/48 eta^2 zeta^2 + 1/6 zeta^4)
        let ks = triangle_set();
        let coeffs = ks.mu_bar4_coeffs(0).unwrap();
        assert!((coeffs.eta4 - 4.0 * 151.0 / 80640.0).abs() < 1e-11);
        assert!((coeffs.eta2_zeta2 - 4.0 / 48.0).abs() < 1e-11);
        assert!((coeffs.zeta4 - 4.0 / 6.0).abs() < 1e-11);

        for &(eta, zeta) in &[(1.0, 0.0), (0.0, 1.0), (1.3, 0.4), (0.2, 2.0)] {
            let direct = ks.mu_bar_4_closed(0, eta, zeta).unwrap();
            let expect = 4.0
                * ((151.0 / 80640.0) * eta.powi(4)
                    + (1.0 / 48.0) * eta.powi(2) * zeta.powi(2)
                    + (1.0 / 6.0) * zeta.powi(4));
            assert!(
                (direct - expect).abs() < 1e-8 * expect.max(1e-8),
                "eta={eta} zeta={zeta}: {direct} vs {expect}"
            );
            // the two independent routes agree
            let via_kernels = ks.mu_kernels(0, 0, 2, eta, zeta).unwrap().mu_bar_2p;
            assert!(
                (via_kernels - direct).abs() < 1e-8 * direct.abs().max(1e-8),
                "route mismatch at eta={eta} zeta={zeta}: {via_kernels} vs {direct}"
            );
        }
    }

    #[test]
    fn mu_bar_matrix_is_psd_on_grid() {
        let tri = weights::triangle().unwrap();
        let sin = weights::sine().unwrap();
        let ks = KernelSet::new(vec![tri, sin]).unwrap();
        for p in [2u32, 4] {
            for eta in [0.2, 1.0, 2.0] {
                for zeta in [0.0, 0.8, 2.0] {
                    let m = ks.mu_bar_matrix(p, eta, zeta).unwrap();
                    assert!(m.asymmetry() < 1e-12);
                    let scale = m.get(0, 0).abs().max(m.get(1, 1).abs()).max(1e-12);
                    assert!(
                        m.min_eigenvalue() > -1e-9 * scale,
                        "p={p} eta={eta} zeta={zeta}: min eig {}",
                        m.min_eigenvalue()
                    );
                }
            }
        }
    }

    #[test]
    fn psi_rejects_unsupported_power() {
        let ks = triangle_set();
        assert!(ks.psi_matrices(3.0).is_err());
        assert!(ks.psi_matrices(2.5).is_err());
        assert!(ks.psi_matrices(4.0).is_ok());
    }

    #[test]
    fn psi_diagonals_nonnegative() {
        let tri = weights::triangle().unwrap();
        let sin = weights::sine().unwrap();
        let ks = KernelSet::new(vec![tri, sin]).unwrap();
        for p in [2.0, 4.0, 6.0] {
            let psi = ks.psi_matrices(p).unwrap();
            for m in [&psi.minus, &psi.plus, &psi.bar_minus, &psi.bar_plus] {
                for i in 0..2 {
                    assert!(m.get(i, i) >= 0.0);
                }
            }
        }
    }
}
