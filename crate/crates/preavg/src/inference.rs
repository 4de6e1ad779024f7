//! Feasible inference: studentized estimates of integrated volatility powers,
//! confidence intervals for the quadratic variation, and the two-weight jump
//! test. Oracle-variance variants (fed by simulated ground truth) exist for
//! validating the limit theory.

use crate::error::{Error, Result};
use crate::estimators::{
    estimate, m_stat, vbar_stat, EstimateTarget, NormalizationMode, PreaveragedSeries,
};
use crate::kernels::{continuous_norm, MuBar4Coeffs, PsiMatrices, WeightFunction};
use crate::simulate::SimTruth;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceKind {
    Feasible,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticFlag {
    /// the M-based variance estimate came out nonpositive; no interval
    NonPositiveVariance,
    /// the denominator statistic of a ratio test was nonpositive
    DegenerateDenominator,
}

/// A point estimate with uncertainty, or a test decision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InferenceResult {
    pub statistic: String,
    pub target: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
    /// confidence level for intervals; significance level for tests
    pub level: f64,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    /// centered statistic over its standard error, when a centering is known
    pub studentized: Option<f64>,
    pub p_value: Option<f64>,
    pub reject: Option<bool>,
    pub variance: VarianceKind,
    pub flags: Vec<DiagnosticFlag>,
}

impl InferenceResult {
    pub fn has_interval(&self) -> bool {
        self.ci_lower.is_some() && self.ci_upper.is_some()
    }

    pub fn covers(&self, truth: f64) -> Option<bool> {
        match (self.ci_lower, self.ci_upper) {
            (Some(lo), Some(hi)) => Some(lo <= truth && truth <= hi),
            _ => None,
        }
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Two-sided quantile for a confidence level (e.g. 0.95 -> 1.96).
fn z_for_level(level: f64) -> Result<f64> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "level must lie in (0,1), got {level}"
        )));
    }
    Ok(std_normal().inverse_cdf(0.5 + level / 2.0))
}

/// theta and the M-window correction under the chosen normalization.
fn theta_and_mfactor(
    pre: &PreaveragedSeries,
    t: f64,
    mode: NormalizationMode,
) -> Result<(f64, f64)> {
    let grid = pre.grid();
    let idx = grid.count_index(t)?;
    match mode {
        NormalizationMode::Asymptotic => Ok((grid.theta(), 1.0)),
        NormalizationMode::FiniteSample => {
            let windows = (idx + 1).saturating_sub(3 * grid.k_n()) as f64;
            Ok((grid.theta_realized(), idx as f64 / windows.max(1.0)))
        }
    }
}

/// Point estimate and confidence interval for int |sigma_s|^p ds (even p),
/// studentized by the feasible M-based variance. When `truth_center` is
/// given (simulation context), the studentized value of the CLT is returned
/// as well.
pub fn studentized_power(
    pre: &PreaveragedSeries,
    g: &WeightFunction,
    p: u32,
    t: f64,
    level: f64,
    truth_center: Option<f64>,
    mode: NormalizationMode,
) -> Result<InferenceResult> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "studentized power requires even p >= 2, got {p}"
        )));
    }
    let z = z_for_level(level)?;
    let rep = estimate(pre, g, EstimateTarget::IntegratedPower { p }, t, mode, false)?;
    let grid = pre.grid();
    let delta = grid.delta();
    let (theta, m_factor) = theta_and_mfactor(pre, t, mode)?;

    let m = m_stat(pre, pre, p, t)?;
    let pf = p as f64;
    // Delta^{1-p/2} M estimates theta^{-p} int mu_bar_{2p}(g,g; theta sigma,
    // alpha); one factor theta maps it to the variance theta^{1-p} int mu_bar
    // of the centered statistic.
    let vhat = theta * delta.powf(1.0 - pf / 2.0) * m * m_factor;

    let mut result = InferenceResult {
        statistic: format!("studentized_power[{p}]"),
        target: rep.target.clone(),
        estimate: rep.value,
        std_error: None,
        level,
        ci_lower: None,
        ci_upper: None,
        studentized: None,
        p_value: None,
        reject: None,
        variance: VarianceKind::Feasible,
        flags: Vec::new(),
    };
    if vhat <= 0.0 {
        result.flags.push(DiagnosticFlag::NonPositiveVariance);
        return Ok(result);
    }
    // est = scale * raw and raw relates to the limit with rate delta^{3/4 - p/4}
    let se = rep.scale * delta.powf(pf / 4.0 - 0.75) * vhat.sqrt();
    result.std_error = Some(se);
    result.ci_lower = Some(rep.value - z * se);
    result.ci_upper = Some(rep.value + z * se);
    if let Some(center) = truth_center {
        result.studentized = Some((rep.value - center) / se);
    }
    Ok(result)
}

/// Two-weight test of the null of no jumps on [0, t], following the ratio
/// S = Vbar(Z,g,p) / Vbar(Z,h,p) whose limit separates the continuous and
/// the jump case. `level` is the significance level of the two-sided test.
///
/// The decision combines the studentized test with a nearest-limit rule:
/// under jumps both the numerator and the M-based variance estimate grow at
/// the same rate, so the studentized statistic converges to a constant and
/// cannot diverge; rejection when S lies closer to the jump limit than to
/// the continuous one restores consistency, with a size contribution that
/// vanishes as the two limits separate on the null scale.
pub fn jump_test(
    pre_g: &PreaveragedSeries,
    g: &WeightFunction,
    pre_h: &PreaveragedSeries,
    h: &WeightFunction,
    p: u32,
    t: f64,
    level: f64,
    mode: NormalizationMode,
) -> Result<InferenceResult> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "jump test requires even p >= 2, got {p}"
        )));
    }
    let gbar2 = continuous_norm(g, 2.0, false)?;
    let hbar2 = continuous_norm(h, 2.0, false)?;
    let gbar_p = continuous_norm(g, p as f64, false)?;
    let hbar_p = continuous_norm(h, p as f64, false)?;
    let pf = p as f64;
    let null_limit = (gbar2 / hbar2).powf(pf / 2.0);
    let jump_limit = gbar_p / hbar_p;
    if (null_limit - jump_limit).abs() <= 1e-9 * null_limit.abs().max(jump_limit.abs()) {
        return Err(Error::InvalidParameter(format!(
            "weights do not separate the hypotheses: continuous limit {null_limit} equals jump limit {jump_limit}"
        )));
    }

    let vbar_g = vbar_stat(pre_g, p, t)?;
    let vbar_h = vbar_stat(pre_h, p, t)?;
    let mut result = InferenceResult {
        statistic: format!("jump_test[{p}]"),
        target: format!(
            "Vbar ratio: {null_limit:.6} when continuous, {jump_limit:.6} under jumps"
        ),
        estimate: f64::NAN,
        std_error: None,
        level,
        ci_lower: None,
        ci_upper: None,
        studentized: None,
        p_value: None,
        reject: None,
        variance: VarianceKind::Feasible,
        flags: Vec::new(),
    };
    if vbar_h <= 0.0 {
        result.flags.push(DiagnosticFlag::DegenerateDenominator);
        return Ok(result);
    }
    let s_ratio = vbar_g / vbar_h;
    result.estimate = s_ratio;

    let grid = pre_g.grid();
    let delta = grid.delta();
    let (theta, m_factor) = theta_and_mfactor(pre_g, t, mode)?;

    let m_gg = m_stat(pre_g, pre_g, p, t)?;
    let m_gh = m_stat(pre_g, pre_h, p, t)?;
    let m_hg = m_stat(pre_h, pre_g, p, t)?;
    let m_hh = m_stat(pre_h, pre_h, p, t)?;
    // theta Delta^{1-p/2} M estimates theta^{1-p} int mu_bar_{2p}
    let theta_scale = theta * delta.powf(1.0 - pf / 2.0) * m_factor;
    let quad = theta_scale
        * (m_gg - null_limit * (m_gh + m_hg) + null_limit * null_limit * m_hh);

    // a_h estimates m_p (theta hbar(2))^{p/2} int |sigma|^p
    let a_h = delta.powf(1.0 - pf / 4.0) * vbar_h;
    let vhat = quad / (a_h * a_h);
    if vhat <= 0.0 || !vhat.is_finite() {
        result.flags.push(DiagnosticFlag::NonPositiveVariance);
        return Ok(result);
    }
    let t_stat = delta.powf(-0.25) * (s_ratio - null_limit) / vhat.sqrt();
    let normal = std_normal();
    let p_value = 2.0 * (1.0 - normal.cdf(t_stat.abs()));
    let nearest_is_jump = (s_ratio - jump_limit).abs() < (s_ratio - null_limit).abs();
    result.std_error = Some(delta.powf(0.25) * vhat.sqrt());
    result.studentized = Some(t_stat);
    result.p_value = Some(p_value);
    result.reject = Some(p_value < level || nearest_is_jump);
    Ok(result)
}

/// Oracle inputs for the quadratic-variation interval: simulated truth plus
/// the kernel constants of the limit variance.
pub struct QvOracle<'a> {
    pub truth: &'a SimTruth,
    pub coeffs: &'a MuBar4Coeffs,
    pub psi: &'a PsiMatrices,
}

/// Confidence interval for the quadratic variation [X,X]_t. Feasible mode
/// studentizes with the M statistic (valid on continuous paths); oracle mode
/// uses the simulated truth including the jump variance term and exists to
/// validate the CLT by coverage.
pub fn qv_interval(
    pre: &PreaveragedSeries,
    g: &WeightFunction,
    t: f64,
    level: f64,
    oracle: Option<QvOracle<'_>>,
    mode: NormalizationMode,
) -> Result<InferenceResult> {
    let z = z_for_level(level)?;
    let rep = estimate(pre, g, EstimateTarget::QuadraticVariation, t, mode, false)?;
    let grid = pre.grid();
    let delta = grid.delta();
    let k = grid.k_n() as f64;
    let (theta, m_factor) = theta_and_mfactor(pre, t, mode)?;

    // The k_n-normalized QV statistic scales as (sqrt(delta)/theta) times the
    // delta-normalized one, so its continuous limit variance carries
    // theta^{-3} int mu_bar_4(g,g; theta sigma, alpha); M estimates
    // theta^{-2} of that integral.
    let (kind, limit_var) = match &oracle {
        None => {
            let m = m_stat(pre, pre, 2, t)?;
            (VarianceKind::Feasible, m * m_factor / theta)
        }
        Some(inputs) => {
            if inputs.psi.p != 2.0 {
                return Err(Error::InvalidParameter(
                    "oracle qv interval needs the Psi matrices at p = 2".into(),
                ));
            }
            let cont = inputs
                .truth
                .integral_mu_bar4(inputs.coeffs, theta, t)
                .ok_or_else(|| {
                    Error::InvalidParameter("truth lacks the integrals for mu_bar_4".into())
                })?
                / theta.powi(3);
            let jump = inputs.truth.qv_jump_variance(
                inputs.psi.minus.get(0, 0),
                inputs.psi.plus.get(0, 0),
                inputs.psi.bar_minus.get(0, 0),
                inputs.psi.bar_plus.get(0, 0),
                theta,
                t,
            );
            (VarianceKind::Oracle, cont + jump)
        }
    };

    let mut result = InferenceResult {
        statistic: "qv_interval".to_string(),
        target: rep.target.clone(),
        estimate: rep.value,
        std_error: None,
        level,
        ci_lower: None,
        ci_upper: None,
        studentized: None,
        p_value: None,
        reject: None,
        variance: kind,
        flags: Vec::new(),
    };
    if limit_var <= 0.0 || !limit_var.is_finite() {
        result.flags.push(DiagnosticFlag::NonPositiveVariance);
        return Ok(result);
    }
    // raw = k gbar(2) [X,X] + k delta^{1/4} sqrt(v) Z, est = scale * raw
    let se = rep.scale * k * delta.powf(0.25) * limit_var.sqrt();
    result.std_error = Some(se);
    result.ci_lower = Some(rep.value - z * se);
    result.ci_upper = Some(rep.value + z * se);
    Ok(result)
}
