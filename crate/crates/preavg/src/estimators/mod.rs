//! Observable statistics of a noisy high-frequency series: pre-averaged
//! increments, the power-variation functionals V(Z,g,p,r), the bias-corrected
//! V-bar, the covariance statistic M, and the normalized / centered forms
//! used by the limit theorems.

pub mod csv;
mod preaverage;

pub use preaverage::ZbarMode;

use crate::error::{Error, Result};
use crate::kernels::{
    abs_power, continuous_norm, gaussian_abs_moment, solve_rho, DiscreteWeights, WeightFunction,
};
use serde::{Deserialize, Serialize};

/// Equidistant sampling scheme: step, count, bandwidth parameter theta and
/// the derived window length k_n = round(theta / sqrt(delta)).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplingGrid {
    delta: f64,
    n_obs: usize,
    theta: f64,
    k_n: usize,
}

impl SamplingGrid {
    pub fn new(delta: f64, n_obs: usize, theta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidGrid(format!("delta must be positive, got {delta}")));
        }
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidGrid(format!("theta must be positive, got {theta}")));
        }
        // nearest integer, ties up
        let k_n = (theta / delta.sqrt() + 0.5).floor() as usize;
        if k_n < 2 {
            return Err(Error::InvalidGrid(format!(
                "window length k_n = {k_n} < 2; increase theta or the sampling frequency"
            )));
        }
        if k_n > n_obs {
            return Err(Error::InvalidGrid(format!(
                "window length k_n = {k_n} exceeds the number of increments {n_obs}"
            )));
        }
        debug_assert!((k_n as f64 * delta.sqrt() - theta).abs() <= delta.sqrt() * 0.5 + 1e-12);
        Ok(SamplingGrid { delta, n_obs, theta, k_n })
    }

    /// Grid with n increments over [0, horizon].
    pub fn from_count(n: usize, horizon: f64, theta: f64) -> Result<Self> {
        if n == 0 || !(horizon > 0.0) {
            return Err(Error::InvalidGrid("need n >= 1 and positive horizon".into()));
        }
        Self::new(horizon / n as f64, n, theta)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of increments N (the series holds N + 1 values).
    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn k_n(&self) -> usize {
        self.k_n
    }

    /// u_n = k_n * delta.
    pub fn u_n(&self) -> f64 {
        self.k_n as f64 * self.delta
    }

    pub fn horizon(&self) -> f64 {
        self.n_obs as f64 * self.delta
    }

    /// The realized bandwidth k_n * sqrt(delta) (equals theta up to rounding).
    pub fn theta_realized(&self) -> f64 {
        self.k_n as f64 * self.delta.sqrt()
    }

    /// [t / delta] with a relative epsilon guard, clamped to the data range.
    pub fn count_index(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative time {t}")));
        }
        let ratio = t / self.delta;
        if ratio > self.n_obs as f64 * (1.0 + 1e-9) + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "time {t} beyond the horizon {}",
                self.horizon()
            )));
        }
        let idx = (ratio + 1e-9 * ratio.max(1.0)).floor() as usize;
        Ok(idx.min(self.n_obs))
    }
}

/// The observed values Z_0, .., Z_N on a sampling grid.
#[derive(Debug, Clone)]
pub struct ObservedSeries {
    values: Vec<f64>,
    grid: SamplingGrid,
}

impl ObservedSeries {
    pub fn new(values: Vec<f64>, grid: SamplingGrid) -> Result<Self> {
        if values.len() != grid.n_obs() + 1 {
            return Err(Error::SeriesTooShort(format!(
                "series holds {} values but the grid expects {}",
                values.len(),
                grid.n_obs() + 1
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite observation".into()));
        }
        Ok(ObservedSeries { values, grid })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Increment Delta^n_i Z = Z_i - Z_{i-1} for i = 1..=N.
    pub fn increment(&self, i: usize) -> f64 {
        self.values[i] - self.values[i - 1]
    }
}

/// Pre-averaged increments Z-bar(g)^n_i and the bias-correction statistic
/// Z-hat(g)^n_i for i = 0..=N-k_n.
#[derive(Debug, Clone)]
pub struct PreaveragedSeries {
    zbar: Vec<f64>,
    zhat: Vec<f64>,
    weights: DiscreteWeights,
    grid: SamplingGrid,
    weight_name: String,
}

impl PreaveragedSeries {
    pub fn zbar(&self) -> &[f64] {
        &self.zbar
    }

    pub fn zhat(&self) -> &[f64] {
        &self.zhat
    }

    pub fn weights(&self) -> &DiscreteWeights {
        &self.weights
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn weight_name(&self) -> &str {
        &self.weight_name
    }

    pub fn n_windows(&self) -> usize {
        self.zbar.len()
    }
}

/// Pre-average a series with weight g. Z-bar uses an O(N) block fast path for
/// piecewise-polynomial weights; Z-hat is the plain O(N k_n) sum.
pub fn preaverage(series: &ObservedSeries, g: &WeightFunction) -> Result<PreaveragedSeries> {
    preaverage_with_mode(series, g, ZbarMode::Auto)
}

/// Pre-average with an explicit Z-bar evaluation strategy (used by tests to
/// validate the fast path against the naive one).
pub fn preaverage_with_mode(
    series: &ObservedSeries,
    g: &WeightFunction,
    mode: ZbarMode,
) -> Result<PreaveragedSeries> {
    let grid = *series.grid();
    let k = grid.k_n();
    let n = grid.n_obs();
    if n < k {
        return Err(Error::SeriesTooShort(format!(
            "need at least k_n = {k} increments, have {n}"
        )));
    }
    let weights = g.discretize(k);
    let zbar = preaverage::zbar(series.values(), &weights, g, mode)?;

    // increments and their squares, shared by the zhat pass
    let vals = series.values();
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        let d = vals[i + 1] - vals[i];
        d2[i] = d * d;
    }
    let gd2: Vec<f64> = weights.diffs().iter().map(|w| w * w).collect();
    let nw = n - k + 1;
    let mut zhat = vec![0.0; nw];
    for (i, out) in zhat.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, w2) in gd2.iter().enumerate() {
            acc += w2 * d2[i + j];
        }
        *out = acc;
    }

    Ok(PreaveragedSeries {
        zbar,
        zhat,
        weights,
        grid,
        weight_name: g.name().to_string(),
    })
}

/// V(Z,g,p,r)^n_t = sum_{i=0}^{[t/delta]-k_n} |Z-bar_i|^p |Z-hat_i|^r,
/// with the convention 0^0 = 1 so r = 0 is the pure power variation.
pub fn v_stat(pre: &PreaveragedSeries, p: f64, r: f64, t: f64) -> Result<f64> {
    if p < 0.0 || r < 0.0 {
        return Err(Error::InvalidParameter("powers must be nonnegative".into()));
    }
    let count = window_count(pre, t, 1)?;
    let mut acc = 0.0;
    for i in 0..count {
        acc += abs_power(pre.zbar[i], p) * abs_power(pre.zhat[i], r);
    }
    Ok(acc)
}

/// Windows entering a statistic truncated at time t: i = 0 ..= [t/delta] - m*k_n.
fn window_count(pre: &PreaveragedSeries, t: f64, m: usize) -> Result<usize> {
    let idx = pre.grid.count_index(t)?;
    let need = m * pre.grid.k_n();
    if idx < need {
        return Err(Error::SeriesTooShort(format!(
            "[t/delta] = {idx} is below the minimum horizon {need} for this statistic"
        )));
    }
    Ok(idx - need + 1)
}

/// V-bar(Z,g,p)^n_t = sum_l rho_{p,l} V(Z,g,p-2l,l)^n_t for even p, computed
/// in a single pass over the windows.
pub fn vbar_stat(pre: &PreaveragedSeries, p: u32, t: f64) -> Result<f64> {
    let rho = solve_rho(p)?;
    let count = window_count(pre, t, 1)?;
    let half = (p / 2) as usize;
    let mut sums = vec![0.0; half + 1];
    for i in 0..count {
        let zb = pre.zbar[i].abs();
        let zh = pre.zhat[i];
        // powers |zbar|^{p-2l} zhat^l accumulated per l
        let mut zh_pow = 1.0;
        for (l, slot) in sums.iter_mut().enumerate() {
            let e = (p as i32) - 2 * l as i32;
            *slot += zb.powi(e) * zh_pow;
            zh_pow *= zh;
        }
    }
    Ok(sums
        .iter()
        .zip(rho.values())
        .map(|(s, r)| s * r)
        .sum())
}

/// The covariance statistic M(Z,g,h;p)^n_t: the full double sum over
/// (r, r') with window offsets k_n and the 2k_n moving average, truncated at
/// [t/delta] - 3 k_n.
pub fn m_stat(
    pre_g: &PreaveragedSeries,
    pre_h: &PreaveragedSeries,
    p: u32,
    t: f64,
) -> Result<f64> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "M statistic requires even p >= 2, got {p}"
        )));
    }
    let k = pre_g.grid.k_n();
    if pre_h.grid.k_n() != k || pre_h.grid.n_obs() != pre_g.grid.n_obs() {
        return Err(Error::InvalidParameter(
            "M statistic requires both pre-averaged series on the same grid".into(),
        ));
    }
    let rho = solve_rho(p)?;
    let count = window_count(pre_g, t, 3)?;
    let half = (p / 2) as usize;

    // |Z-bar(h)|^{p-2r'} prefix sums per exponent, for the 2k_n moving average
    let nw = pre_h.n_windows();
    let mut h_pows: Vec<Vec<f64>> = Vec::with_capacity(half + 1);
    let mut h_prefix: Vec<Vec<f64>> = Vec::with_capacity(half + 1);
    for rp in 0..=half {
        let e = (p - 2 * rp as u32) as i32;
        let pows: Vec<f64> = pre_h.zbar.iter().map(|z| z.abs().powi(e)).collect();
        let mut pref = vec![0.0; nw + 1];
        for (i, v) in pows.iter().enumerate() {
            pref[i + 1] = pref[i] + v;
        }
        h_pows.push(pows);
        h_prefix.push(pref);
    }
    let g_pows: Vec<Vec<f64>> = (0..=half)
        .map(|r| {
            let e = (p - 2 * r as u32) as i32;
            pre_g.zbar.iter().map(|z| z.abs().powi(e)).collect()
        })
        .collect();

    let kf = k as f64;
    let mut total = 0.0;
    for r in 0..=half {
        for rp in 0..=half {
            let coef = rho.value(r) * rho.value(rp);
            let mut acc = 0.0;
            for i in 0..count {
                let hat_g = pre_g.zhat[i].powi(r as i32);
                let hat_h = pre_h.zhat[i].powi(rp as i32);
                let avg = (h_prefix[rp][i + 2 * k + 1] - h_prefix[rp][i + 1]) / kf;
                let lead = g_pows[r][i + k] * avg;
                let cross = 2.0 * g_pows[r][i] * h_pows[rp][i + k];
                acc += hat_g * hat_h * (lead - cross);
            }
            total += coef * acc;
        }
    }
    Ok(total)
}

/// What an estimate targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum EstimateTarget {
    /// sum of |jump|^p, p > 2
    JumpPower { p: f64 },
    /// quadratic variation [X,X]_t
    QuadraticVariation,
    /// int |sigma_s|^p ds, even p
    IntegratedPower { p: u32 },
    /// m_p int |theta gbar(2) sigma^2 + gbar'(2) alpha^2 / theta|^{p/2} ds
    MixedPower { p: f64 },
}

/// Normalization flavor: the plain asymptotic constants, or the same
/// constants with exact finite-sample window counts and discrete norms
/// (identical limits, far smaller finite-n bias).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    Asymptotic,
    #[default]
    FiniteSample,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSummary {
    pub delta: f64,
    pub n_obs: usize,
    pub k_n: usize,
    pub theta: f64,
}

impl From<&SamplingGrid> for GridSummary {
    fn from(g: &SamplingGrid) -> Self {
        GridSummary {
            delta: g.delta(),
            n_obs: g.n_obs(),
            k_n: g.k_n(),
            theta: g.theta(),
        }
    }
}

/// A fully described estimate: raw statistic, the normalization that maps it
/// to the reported value, and the target it estimates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatisticReport {
    pub statistic: String,
    pub weight: String,
    pub p: f64,
    pub r: f64,
    pub t: f64,
    /// raw statistic value before normalization
    pub raw: f64,
    /// multiplicative factor applied to raw
    pub scale: f64,
    /// additive centering applied after scaling (zero for plain estimates)
    pub centering: f64,
    /// reported estimate: raw * scale - centering
    pub value: f64,
    pub target: String,
    pub normalization: String,
    pub grid: GridSummary,
}

/// Normalized estimate of a target quantity from a pre-averaged series.
pub fn estimate(
    pre: &PreaveragedSeries,
    g: &WeightFunction,
    target: EstimateTarget,
    t: f64,
    mode: NormalizationMode,
    truncate_negative: bool,
) -> Result<StatisticReport> {
    let grid = pre.grid;
    let k = grid.k_n();
    let kf = k as f64;
    let delta = grid.delta();
    let idx = grid.count_index(t)?;
    let windows = window_count(pre, t, 1)? as f64;
    let span = idx as f64 * delta;

    let (stat_name, raw, p_rep, r_rep, scale, target_label, norm_label) = match target {
        EstimateTarget::JumpPower { p } => {
            if p <= 2.0 {
                return Err(Error::InvalidParameter(format!(
                    "jump power target requires p > 2, got {p}"
                )));
            }
            let raw = v_stat(pre, p, 0.0, t)?;
            let (scale, label) = match mode {
                NormalizationMode::Asymptotic => {
                    let gbar_p = continuous_norm(g, p, false)?;
                    (1.0 / (kf * gbar_p), "V / (k_n gbar(p))".to_string())
                }
                NormalizationMode::FiniteSample => {
                    let gbar_p_n = pre.weights.norm(p);
                    (1.0 / gbar_p_n, "V / gbar(p)_n".to_string())
                }
            };
            (
                format!("jump_power[{p}]"),
                raw,
                p,
                0.0,
                scale,
                format!("sum of |jump|^{p} over [0, t]"),
                label,
            )
        }
        EstimateTarget::QuadraticVariation => {
            let raw = vbar_stat(pre, 2, t)?;
            let (scale, label) = match mode {
                NormalizationMode::Asymptotic => {
                    let gbar2 = continuous_norm(g, 2.0, false)?;
                    (1.0 / (kf * gbar2), "Vbar(2) / (k_n gbar(2))".to_string())
                }
                NormalizationMode::FiniteSample => {
                    let denom = pre.weights.norm(2.0) - 0.5 * pre.weights.norm_diff(2.0);
                    (
                        idx as f64 / (windows * denom),
                        "Vbar(2) [t/delta] / (windows (gbar(2)_n - gbar'(2)_n/2))".to_string(),
                    )
                }
            };
            (
                "quadratic_variation".to_string(),
                raw,
                2.0,
                0.0,
                scale,
                "[X,X]_t".to_string(),
                label,
            )
        }
        EstimateTarget::IntegratedPower { p } => {
            if p < 2 || p % 2 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "integrated power target requires even p >= 2, got {p}"
                )));
            }
            let raw = vbar_stat(pre, p, t)?;
            let m_p = gaussian_abs_moment(p as f64);
            let (scale, label) = match mode {
                NormalizationMode::Asymptotic => {
                    let gbar2 = continuous_norm(g, 2.0, false)?;
                    let denom = m_p * (grid.theta() * gbar2).powf(p as f64 / 2.0);
                    (
                        delta.powf(1.0 - p as f64 / 4.0) / denom,
                        "delta^{1-p/4} Vbar(p) / (m_p (theta gbar(2))^{p/2})".to_string(),
                    )
                }
                NormalizationMode::FiniteSample => {
                    // exact per-window expectation constant of Vbar on a pure
                    // Brownian signal where available, leading term otherwise
                    let kp = vbar_window_constant(&pre.weights, p)
                        .unwrap_or_else(|| m_p * pre.weights.norm(2.0).powf(p as f64 / 2.0));
                    let denom = delta.powf(p as f64 / 2.0) * kp;
                    (
                        span / (windows * denom),
                        "Vbar(p) t / (windows delta^{p/2} K_p(g, k_n))".to_string(),
                    )
                }
            };
            (
                format!("integrated_power[{p}]"),
                raw,
                p as f64,
                0.0,
                scale,
                format!("int |sigma_s|^{p} ds over [0, t]"),
                label,
            )
        }
        EstimateTarget::MixedPower { p } => {
            if p <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "mixed power target requires p > 0, got {p}"
                )));
            }
            let raw = v_stat(pre, p, 0.0, t)?;
            let base = delta.powf(1.0 - p / 4.0);
            let (scale, label) = match mode {
                NormalizationMode::Asymptotic => (base, "delta^{1-p/4} V".to_string()),
                NormalizationMode::FiniteSample => (
                    base * idx as f64 / windows,
                    "delta^{1-p/4} V [t/delta] / windows".to_string(),
                ),
            };
            (
                format!("mixed_power[{p}]"),
                raw,
                p,
                0.0,
                scale,
                format!(
                    "m_p int |theta gbar(2) sigma^2 + gbar'(2) alpha^2 / theta|^{}/2 ds",
                    p
                ),
                label,
            )
        }
    };

    let mut value = raw * scale;
    let mut norm_label = norm_label;
    if truncate_negative && value < 0.0 {
        value = 0.0;
        norm_label.push_str("; truncated at zero");
    }
    Ok(StatisticReport {
        statistic: stat_name,
        weight: pre.weight_name.clone(),
        p: p_rep,
        r: r_rep,
        t,
        raw,
        scale,
        centering: 0.0,
        value,
        target: target_label,
        normalization: norm_label,
        grid: (&grid).into(),
    })
}

/// Exact value of E[Vbar(X,g,p) per window] / (sigma^2 delta)^{p/2} for a
/// Brownian X without noise, from the joint Gaussian moments of the window
/// average and the squared-increment statistic. Available for p = 2 and 4;
/// higher powers fall back to the leading term.
fn vbar_window_constant(w: &DiscreteWeights, p: u32) -> Option<f64> {
    let k = w.k_n();
    let s2: f64 = (1..=k).map(|j| w.val(j) * w.val(j)).sum();
    let s2d: f64 = (1..=k).map(|j| w.diff(j) * w.diff(j)).sum();
    match p {
        2 => Some(s2 - 0.5 * s2d),
        4 => {
            let cross: f64 = (1..=k)
                .map(|j| (w.val(j) * w.diff(j)).powi(2))
                .sum();
            let quart: f64 = (1..=k).map(|j| w.diff(j).powi(4)).sum();
            Some(3.0 * s2 * s2 - 3.0 * s2 * s2d - 6.0 * cross + 0.75 * s2d * s2d
                + 1.5 * quart)
        }
        _ => None,
    }
}

/// Ground-truth functionals needed to center the CLT statistics; provided by
/// the simulator.
pub trait TruthSource {
    /// int_0^t |sigma_s|^p ds
    fn integrated_sigma_power(&self, p: u32, t: f64) -> Option<f64>;
    /// sum_{s <= t} |jump|^p; None when the generating model has no jump part
    fn jump_abs_power(&self, p: f64, t: f64) -> Option<f64>;
    /// [X,X]_t
    fn quadratic_variation(&self, t: f64) -> Option<f64>;
}

/// Which centered statistic to form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenteredFlavor {
    /// delta^{-1/4} (delta^{1-p/4} Vbar(p) - m_p (theta gbar(2))^{p/2} int |sigma|^p)
    ContinuousPower,
    /// delta^{-1/4} (V(p,0)/k_n - gbar(p) sum |jump|^p)
    JumpPowerRaw,
    /// delta^{-1/4} (Vbar(p)/k_n - gbar(p) sum |jump|^p)
    JumpPowerCorrected,
    /// delta^{-1/4} (Vbar(2)/k_n - gbar(2) [X,X]_t)
    Qv,
}

/// Exactly centered, delta^{-1/4}-scaled statistic; the truth comes from the
/// simulator. Written as c * delta^{-1/4} * (estimate - truth) with the
/// flavor's limit constant c, which reproduces the raw definitions in
/// asymptotic normalization mode.
pub fn centered_stat<T: TruthSource>(
    pre: &PreaveragedSeries,
    truth: &T,
    g: &WeightFunction,
    p: u32,
    flavor: CenteredFlavor,
    t: f64,
    mode: NormalizationMode,
) -> Result<f64> {
    let delta = pre.grid.delta();
    let quarter = delta.powf(-0.25);
    match flavor {
        CenteredFlavor::ContinuousPower => {
            let truth_val = truth.integrated_sigma_power(p, t).ok_or_else(|| {
                Error::InvalidParameter("truth lacks integrated sigma powers".into())
            })?;
            let rep = estimate(pre, g, EstimateTarget::IntegratedPower { p }, t, mode, false)?;
            let gbar2 = continuous_norm(g, 2.0, false)?;
            let c = gaussian_abs_moment(p as f64)
                * (pre.grid.theta() * gbar2).powf(p as f64 / 2.0);
            Ok(c * quarter * (rep.value - truth_val))
        }
        CenteredFlavor::JumpPowerRaw | CenteredFlavor::JumpPowerCorrected => {
            let truth_val = truth.jump_abs_power(p as f64, t).ok_or_else(|| {
                Error::InvalidParameter(
                    "jump-flavor centering requested on a continuous-truth path".into(),
                )
            })?;
            let gbar_p = continuous_norm(g, p as f64, false)?;
            let kf = pre.grid.k_n() as f64;
            let raw = match flavor {
                CenteredFlavor::JumpPowerRaw => v_stat(pre, p as f64, 0.0, t)?,
                _ => vbar_stat(pre, p, t)?,
            };
            let est = match mode {
                NormalizationMode::Asymptotic => raw / (kf * gbar_p),
                NormalizationMode::FiniteSample => raw / pre.weights.norm(p as f64),
            };
            Ok(gbar_p * quarter * (est - truth_val))
        }
        CenteredFlavor::Qv => {
            if p != 2 {
                return Err(Error::InvalidParameter(
                    "qv flavor is defined for p = 2".into(),
                ));
            }
            let truth_val = truth
                .quadratic_variation(t)
                .ok_or_else(|| Error::InvalidParameter("truth lacks quadratic variation".into()))?;
            let rep = estimate(pre, g, EstimateTarget::QuadraticVariation, t, mode, false)?;
            let gbar2 = continuous_norm(g, 2.0, false)?;
            Ok(gbar2 * quarter * (rep.value - truth_val))
        }
    }
}

/// One request of the batch evaluation API.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BatchRequest {
    pub p: f64,
    pub r: f64,
    pub t: f64,
}

/// Evaluate many (p, r, t) tuples over one shared pre-averaged series in
/// parallel.
pub fn v_stat_batch(pre: &PreaveragedSeries, requests: &[BatchRequest]) -> Vec<Result<f64>> {
    use rayon::prelude::*;
    requests
        .par_iter()
        .map(|req| v_stat(pre, req.p, req.r, req.t))
        .collect()
}
