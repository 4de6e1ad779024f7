//! Simulation of noisy Ito-semimartingale observations with full ground
//! truth, so that every limit theorem can be checked at desk scale.
//!
//! The latent path runs on a fine grid (delta / substeps) under Euler
//! stepping; integrated truth functionals are accumulated on the fine grid
//! with the left-point rule and compensated summation, then snapshotted at
//! the observation nodes. Noise is drawn per observation node conditionally
//! on the latent value.

use crate::error::{Error, Result};
use crate::estimators::{ObservedSeries, SamplingGrid, TruthSource};
use crate::kernels::{sign_power, MuBar4Coeffs, PsiMatrices, SymMatrix};
use crate::rng;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drift {
    #[default]
    None,
    Constant {
        value: f64,
    },
    /// b(x) = rate * (level - x)
    MeanReverting {
        rate: f64,
        level: f64,
    },
}

impl Drift {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Drift::None => 0.0,
            Drift::Constant { value } => *value,
            Drift::MeanReverting { rate, level } => rate * (level - x),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolModel {
    Constant {
        sigma: f64,
    },
    /// dv = kappa (vbar - v) dt + xi sqrt(v) dW2, corr(W1, W2) = leverage;
    /// full-truncation Euler (negative variance clipped in the coefficients).
    Heston {
        kappa: f64,
        vbar: f64,
        xi: f64,
        leverage: f64,
        v0: f64,
    },
    /// sigma_t = values[j] on [times[j], times[j+1]), times[0] = 0.
    PiecewiseConstant {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpModel {
    #[default]
    None,
    CompoundPoisson {
        rate: f64,
        size: JumpSizeLaw,
    },
    /// exactly one jump of a fixed size at a fixed time
    SingleJump {
        time: f64,
        size: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpSizeLaw {
    /// two-sided: random sign times |N(mean, sd^2)| magnitude
    Normal { mean: f64, sd: f64 },
    Fixed { size: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSpec {
    Constant { value: f64 },
    /// alpha_t = base + slope * sigma_t
    LinearInSigma { base: f64, slope: f64 },
}

impl AlphaSpec {
    fn eval(&self, sigma: f64) -> f64 {
        match self {
            AlphaSpec::Constant { value } => *value,
            AlphaSpec::LinearInSigma { base, slope } => base + slope * sigma,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    None,
    Gaussian {
        alpha: AlphaSpec,
    },
    /// uniform-shifted rounding at level a: Z = a floor((X + U[0,a)) / a)
    Rounding {
        level: f64,
    },
    /// Gaussian with probability `gaussian_weight`, rounding otherwise
    Mixture {
        gaussian_weight: f64,
        alpha: AlphaSpec,
        level: f64,
    },
}

/// Full generating model for one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub drift: Drift,
    pub volatility: VolModel,
    #[serde(default)]
    pub jumps: JumpModel,
    #[serde(default)]
    pub noise: NoiseModel,
    pub horizon: f64,
    #[serde(default = "default_substeps")]
    pub substeps: u32,
    /// |sigma|^p integrals accumulated as truth
    #[serde(default = "default_powers")]
    pub integrated_powers: Vec<u32>,
}

fn default_substeps() -> u32 {
    4
}

fn default_powers() -> Vec<u32> {
    vec![2, 4, 6, 8]
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        if self.substeps < 1 {
            return Err(Error::InvalidParameter("substeps must be >= 1".into()));
        }
        match &self.volatility {
            VolModel::Constant { sigma } => {
                if *sigma < 0.0 {
                    return Err(Error::InvalidParameter("sigma must be >= 0".into()));
                }
            }
            VolModel::Heston { kappa, vbar, xi, leverage, v0 } => {
                if *kappa < 0.0 || *vbar < 0.0 || *xi < 0.0 || *v0 < 0.0 {
                    return Err(Error::InvalidParameter(
                        "Heston parameters must be nonnegative".into(),
                    ));
                }
                if !(-1.0..=1.0).contains(leverage) {
                    return Err(Error::InvalidParameter(
                        "leverage must lie in [-1, 1]".into(),
                    ));
                }
            }
            VolModel::PiecewiseConstant { times, values } => {
                if times.is_empty() || times.len() != values.len() || times[0] != 0.0 {
                    return Err(Error::InvalidParameter(
                        "piecewise volatility needs times starting at 0, one per value".into(),
                    ));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter(
                        "piecewise volatility times must increase".into(),
                    ));
                }
                if values.iter().any(|v| *v < 0.0) {
                    return Err(Error::InvalidParameter("sigma must be >= 0".into()));
                }
            }
        }
        match &self.jumps {
            JumpModel::CompoundPoisson { rate, size } => {
                if *rate < 0.0 {
                    return Err(Error::InvalidParameter("jump rate must be >= 0".into()));
                }
                if let JumpSizeLaw::Normal { sd, .. } = size {
                    if *sd < 0.0 {
                        return Err(Error::InvalidParameter("jump sd must be >= 0".into()));
                    }
                }
            }
            JumpModel::SingleJump { time, .. } => {
                if !(0.0..=self.horizon).contains(time) {
                    return Err(Error::InvalidParameter(
                        "single jump time must lie in [0, horizon]".into(),
                    ));
                }
            }
            JumpModel::None => {}
        }
        match &self.noise {
            NoiseModel::Rounding { level } => {
                if !(*level > 0.0) {
                    return Err(Error::InvalidParameter(
                        "rounding level must be positive".into(),
                    ));
                }
            }
            NoiseModel::Mixture { gaussian_weight, level, .. } => {
                if !(0.0..=1.0).contains(gaussian_weight) {
                    return Err(Error::InvalidParameter(
                        "mixture weight must lie in [0, 1]".into(),
                    ));
                }
                if !(*level > 0.0) {
                    return Err(Error::InvalidParameter(
                        "rounding level must be positive".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn has_jumps(&self) -> bool {
        !matches!(self.jumps, JumpModel::None)
    }

    /// alpha_t = sqrt(beta(2)_t) given the current latent state.
    fn alpha_of(&self, sigma: f64, x: f64) -> f64 {
        match &self.noise {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { alpha } => alpha.eval(sigma),
            NoiseModel::Rounding { .. } | NoiseModel::Mixture { .. } => {
                self.noise_moments_for(x, sigma).beta2.sqrt()
            }
        }
    }

    /// Exact conditional moments of the noise given the latent value.
    pub fn noise_moments_for(&self, x: f64, sigma: f64) -> NoiseMoments {
        match &self.noise {
            NoiseModel::None => NoiseMoments::zero(),
            NoiseModel::Gaussian { alpha } => {
                let a = alpha.eval(sigma);
                NoiseMoments {
                    beta1: 0.0,
                    beta2: a * a,
                    beta3: 0.0,
                    beta4: 3.0 * a.powi(4),
                }
            }
            NoiseModel::Rounding { level } => rounding_moments(x, *level),
            NoiseModel::Mixture { gaussian_weight, alpha, level } => {
                let w = *gaussian_weight;
                let a = alpha.eval(sigma);
                let r = rounding_moments(x, *level);
                NoiseMoments {
                    beta1: 0.0,
                    beta2: w * a * a + (1.0 - w) * r.beta2,
                    beta3: (1.0 - w) * r.beta3,
                    beta4: w * 3.0 * a.powi(4) + (1.0 - w) * r.beta4,
                }
            }
        }
    }
}

/// Conditional moments of the noise at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMoments {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
}

impl NoiseMoments {
    fn zero() -> Self {
        NoiseMoments { beta1: 0.0, beta2: 0.0, beta3: 0.0, beta4: 0.0 }
    }
}

/// Two-point conditional law of the uniform-shifted rounding noise:
/// chi = a(1-f) w.p. f, chi = -a f w.p. 1-f, with f = frac(x/a).
fn rounding_moments(x: f64, a: f64) -> NoiseMoments {
    let f = (x / a).rem_euclid(1.0);
    let q = 1.0 - f;
    NoiseMoments {
        beta1: 0.0,
        beta2: a * a * f * q,
        beta3: a.powi(3) * f * q * (q - f),
        beta4: a.powi(4) * f * q * (q.powi(3) + f.powi(3)),
    }
}

/// One recorded jump with the surrounding volatility and noise levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpRecord {
    pub time: f64,
    pub size: f64,
    pub sigma_before: f64,
    pub sigma_after: f64,
    pub alpha_before: f64,
    pub alpha_after: f64,
}

/// Ground truth emitted by the simulator: node paths of sigma, alpha,
/// beta(3), the latent process, jump records, and cumulative integrated
/// functionals at every observation node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimTruth {
    pub delta: f64,
    pub has_jump_model: bool,
    pub latent: Vec<f64>,
    pub sigma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta3: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
    /// cumulative int |sigma|^p at nodes, keyed by p
    pub integrated_sigma_pow: BTreeMap<u32, Vec<f64>>,
    /// cumulative int sigma^2 at nodes (continuous part of [X,X])
    pub qv_continuous: Vec<f64>,
    pub int_sigma2_alpha2: Vec<f64>,
    pub int_alpha2: Vec<f64>,
    pub int_alpha4: Vec<f64>,
}

impl SimTruth {
    fn node_index(&self, t: f64) -> usize {
        let ratio = t / self.delta;
        let idx = (ratio + 1e-9 * ratio.max(1.0)).floor() as usize;
        idx.min(self.latent.len() - 1)
    }

    /// int_0^t mu_bar_4(g,g; theta sigma_s, alpha_s) ds from the accumulated
    /// cross integrals.
    pub fn integral_mu_bar4(&self, coeffs: &MuBar4Coeffs, theta: f64, t: f64) -> Option<f64> {
        let i = self.node_index(t);
        let s4 = self.integrated_sigma_pow.get(&4)?[i];
        Some(
            coeffs.eta4 * theta.powi(4) * s4
                + coeffs.eta2_zeta2 * theta.powi(2) * self.int_sigma2_alpha2[i]
                + coeffs.zeta4 * self.int_alpha4[i],
        )
    }

    /// Jump contribution to the conditional variance of the quadratic
    /// variation limit: 4 sum |jump|^2 (theta sigma_-^2 Psi_- +
    /// alpha_-^2/theta PsiBar_- + theta sigma_+^2 Psi_+ + alpha_+^2/theta PsiBar_+).
    pub fn qv_jump_variance(
        &self,
        psi_minus: f64,
        psi_plus: f64,
        psi_bar_minus: f64,
        psi_bar_plus: f64,
        theta: f64,
        t: f64,
    ) -> f64 {
        self.jumps
            .iter()
            .filter(|j| j.time <= t * (1.0 + 1e-12))
            .map(|j| {
                4.0 * j.size.powi(2)
                    * (theta * j.sigma_before.powi(2) * psi_minus
                        + j.alpha_before.powi(2) / theta * psi_bar_minus
                        + theta * j.sigma_after.powi(2) * psi_plus
                        + j.alpha_after.powi(2) / theta * psi_bar_plus)
            })
            .sum()
    }
}

impl TruthSource for SimTruth {
    fn integrated_sigma_power(&self, p: u32, t: f64) -> Option<f64> {
        let path = self.integrated_sigma_pow.get(&p)?;
        Some(path[self.node_index(t)])
    }

    fn jump_abs_power(&self, p: f64, t: f64) -> Option<f64> {
        if !self.has_jump_model {
            return None;
        }
        Some(
            self.jumps
                .iter()
                .filter(|j| j.time <= t * (1.0 + 1e-12))
                .map(|j| j.size.abs().powf(p))
                .sum(),
        )
    }

    fn quadratic_variation(&self, t: f64) -> Option<f64> {
        let cont = self.qv_continuous[self.node_index(t)];
        let jump: f64 = self
            .jumps
            .iter()
            .filter(|j| j.time <= t * (1.0 + 1e-12))
            .map(|j| j.size * j.size)
            .sum();
        Some(cont + jump)
    }
}

/// Neumaier compensated accumulator for the fine-grid integrals.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

struct VolState {
    model: VolModel,
    v: f64,
    sigma: f64,
}

impl VolState {
    fn new(model: &VolModel) -> Self {
        let (v, sigma) = match model {
            VolModel::Constant { sigma } => (sigma * sigma, *sigma),
            VolModel::Heston { v0, .. } => (*v0, v0.max(0.0).sqrt()),
            VolModel::PiecewiseConstant { values, .. } => {
                (values[0] * values[0], values[0])
            }
        };
        VolState { model: model.clone(), v, sigma }
    }

    /// Advance the volatility over one fine step; z1 is the Brownian draw of
    /// the price equation (for leverage correlation).
    fn step<R: Rng>(&mut self, t_next: f64, dt: f64, z1: f64, rng: &mut R) {
        match &self.model {
            VolModel::Constant { .. } => {}
            VolModel::Heston { kappa, vbar, xi, leverage, .. } => {
                let z2: f64 = StandardNormal.sample(rng);
                let dw2 = leverage * z1 + (1.0 - leverage * leverage).sqrt() * z2;
                let vplus = self.v.max(0.0);
                self.v += kappa * (vbar - vplus) * dt + xi * vplus.sqrt() * dt.sqrt() * dw2;
                self.sigma = self.v.max(0.0).sqrt();
            }
            VolModel::PiecewiseConstant { times, values } => {
                let mut idx = 0;
                for (j, &ts) in times.iter().enumerate() {
                    if ts <= t_next + 1e-15 {
                        idx = j;
                    } else {
                        break;
                    }
                }
                self.sigma = values[idx];
                self.v = self.sigma * self.sigma;
            }
        }
    }
}

/// Generate one noisy observed path plus its ground truth. Deterministic in
/// (spec, grid, seed): the latent path, jumps and noise use separate derived
/// RNG streams, so e.g. changing the noise model leaves the latent path
/// untouched.
pub fn simulate_path(
    spec: &ModelSpec,
    grid: &SamplingGrid,
    seed: u64,
) -> Result<(ObservedSeries, SimTruth)> {
    spec.validate()?;
    let n = grid.n_obs();
    let delta = grid.delta();
    if (n as f64 * delta - spec.horizon).abs() > 1e-9 * spec.horizon {
        return Err(Error::InvalidParameter(format!(
            "grid horizon {} does not match the model horizon {}",
            n as f64 * delta,
            spec.horizon
        )));
    }
    let substeps = spec.substeps as usize;
    let dt = delta / substeps as f64;
    let sqrt_dt = dt.sqrt();

    let mut path_rng = rng::stream_rng(seed, 0);
    let mut noise_rng = rng::stream_rng(seed, 1);
    let mut jump_rng = rng::stream_rng(seed, 2);

    // jump schedule drawn upfront: sorted (time, size)
    let mut schedule: Vec<(f64, f64)> = Vec::new();
    match &spec.jumps {
        JumpModel::None => {}
        JumpModel::SingleJump { time, size } => schedule.push((*time, *size)),
        JumpModel::CompoundPoisson { rate, size } => {
            if *rate > 0.0 {
                let mut t = 0.0;
                loop {
                    let u: f64 = jump_rng.gen_range(0.0f64..1.0).max(f64::MIN_POSITIVE);
                    t -= u.ln() / rate;
                    if t >= spec.horizon {
                        break;
                    }
                    let j = match size {
                        JumpSizeLaw::Fixed { size } => *size,
                        JumpSizeLaw::Normal { mean, sd } => {
                            let z: f64 = StandardNormal.sample(&mut jump_rng);
                            let sign = if jump_rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                            sign * (mean + sd * z).abs()
                        }
                    };
                    schedule.push((t, j));
                }
            }
        }
    }
    schedule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut next_jump = 0usize;

    let mut x = spec.x0;
    let mut vol = VolState::new(&spec.volatility);

    let powers = {
        let mut p = spec.integrated_powers.clone();
        if !p.contains(&2) {
            p.push(2);
        }
        if !p.contains(&4) {
            p.push(4);
        }
        p.sort_unstable();
        p.dedup();
        p
    };
    let mut builder = TruthBuilder::new(&powers, n);
    builder.snapshot(spec, x, vol.sigma);

    for _node in 0..n {
        for _sub in 0..substeps {
            let steps_done = builder.fine_steps;
            let t1 = (steps_done + 1) as f64 * dt;
            let sigma_left = vol.sigma;
            let alpha_left = spec.alpha_of(sigma_left, x);
            builder.accumulate(sigma_left, alpha_left, dt);

            let z1: f64 = StandardNormal.sample(&mut path_rng);
            x += spec.drift.eval(x) * dt + sigma_left * sqrt_dt * z1;
            vol.step(t1, dt, z1, &mut path_rng);

            // jumps arriving in (t0, t1] land on the node t1
            while next_jump < schedule.len() && schedule[next_jump].0 <= t1 + 1e-15 {
                let (_, size) = schedule[next_jump];
                x += size;
                builder.jumps.push(JumpRecord {
                    time: t1,
                    size,
                    sigma_before: sigma_left,
                    sigma_after: vol.sigma,
                    alpha_before: alpha_left,
                    alpha_after: spec.alpha_of(vol.sigma, x),
                });
                next_jump += 1;
            }
        }
        builder.snapshot(spec, x, vol.sigma);
    }

    // observation noise, drawn conditionally on the latent node values
    let mut observed = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let xv = builder.latent[i];
        let sv = builder.sigma[i];
        let chi = draw_noise(&spec.noise, xv, sv, &mut noise_rng);
        observed.push(xv + chi);
    }

    let truth = builder.finish(delta, spec.has_jumps());
    let series = ObservedSeries::new(observed, *grid)?;
    Ok((series, truth))
}

/// Running state of the fine-grid truth accumulation.
struct TruthBuilder {
    fine_steps: usize,
    powers: Vec<u32>,
    acc_sigma_pow: Vec<Kahan>,
    acc_s2a2: Kahan,
    acc_a2: Kahan,
    acc_a4: Kahan,
    idx_p2: usize,
    latent: Vec<f64>,
    sigma: Vec<f64>,
    alpha: Vec<f64>,
    beta3: Vec<f64>,
    pow_paths: Vec<Vec<f64>>,
    qv_cont: Vec<f64>,
    s2a2: Vec<f64>,
    a2: Vec<f64>,
    a4: Vec<f64>,
    jumps: Vec<JumpRecord>,
}

impl TruthBuilder {
    fn new(powers: &[u32], n: usize) -> Self {
        TruthBuilder {
            fine_steps: 0,
            powers: powers.to_vec(),
            acc_sigma_pow: vec![Kahan::default(); powers.len()],
            acc_s2a2: Kahan::default(),
            acc_a2: Kahan::default(),
            acc_a4: Kahan::default(),
            idx_p2: powers.iter().position(|&p| p == 2).expect("p=2 tracked"),
            latent: Vec::with_capacity(n + 1),
            sigma: Vec::with_capacity(n + 1),
            alpha: Vec::with_capacity(n + 1),
            beta3: Vec::with_capacity(n + 1),
            pow_paths: vec![Vec::with_capacity(n + 1); powers.len()],
            qv_cont: Vec::with_capacity(n + 1),
            s2a2: Vec::with_capacity(n + 1),
            a2: Vec::with_capacity(n + 1),
            a4: Vec::with_capacity(n + 1),
            jumps: Vec::new(),
        }
    }

    /// Left-point rule over one fine step.
    fn accumulate(&mut self, sigma: f64, alpha: f64, dt: f64) {
        self.fine_steps += 1;
        for (acc, &p) in self.acc_sigma_pow.iter_mut().zip(&self.powers) {
            acc.add(sigma.abs().powi(p as i32) * dt);
        }
        self.acc_s2a2.add(sigma * sigma * alpha * alpha * dt);
        self.acc_a2.add(alpha * alpha * dt);
        self.acc_a4.add(alpha.powi(4) * dt);
    }

    fn finish(self, delta: f64, has_jump_model: bool) -> SimTruth {
        let mut integrated_sigma_pow = BTreeMap::new();
        for (slot, &p) in self.pow_paths.iter().cloned().zip(&self.powers) {
            integrated_sigma_pow.insert(p, slot);
        }
        SimTruth {
            delta,
            has_jump_model,
            latent: self.latent,
            sigma: self.sigma,
            alpha: self.alpha,
            beta3: self.beta3,
            jumps: self.jumps,
            integrated_sigma_pow,
            qv_continuous: self.qv_cont,
            int_sigma2_alpha2: self.s2a2,
            int_alpha2: self.a2,
            int_alpha4: self.a4,
        }
    }

    fn snapshot(&mut self, spec: &ModelSpec, x: f64, sigma: f64) {
        self.latent.push(x);
        self.sigma.push(sigma);
        let alpha = spec.alpha_of(sigma, x);
        self.alpha.push(alpha);
        self.beta3.push(spec.noise_moments_for(x, sigma).beta3);
        for (slot, acc) in self.pow_paths.iter_mut().zip(&self.acc_sigma_pow) {
            slot.push(acc.value());
        }
        self.qv_cont.push(self.acc_sigma_pow[self.idx_p2].value());
        self.s2a2.push(self.acc_s2a2.value());
        self.a2.push(self.acc_a2.value());
        self.a4.push(self.acc_a4.value());
    }
}

fn draw_noise<R: Rng>(noise: &NoiseModel, x: f64, sigma: f64, rng: &mut R) -> f64 {
    match noise {
        NoiseModel::None => 0.0,
        NoiseModel::Gaussian { alpha } => {
            let z: f64 = StandardNormal.sample(rng);
            alpha.eval(sigma) * z
        }
        NoiseModel::Rounding { level } => draw_rounding(x, *level, rng),
        NoiseModel::Mixture { gaussian_weight, alpha, level } => {
            if rng.gen_bool(*gaussian_weight) {
                let z: f64 = StandardNormal.sample(rng);
                alpha.eval(sigma) * z
            } else {
                draw_rounding(x, *level, rng)
            }
        }
    }
}

/// Z = a * floor((x + U[0,a))/a); returns chi = Z - x. The observed value is
/// an exact multiple of a by construction.
fn draw_rounding<R: Rng>(x: f64, a: f64, rng: &mut R) -> f64 {
    let m = (x / a).floor();
    let f = (x / a) - m;
    let u: f64 = rng.gen_range(0.0..1.0);
    let z = if u < f { a * (m + 1.0) } else { a * m };
    z - x
}

/// One draw of the d-dimensional limit variable U(p)_t of the jump CLT:
/// per jump, four independent centered Gaussian vectors with covariances
/// Psi_{p-}, Psi_{p+}, PsiBar_{p-}, PsiBar_{p+}, combined with the left/right
/// volatility and noise levels.
pub fn sample_jump_limit(
    truth: &SimTruth,
    psi: &PsiMatrices,
    t: f64,
    theta: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !truth.has_jump_model {
        return Err(Error::InvalidParameter(
            "jump limit sampling requires a truth with jump records".into(),
        ));
    }
    let d = psi.minus.dim();
    let sq_minus = crate::kernels::psd_sqrt(&psi.minus)?;
    let sq_plus = crate::kernels::psd_sqrt(&psi.plus)?;
    let sq_bar_minus = crate::kernels::psd_sqrt(&psi.bar_minus)?;
    let sq_bar_plus = crate::kernels::psd_sqrt(&psi.bar_plus)?;
    let mut rng = rng::stream_rng(seed, 7);
    let mut out = vec![0.0; d];
    let sqrt_theta = theta.sqrt();
    let draw = |m: &SymMatrix, rng: &mut rand_chacha::ChaCha12Rng| -> Vec<f64> {
        let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        m.matvec(&z)
    };
    for j in truth.jumps.iter().filter(|j| j.time <= t * (1.0 + 1e-12)) {
        let u_minus = draw(&sq_minus, &mut rng);
        let u_plus = draw(&sq_plus, &mut rng);
        let ub_minus = draw(&sq_bar_minus, &mut rng);
        let ub_plus = draw(&sq_bar_plus, &mut rng);
        let coef = psi.p * sign_power(j.size, psi.p - 1.0);
        for i in 0..d {
            out[i] += coef
                * (sqrt_theta * j.sigma_before * u_minus[i]
                    + j.alpha_before / sqrt_theta * ub_minus[i]
                    + sqrt_theta * j.sigma_after * u_plus[i]
                    + j.alpha_after / sqrt_theta * ub_plus[i]);
        }
    }
    Ok(out)
}
