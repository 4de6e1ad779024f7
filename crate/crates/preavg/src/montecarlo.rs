//! Replication engine: runs the estimators and the inference layer over
//! simulated paths across a ladder of sampling frequencies, aggregates
//! bias / SD / RMSE / coverage / rejection tables, fits convergence-rate
//! regressions, and cross-checks the kernel constants against a direct
//! Monte Carlo discretization of the underlying Gaussian processes.

use crate::error::{Error, Result};
use crate::estimators::{
    centered_stat, estimate, preaverage, CenteredFlavor, EstimateTarget, NormalizationMode,
    PreaveragedSeries, SamplingGrid, TruthSource,
};
use crate::inference::{jump_test, qv_interval, studentized_power, QvOracle};
use crate::kernels::{
    continuous_norm, gaussian_abs_moment, solve_rho, KernelSet, WeightConfig, WeightFunction,
};
use crate::rng::{derive_seed, stream_rng};
use crate::simulate::{simulate_path, ModelSpec, SimTruth};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// One statistic evaluated on every replication.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StatisticTask {
    Estimate {
        weight: String,
        #[serde(flatten)]
        target: EstimateTarget,
    },
    StudentizedPower {
        weight: String,
        p: u32,
        level: f64,
    },
    QvInterval {
        weight: String,
        level: f64,
        oracle: bool,
    },
    JumpTest {
        g: String,
        h: String,
        p: u32,
        level: f64,
    },
    CenteredStat {
        weight: String,
        p: u32,
        flavor: CenteredFlavor,
    },
}

impl StatisticTask {
    pub fn label(&self) -> String {
        match self {
            StatisticTask::Estimate { weight, target } => {
                let t = match target {
                    EstimateTarget::JumpPower { p } => format!("jump_power[{p}]"),
                    EstimateTarget::QuadraticVariation => "qv".to_string(),
                    EstimateTarget::IntegratedPower { p } => format!("integrated_power[{p}]"),
                    EstimateTarget::MixedPower { p } => format!("mixed_power[{p}]"),
                };
                format!("estimate:{t}:{weight}")
            }
            StatisticTask::StudentizedPower { weight, p, .. } => {
                format!("studentized_power[{p}]:{weight}")
            }
            StatisticTask::QvInterval { weight, oracle, .. } => {
                let v = if *oracle { "oracle" } else { "feasible" };
                format!("qv_interval[{v}]:{weight}")
            }
            StatisticTask::JumpTest { g, h, p, .. } => format!("jump_test[{p}]:{g}/{h}"),
            StatisticTask::CenteredStat { weight, p, flavor } => {
                format!("centered[{flavor:?},{p}]:{weight}")
            }
        }
    }
}

/// A reproducible experiment: model, frequency ladder, weights, statistics,
/// replication count and master seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub model: ModelSpec,
    pub theta: f64,
    /// numbers of increments n, strictly increasing
    pub grid_ladder: Vec<usize>,
    pub weights: Vec<WeightConfig>,
    pub statistics: Vec<StatisticTask>,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub keep_raw: bool,
    #[serde(default)]
    pub normalization: NormalizationMode,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replications < 2 {
            return Err(Error::InvalidParameter(
                "need at least 2 replications".into(),
            ));
        }
        if self.grid_ladder.is_empty() {
            return Err(Error::InvalidParameter("empty grid ladder".into()));
        }
        if self.grid_ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "grid ladder must be strictly increasing".into(),
            ));
        }
        if self.statistics.is_empty() {
            return Err(Error::InvalidParameter("no statistics requested".into()));
        }
        Ok(())
    }
}

/// Per-replication outcome of one task.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TaskRow {
    pub value: f64,
    pub truth: Option<f64>,
    pub covered: Option<bool>,
    pub rejected: Option<bool>,
    pub studentized: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawRow {
    pub statistic: String,
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub row: TaskRow,
}

/// Aggregates of one (statistic, n) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub statistic: String,
    pub n: usize,
    pub replications: usize,
    pub mean: f64,
    /// mean of (value - truth); present when every replication carried truth
    pub bias: Option<f64>,
    /// sample standard deviation of the error (or of the value without truth)
    pub sd: f64,
    /// sqrt(mean squared error) against the per-replication truth
    pub rmse: Option<f64>,
    pub coverage: Option<f64>,
    pub rejection_rate: Option<f64>,
    pub mean_truth: Option<f64>,
}

/// Least-squares fit of log(RMSE) on log(n).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRegression {
    pub statistic: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureRecord {
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub cells: Vec<CellSummary>,
    pub rates: Vec<RateRegression>,
    pub failures: Vec<FailureRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<Vec<RawRow>>,
}

impl ExperimentSummary {
    pub fn cell(&self, statistic: &str, n: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.statistic == statistic && c.n == n)
    }

    pub fn rate(&self, statistic: &str) -> Option<&RateRegression> {
        self.rates.iter().find(|r| r.statistic == statistic)
    }

    /// Flat CSV dump of the retained per-replication rows (empty when the
    /// plan did not keep them).
    pub fn raw_csv(&self) -> String {
        let mut out =
            String::from("statistic,n,replication,seed,value,truth,covered,rejected,studentized\n");
        let fmt_f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let fmt_b = |v: Option<bool>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in self.raw.iter().flatten() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                row.statistic,
                row.n,
                row.replication,
                row.seed,
                row.row.value,
                fmt_f(row.row.truth),
                fmt_b(row.row.covered),
                fmt_b(row.row.rejected),
                fmt_f(row.row.studentized),
            ));
        }
        out
    }

    /// Flat CSV rendering of the cell table.
    pub fn cells_csv(&self) -> String {
        let mut out = String::from(
            "statistic,n,replications,mean,bias,sd,rmse,coverage,rejection_rate,mean_truth\n",
        );
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                c.statistic,
                c.n,
                c.replications,
                c.mean,
                fmt(c.bias),
                c.sd,
                fmt(c.rmse),
                fmt(c.coverage),
                fmt(c.rejection_rate),
                fmt(c.mean_truth),
            ));
        }
        out
    }
}

/// Kernel constants shared by all replications of one plan.
struct PlanContext {
    weights: Vec<(String, WeightFunction)>,
    /// per weight name: oracle inputs for the qv interval
    qv_oracle: HashMap<String, (crate::kernels::MuBar4Coeffs, crate::kernels::PsiMatrices)>,
}

impl PlanContext {
    fn build(plan: &ExperimentPlan) -> Result<Self> {
        let mut weights = Vec::new();
        for cfg in &plan.weights {
            let w = cfg.build()?;
            weights.push((w.name().to_string(), w));
        }
        let find = |name: &str| -> Result<&WeightFunction> {
            weights
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, w)| w)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "statistic references weight '{name}' not in the plan's weight list"
                    ))
                })
        };
        let mut qv_oracle = HashMap::new();
        for task in &plan.statistics {
            match task {
                StatisticTask::Estimate { weight, .. }
                | StatisticTask::StudentizedPower { weight, .. }
                | StatisticTask::CenteredStat { weight, .. } => {
                    find(weight)?;
                }
                StatisticTask::JumpTest { g, h, .. } => {
                    find(g)?;
                    find(h)?;
                }
                StatisticTask::QvInterval { weight, oracle, .. } => {
                    let w = find(weight)?;
                    if *oracle && !qv_oracle.contains_key(weight) {
                        let ks = KernelSet::single(w.clone())?;
                        qv_oracle.insert(
                            weight.clone(),
                            (ks.mu_bar4_coeffs(0)?, ks.psi_matrices(2.0)?),
                        );
                    }
                }
            }
        }
        Ok(PlanContext { weights, qv_oracle })
    }

    fn weight(&self, name: &str) -> &WeightFunction {
        &self
            .weights
            .iter()
            .find(|(n, _)| n == name)
            .expect("validated")
            .1
    }
}

/// Truth of a mixed-power target from the stored integrals (p = 2 or 4; other
/// powers have no stored closed form).
fn mixed_power_truth(
    truth: &SimTruth,
    g: &WeightFunction,
    p: f64,
    theta: f64,
    t: f64,
) -> Option<f64> {
    let gbar2 = continuous_norm(g, 2.0, false).ok()?;
    let gd2 = continuous_norm(g, 2.0, true).ok()?;
    let i = ((t / truth.delta) + 1e-9).floor() as usize;
    let i = i.min(truth.qv_continuous.len() - 1);
    let s2 = truth.qv_continuous[i];
    let a2 = truth.int_alpha2[i];
    if (p - 2.0).abs() < 1e-12 {
        Some(theta * gbar2 * s2 + gd2 / theta * a2)
    } else if (p - 4.0).abs() < 1e-12 {
        let s4 = truth.integrated_sigma_pow.get(&4)?[i];
        let s2a2 = truth.int_sigma2_alpha2[i];
        let a4 = truth.int_alpha4[i];
        Some(
            3.0 * ((theta * gbar2).powi(2) * s4
                + 2.0 * gbar2 * gd2 * s2a2
                + (gd2 / theta).powi(2) * a4),
        )
    } else {
        None
    }
}

fn run_tasks(
    plan: &ExperimentPlan,
    ctx: &PlanContext,
    grid: &SamplingGrid,
    seed: u64,
) -> Result<Vec<TaskRow>> {
    let t = plan.model.horizon;
    let (series, truth) = simulate_path(&plan.model, grid, seed)?;
    let mode = plan.normalization;

    // shared pre-averaged arrays per weight
    let mut pre: HashMap<&str, PreaveragedSeries> = HashMap::new();
    for (name, w) in &ctx.weights {
        pre.insert(name.as_str(), preaverage(&series, w)?);
    }

    let mut rows = Vec::with_capacity(plan.statistics.len());
    for task in &plan.statistics {
        let row = match task {
            StatisticTask::Estimate { weight, target } => {
                let w = ctx.weight(weight);
                let rep = estimate(&pre[weight.as_str()], w, *target, t, mode, false)?;
                let truth_val = match target {
                    EstimateTarget::JumpPower { p } => truth.jump_abs_power(*p, t),
                    EstimateTarget::QuadraticVariation => truth.quadratic_variation(t),
                    EstimateTarget::IntegratedPower { p } => {
                        truth.integrated_sigma_power(*p, t)
                    }
                    EstimateTarget::MixedPower { p } => {
                        mixed_power_truth(&truth, w, *p, grid.theta(), t)
                    }
                };
                TaskRow {
                    value: rep.value,
                    truth: truth_val,
                    covered: None,
                    rejected: None,
                    studentized: None,
                }
            }
            StatisticTask::StudentizedPower { weight, p, level } => {
                let w = ctx.weight(weight);
                let truth_val = truth.integrated_sigma_power(*p, t);
                let res = studentized_power(
                    &pre[weight.as_str()],
                    w,
                    *p,
                    t,
                    *level,
                    truth_val,
                    mode,
                )?;
                TaskRow {
                    value: res.estimate,
                    truth: truth_val,
                    covered: truth_val.and_then(|tv| res.covers(tv)),
                    rejected: None,
                    studentized: res.studentized,
                }
            }
            StatisticTask::QvInterval { weight, level, oracle } => {
                let w = ctx.weight(weight);
                let truth_val = truth.quadratic_variation(t);
                let oracle_inputs = if *oracle {
                    let (coeffs, psi) = &ctx.qv_oracle[weight];
                    Some(QvOracle { truth: &truth, coeffs, psi })
                } else {
                    None
                };
                let res = qv_interval(&pre[weight.as_str()], w, t, *level, oracle_inputs, mode)?;
                TaskRow {
                    value: res.estimate,
                    truth: truth_val,
                    covered: truth_val.and_then(|tv| res.covers(tv)),
                    rejected: None,
                    studentized: None,
                }
            }
            StatisticTask::JumpTest { g, h, p, level } => {
                let wg = ctx.weight(g);
                let wh = ctx.weight(h);
                let res = jump_test(
                    &pre[g.as_str()],
                    wg,
                    &pre[h.as_str()],
                    wh,
                    *p,
                    t,
                    *level,
                    mode,
                )?;
                TaskRow {
                    value: res.estimate,
                    truth: None,
                    covered: None,
                    rejected: res.reject,
                    studentized: res.studentized,
                }
            }
            StatisticTask::CenteredStat { weight, p, flavor } => {
                let w = ctx.weight(weight);
                let v = centered_stat(&pre[weight.as_str()], &truth, w, *p, *flavor, t, mode)?;
                TaskRow {
                    value: v,
                    truth: Some(0.0),
                    covered: None,
                    rejected: None,
                    studentized: None,
                }
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Per-replication results for one ladder point, in replication order.
type LadderOutcomes = (usize, Vec<std::result::Result<Vec<TaskRow>, String>>, Vec<u64>);

/// Run the full experiment: R replications per ladder point, deterministic
/// under the master seed regardless of execution order.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentSummary> {
    plan.validate()?;
    let ctx = PlanContext::build(plan)?;

    let mut all_outcomes: Vec<LadderOutcomes> = Vec::new();
    for (ni, &n) in plan.grid_ladder.iter().enumerate() {
        let grid = SamplingGrid::from_count(n, plan.model.horizon, plan.theta)?;
        let seeds: Vec<u64> = (0..plan.replications)
            .map(|r| derive_seed(plan.master_seed, ((ni as u64) << 40) | r as u64))
            .collect();
        let outcomes: Vec<std::result::Result<Vec<TaskRow>, String>> = seeds
            .par_iter()
            .map(|&seed| run_tasks(plan, &ctx, &grid, seed).map_err(|e| e.to_string()))
            .collect();
        all_outcomes.push((n, outcomes, seeds));
    }
    Ok(aggregate(plan, all_outcomes))
}

fn aggregate(plan: &ExperimentPlan, all_outcomes: Vec<LadderOutcomes>) -> ExperimentSummary {
    let labels: Vec<String> = plan.statistics.iter().map(|t| t.label()).collect();
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    let mut raw = plan.keep_raw.then(Vec::new);

    for (n, outcomes, seeds) in &all_outcomes {
        // collect successful rows per task, in replication order
        let mut per_task: Vec<Vec<TaskRow>> = vec![Vec::new(); labels.len()];
        for (rep, outcome) in outcomes.iter().enumerate() {
            match outcome {
                Ok(rows) => {
                    for (ti, row) in rows.iter().enumerate() {
                        per_task[ti].push(*row);
                        if let Some(store) = raw.as_mut() {
                            store.push(RawRow {
                                statistic: labels[ti].clone(),
                                n: *n,
                                replication: rep,
                                seed: seeds[rep],
                                row: *row,
                            });
                        }
                    }
                }
                Err(msg) => failures.push(FailureRecord {
                    n: *n,
                    replication: rep,
                    seed: seeds[rep],
                    message: msg.clone(),
                }),
            }
        }
        for (ti, rows) in per_task.iter().enumerate() {
            if rows.is_empty() {
                continue;
            }
            cells.push(summarize_cell(&labels[ti], *n, rows));
        }
    }

    // rate regressions on RMSE over the ladder
    let mut rates = Vec::new();
    for label in &labels {
        let pts: Vec<(f64, f64)> = cells
            .iter()
            .filter(|c| &c.statistic == label)
            .filter_map(|c| c.rmse.map(|r| (c.n as f64, r)))
            .filter(|(_, r)| *r > 0.0)
            .collect();
        if pts.len() >= 2 {
            let (slope, intercept, r2) = log_log_regression(&pts);
            rates.push(RateRegression {
                statistic: label.clone(),
                slope,
                intercept,
                r_squared: r2,
            });
        }
    }

    ExperimentSummary { cells, rates, failures, raw }
}

fn summarize_cell(label: &str, n: usize, rows: &[TaskRow]) -> CellSummary {
    let r = rows.len() as f64;
    let mean = rows.iter().map(|x| x.value).sum::<f64>() / r;
    let have_truth = rows.iter().all(|x| x.truth.is_some());
    let (bias, rmse, sd, mean_truth) = if have_truth {
        let errs: Vec<f64> = rows.iter().map(|x| x.value - x.truth.unwrap()).collect();
        let b = errs.iter().sum::<f64>() / r;
        let mse = errs.iter().map(|e| e * e).sum::<f64>() / r;
        let var = if rows.len() > 1 {
            errs.iter().map(|e| (e - b) * (e - b)).sum::<f64>() / (r - 1.0)
        } else {
            0.0
        };
        let mt = rows.iter().map(|x| x.truth.unwrap()).sum::<f64>() / r;
        (Some(b), Some(mse.sqrt()), var.sqrt(), Some(mt))
    } else {
        let var = if rows.len() > 1 {
            rows.iter().map(|x| (x.value - mean) * (x.value - mean)).sum::<f64>() / (r - 1.0)
        } else {
            0.0
        };
        (None, None, var.sqrt(), None)
    };
    let coverage = {
        let flagged: Vec<bool> = rows.iter().filter_map(|x| x.covered).collect();
        (!flagged.is_empty())
            .then(|| flagged.iter().filter(|c| **c).count() as f64 / flagged.len() as f64)
    };
    let rejection_rate = {
        let flagged: Vec<bool> = rows.iter().filter_map(|x| x.rejected).collect();
        (!flagged.is_empty())
            .then(|| flagged.iter().filter(|c| **c).count() as f64 / flagged.len() as f64)
    };
    CellSummary {
        statistic: label.to_string(),
        n,
        replications: rows.len(),
        mean,
        bias,
        sd,
        rmse,
        coverage,
        rejection_rate,
        mean_truth,
    }
}

fn log_log_regression(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, y)| y.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// What the kernel Monte Carlo oracle estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelOracleTarget {
    /// E[(eta L(g)_0)^2] = eta^2 gbar(2)
    MarginalVariance,
    /// the lagged joint moment m_{p,q}(g,h; eta, zeta)
    Mpq { p: u32, q: u32 },
    /// mu_bar_{2p}(g,h; eta, zeta)
    MuBar2p { p: u32 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelMcEstimate {
    pub value: f64,
    pub std_error: f64,
    pub replications: usize,
}

/// Direct discretization of the moving-average Gaussian processes
/// L(g)_t = int g(s-t) dW1_s and L'(g)_t = int g'(s-t) dW2_s on a step grid,
/// sharing the two white noises between g and h, followed by the time
/// integral over t in [0, 2]. Serves as the independent statistical oracle
/// for the quadrature kernels.
pub fn kernel_mc_oracle(
    g: &WeightFunction,
    h: &WeightFunction,
    target: KernelOracleTarget,
    eta: f64,
    zeta: f64,
    grid_step: f64,
    replications: usize,
    seed: u64,
) -> Result<KernelMcEstimate> {
    if !(grid_step <= 1.0 / 500.0 && grid_step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid step must lie in (0, 1/500], got {grid_step}"
        )));
    }
    let inv = 1.0 / grid_step;
    if (inv - inv.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "grid step must be the reciprocal of an integer".into(),
        ));
    }
    if replications < 2 {
        return Err(Error::InvalidParameter("need at least 2 replications".into()));
    }
    let len = inv.round() as usize; // samples per unit interval
    let n_inc = 3 * len; // white noise support [0, 3]
    let j_one = len; // index of t = 1

    // midpoint-sampled kernel tables
    let table = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        (0..len).map(|l| f((l as f64 + 0.5) * grid_step)).collect()
    };
    let g_tab = table(&|x| g.eval(x));
    let gd_tab = table(&|x| g.deriv(x));
    let h_tab = table(&|x| h.eval(x));
    let hd_tab = table(&|x| h.deriv(x));

    // t-grid stride for the outer time integral: the integrand is smooth in
    // t, so a resolution of ~1/32 keeps the trapezoid bias far below the
    // Monte Carlo error; power-of-two strides keep the node set aligned.
    let mut stride = 1usize;
    while stride * 2 <= len / 32 && (2 * len) % (stride * 2) == 0 {
        stride *= 2;
    }
    let m_t = 2 * len / stride; // nodes at j*stride*grid_step for j=0..=m_t
    let h_t = stride as f64 * grid_step;

    if let KernelOracleTarget::MuBar2p { p } = target {
        if p < 2 || p % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "mu_bar requires even p >= 2, got {p}"
            )));
        }
    }

    let gbar2_d = continuous_norm(g, 2.0, true)?;
    let hbar2_d = continuous_norm(h, 2.0, true)?;
    let gbar2 = continuous_norm(g, 2.0, false)?;
    let hbar2 = continuous_norm(h, 2.0, false)?;

    let per_rep = |rep: usize| -> f64 {
        let mut rng = stream_rng(seed, rep as u64);
        let sq = grid_step.sqrt();
        let mut w1 = vec![0.0f64; n_inc];
        let mut w2 = vec![0.0f64; n_inc];
        for v in w1.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = sq * z;
        }
        for v in w2.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = sq * z;
        }
        let conv = |tab: &[f64], w: &[f64], j: usize| -> f64 {
            tab.iter().zip(&w[j..j + len]).map(|(a, b)| a * b).sum()
        };
        match target {
            KernelOracleTarget::MarginalVariance => {
                let l0 = conv(&g_tab, &w1, 0);
                (eta * l0).powi(2)
            }
            KernelOracleTarget::Mpq { p, q } => {
                let xg = eta * conv(&g_tab, &w1, j_one) + zeta * conv(&gd_tab, &w2, j_one);
                let a = xg.powi(p as i32);
                // trapezoid over t in [0, 2]
                let mut integral = 0.0;
                for j in 0..=m_t {
                    let off = j * stride;
                    let yh = eta * conv(&h_tab, &w1, off) + zeta * conv(&hd_tab, &w2, off);
                    let weight = if j == 0 || j == m_t { 0.5 } else { 1.0 };
                    integral += weight * yh.powi(q as i32);
                }
                a * integral * h_t
            }
            KernelOracleTarget::MuBar2p { p } => {
                let rho = solve_rho(p).expect("validated");
                let half = (p / 2) as usize;
                let xg = eta * conv(&g_tab, &w1, j_one) + zeta * conv(&gd_tab, &w2, j_one);
                // time integrals of (eta L(h)_t + zeta L'(h)_t)^{p-2r'} for all r'
                let mut t_int = vec![0.0f64; half + 1];
                for j in 0..=m_t {
                    let off = j * stride;
                    let yh = eta * conv(&h_tab, &w1, off) + zeta * conv(&hd_tab, &w2, off);
                    let weight = if j == 0 || j == m_t { 0.5 } else { 1.0 };
                    for (rp, slot) in t_int.iter_mut().enumerate() {
                        *slot += weight * yh.powi((p - 2 * rp as u32) as i32);
                    }
                }
                for slot in t_int.iter_mut() {
                    *slot *= h_t;
                }
                let zg = 2.0 * zeta * zeta * gbar2_d;
                let zh = 2.0 * zeta * zeta * hbar2_d;
                let mut acc = 0.0;
                for r in 0..=half {
                    let fr = if r == 0 { 1.0 } else { zg.powi(r as i32) };
                    let ar = xg.powi((p - 2 * r as u32) as i32);
                    for rp in 0..=half {
                        let frp = if rp == 0 { 1.0 } else { zh.powi(rp as i32) };
                        acc += rho.value(r) * rho.value(rp) * fr * frp * ar * t_int[rp];
                    }
                }
                // subtract the exact product 2 mu_p(g) mu_p(h)
                let m_p = gaussian_abs_moment(p as f64);
                let mu_prod = m_p * eta.powi(p as i32) * gbar2.powf(p as f64 / 2.0)
                    * m_p
                    * eta.powi(p as i32)
                    * hbar2.powf(p as f64 / 2.0);
                acc - 2.0 * mu_prod
            }
        }
    };

    let values: Vec<f64> = (0..replications).into_par_iter().map(per_rep).collect();
    let r = replications as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
    Ok(KernelMcEstimate {
        value: mean,
        std_error: (var / r).sqrt(),
        replications,
    })
}
