//! Monte Carlo checks of the distributional claims that the unit tests
//! cannot see: bias cancellation on pure noise, the symmetry of the M-limit,
//! consistency of the mixed-power normalization and of the feasible
//! variance estimator. Moderate replication counts, fixed seeds.

use preavg::estimators::{
    estimate, m_stat, preaverage, vbar_stat, EstimateTarget, NormalizationMode, SamplingGrid,
};
use preavg::kernels::{by_name, continuous_norm, KernelSet};
use preavg::simulate::{
    simulate_path, AlphaSpec, Drift, JumpModel, ModelSpec, NoiseModel, VolModel,
};
use rayon::prelude::*;

fn noise_only_model(alpha: f64) -> ModelSpec {
    ModelSpec {
        x0: 0.0,
        drift: Drift::None,
        volatility: VolModel::Constant { sigma: 0.0 },
        jumps: JumpModel::None,
        noise: NoiseModel::Gaussian {
            alpha: AlphaSpec::Constant { value: alpha },
        },
        horizon: 1.0,
        substeps: 1,
        integrated_powers: vec![2, 4],
    }
}

fn bm_noise_model(sigma: f64, alpha: f64) -> ModelSpec {
    ModelSpec {
        volatility: VolModel::Constant { sigma },
        ..noise_only_model(alpha)
    }
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn vbar_cancels_noise_bias_on_pure_noise() {
    // X = 0, iid Gaussian noise. For p = 2 the rho correction cancels the
    // noise in expectation exactly; for p = 4 an O(alpha^4 / k_n^3) per-window
    // remainder survives at finite n, so the scaled statistic is checked to
    // vanish along the frequency ladder instead.
    let g = by_name("triangle").unwrap();
    let spec = noise_only_model(0.01);

    // exact cancellation at p = 2
    let grid = SamplingGrid::from_count(4096, 1.0, 1.0).unwrap();
    let vals: Vec<f64> = (0..500u64)
        .into_par_iter()
        .map(|r| {
            let (series, _t) = simulate_path(&spec, &grid, 40_000 + r).unwrap();
            let pre = preaverage(&series, &g).unwrap();
            grid.delta().powf(0.5) * vbar_stat(&pre, 2, 1.0).unwrap()
        })
        .collect();
    let (mean, se) = mean_se(&vals);
    assert!(
        mean.abs() <= 3.0 * se,
        "p=2: noise bias not cancelled: mean {mean:.3e}, SE {se:.3e}"
    );

    // p = 4: the scaled mean decays roughly like delta^{1/2}
    let mut means = Vec::new();
    for n in [1024usize, 4096, 16384] {
        let grid = SamplingGrid::from_count(n, 1.0, 1.0).unwrap();
        let vals: Vec<f64> = (0..500u64)
            .into_par_iter()
            .map(|r| {
                let (series, _t) = simulate_path(&spec, &grid, 40_500 + r).unwrap();
                let pre = preaverage(&series, &g).unwrap();
                vbar_stat(&pre, 4, 1.0).unwrap()
            })
            .collect();
        means.push(mean_se(&vals).0.abs());
    }
    assert!(
        means[2] < means[1] && means[1] < means[0],
        "p=4: scaled noise mean must decay along the ladder: {means:?}"
    );
    assert!(
        means[2] < means[0] / 2.5,
        "p=4: decay slower than expected: {means:?}"
    );
}

#[test]
fn m_limit_is_symmetric_in_the_weights() {
    // Delta^{1-p/2} M(Z,g,h;p) and M(Z,h,g;p) share the limit although the
    // statistic is not symmetric; their means differ within MC error.
    let g = by_name("triangle").unwrap();
    let h = by_name("sine").unwrap();
    let spec = bm_noise_model(0.2, 0.005);
    let n = 4096;
    let grid = SamplingGrid::from_count(n, 1.0, 1.0).unwrap();
    let diffs: Vec<f64> = (0..300u64)
        .into_par_iter()
        .map(|r| {
            let (series, _t) = simulate_path(&spec, &grid, 41_000 + r).unwrap();
            let pre_g = preaverage(&series, &g).unwrap();
            let pre_h = preaverage(&series, &h).unwrap();
            let m_gh = m_stat(&pre_g, &pre_h, 2, 1.0).unwrap();
            let m_hg = m_stat(&pre_h, &pre_g, 2, 1.0).unwrap();
            m_gh - m_hg
        })
        .collect();
    let (mean, se) = mean_se(&diffs);
    assert!(
        mean.abs() <= 3.0 * se,
        "asymmetry beyond MC error: mean diff {mean:.3e}, SE {se:.3e}"
    );
}

#[test]
fn mixed_power_estimate_converges_to_its_target() {
    // Constant sigma and alpha: the mixed-power limit
    // m_p (theta gbar(2) sigma^2 + gbar'(2) alpha^2 / theta)^{p/2} t
    // is available in closed form.
    let g = by_name("triangle").unwrap();
    let (sigma, alpha) = (0.2f64, 0.01f64);
    let spec = bm_noise_model(sigma, alpha);
    let gbar2 = continuous_norm(&g, 2.0, false).unwrap();
    let gd2 = continuous_norm(&g, 2.0, true).unwrap();
    for p in [2u32, 4] {
        let m_p = preavg::kernels::gaussian_abs_moment(p as f64);
        let mut errs = Vec::new();
        for n in [1600usize, 6400] {
            let grid = SamplingGrid::from_count(n, 1.0, 1.0).unwrap();
            let theta = grid.theta_realized();
            let truth = m_p
                * (theta * gbar2 * sigma * sigma + gd2 * alpha * alpha / theta)
                    .powf(p as f64 / 2.0);
            let vals: Vec<f64> = (0..400u64)
                .into_par_iter()
                .map(|r| {
                    let (series, _t) = simulate_path(&spec, &grid, 42_000 + r).unwrap();
                    let pre = preaverage(&series, &g).unwrap();
                    estimate(
                        &pre,
                        &g,
                        EstimateTarget::MixedPower { p: p as f64 },
                        1.0,
                        NormalizationMode::FiniteSample,
                        false,
                    )
                    .unwrap()
                    .value
                })
                .collect();
            let (mean, se) = mean_se(&vals);
            errs.push(((mean - truth).abs(), se, truth));
        }
        // error shrinks with n and is within MC resolution at the finer grid
        let (err_fine, se_fine, truth) = errs[1];
        assert!(
            err_fine <= (3.0 * se_fine).max(0.02 * truth),
            "p={p}: mixed-power estimate off target: err {err_fine:.3e}, SE {se_fine:.3e}, truth {truth:.3e}"
        );
        assert!(
            errs[1].0 < errs[0].0 + 3.0 * (errs[0].1 + errs[1].1),
            "p={p}: error not shrinking: {errs:?}"
        );
    }
}

#[test]
fn feasible_variance_estimator_is_consistent() {
    // On constant-parameter paths, theta Delta^{1-p/2} M(Z,g,g;p) converges
    // to theta^{1-p} int mu_bar_{2p}(g,g; theta sigma, alpha) ds; the MC mean
    // lands within a few SE of the kernel value.
    let g = by_name("triangle").unwrap();
    let ks = KernelSet::single(g.clone()).unwrap();
    let (sigma, alpha) = (0.2f64, 0.005f64);
    let spec = bm_noise_model(sigma, alpha);
    let n = 6400;
    let grid = SamplingGrid::from_count(n, 1.0, 1.0).unwrap();
    let theta = grid.theta_realized();
    for p in [2u32, 4] {
        let target = theta.powf(1.0 - p as f64)
            * ks.mu_kernels(0, 0, p, theta * sigma, alpha).unwrap().mu_bar_2p;
        let vals: Vec<f64> = (0..400u64)
            .into_par_iter()
            .map(|r| {
                let (series, _t) = simulate_path(&spec, &grid, 43_000 + r).unwrap();
                let pre = preaverage(&series, &g).unwrap();
                let m = m_stat(&pre, &pre, p, 1.0).unwrap();
                theta * grid.delta().powf(1.0 - p as f64 / 2.0) * m
            })
            .collect();
        let (mean, se) = mean_se(&vals);
        assert!(
            (mean - target).abs() <= 3.0 * se + 0.05 * target,
            "p={p}: feasible variance off kernel target: mean {mean:.4e}, target {target:.4e}, SE {se:.2e}"
        );
    }
}

#[test]
fn zero_noise_constant_sigma_variance_sanity() {
    // spec sanity: with alpha = 0, the variance estimator matches
    // theta^{1-p} t mu_bar_{2p}(g,g; theta sigma, 0).
    let g = by_name("triangle").unwrap();
    let ks = KernelSet::single(g.clone()).unwrap();
    let sigma = 0.25f64;
    let spec = bm_noise_model(sigma, 0.0);
    let n = 6400;
    let grid = SamplingGrid::from_count(n, 1.0, 1.0).unwrap();
    let theta = grid.theta_realized();
    let p = 4u32;
    let target = theta.powf(1.0 - p as f64)
        * ks.mu_kernels(0, 0, p, theta * sigma, 0.0).unwrap().mu_bar_2p;
    let vals: Vec<f64> = (0..400u64)
        .into_par_iter()
        .map(|r| {
            let (series, _t) = simulate_path(&spec, &grid, 44_000 + r).unwrap();
            let pre = preaverage(&series, &g).unwrap();
            let m = m_stat(&pre, &pre, p, 1.0).unwrap();
            theta * grid.delta().powf(1.0 - p as f64 / 2.0) * m
        })
        .collect();
    let (mean, se) = mean_se(&vals);
    assert!(
        (mean - target).abs() <= 3.0 * se + 0.05 * target,
        "zero-noise variance sanity failed: mean {mean:.4e}, target {target:.4e}, SE {se:.2e}"
    );
}

#[test]
fn centered_stat_flat_path_is_exactly_zero() {
    // sigma = 0, no jumps, no noise: statistic and centering both vanish
    use preavg::estimators::{centered_stat, CenteredFlavor};
    let g = by_name("triangle").unwrap();
    let spec = ModelSpec {
        volatility: VolModel::Constant { sigma: 0.0 },
        ..noise_only_model(0.0)
    };
    let spec = ModelSpec { noise: NoiseModel::None, ..spec };
    let grid = SamplingGrid::from_count(512, 1.0, 1.0).unwrap();
    let (series, truth) = simulate_path(&spec, &grid, 1).unwrap();
    let pre = preaverage(&series, &g).unwrap();
    for mode in [NormalizationMode::Asymptotic, NormalizationMode::FiniteSample] {
        let v = centered_stat(&pre, &truth, &g, 4, CenteredFlavor::ContinuousPower, 1.0, mode)
            .unwrap();
        assert_eq!(v, 0.0);
    }
}

#[test]
fn centered_qv_matches_its_defining_formula() {
    // qv flavor in asymptotic mode is delta^{-1/4}((1/k) Vbar(2) - gbar(2) [X,X])
    use preavg::estimators::{centered_stat, CenteredFlavor, TruthSource};
    let g = by_name("triangle").unwrap();
    let spec = bm_noise_model(0.2, 0.005);
    let grid = SamplingGrid::from_count(1600, 1.0, 1.0).unwrap();
    let (series, truth) = simulate_path(&spec, &grid, 9).unwrap();
    let pre = preaverage(&series, &g).unwrap();
    let via_api = centered_stat(
        &pre,
        &truth,
        &g,
        2,
        CenteredFlavor::Qv,
        1.0,
        NormalizationMode::Asymptotic,
    )
    .unwrap();
    let gbar2 = continuous_norm(&g, 2.0, false).unwrap();
    let direct = grid.delta().powf(-0.25)
        * (vbar_stat(&pre, 2, 1.0).unwrap() / grid.k_n() as f64
            - gbar2 * truth.quadratic_variation(1.0).unwrap());
    assert!(
        (via_api - direct).abs() <= 1e-12 * direct.abs().max(1e-12),
        "{via_api} vs {direct}"
    );
}

#[test]
fn centered_statistics_fluctuate_around_zero() {
    // CLT centering: the sample mean of the centered statistic vanishes
    // within MC error for the continuous-power and qv flavors.
    use preavg::estimators::{centered_stat, CenteredFlavor};
    let g = by_name("triangle").unwrap();
    let spec = bm_noise_model(0.2, 0.005);
    let n = 6400;
    let grid = SamplingGrid::from_count(n, 1.0, 1.0).unwrap();
    for (flavor, p) in [
        (CenteredFlavor::ContinuousPower, 4u32),
        (CenteredFlavor::Qv, 2u32),
    ] {
        let vals: Vec<f64> = (0..600u64)
            .into_par_iter()
            .map(|r| {
                let (series, truth) = simulate_path(&spec, &grid, 45_000 + r).unwrap();
                let pre = preaverage(&series, &g).unwrap();
                centered_stat(
                    &pre,
                    &truth,
                    &g,
                    p,
                    flavor,
                    1.0,
                    NormalizationMode::FiniteSample,
                )
                .unwrap()
            })
            .collect();
        let (mean, se) = mean_se(&vals);
        assert!(
            mean.abs() <= 3.5 * se,
            "{flavor:?}: centered statistic drifts: mean {mean:.3e}, SE {se:.3e}"
        );
    }
}

#[test]
fn replication_batches_over_disjoint_seed_ranges_agree() {
    // independence across the splittable seed scheme: batch means from
    // disjoint master seeds differ within Monte Carlo error.
    use preavg::kernels::WeightConfig;
    use preavg::montecarlo::{run_experiment, ExperimentPlan, StatisticTask};
    let mk_plan = |master: u64| ExperimentPlan {
        model: bm_noise_model(0.2, 0.005),
        theta: 1.0,
        grid_ladder: vec![1600],
        weights: vec![WeightConfig::Named("triangle".into())],
        statistics: vec![StatisticTask::Estimate {
            weight: "triangle".into(),
            target: preavg::estimators::EstimateTarget::QuadraticVariation,
        }],
        replications: 250,
        master_seed: master,
        keep_raw: false,
        normalization: NormalizationMode::FiniteSample,
    };
    let a = run_experiment(&mk_plan(1)).unwrap();
    let b = run_experiment(&mk_plan(2_000_000)).unwrap();
    let ca = a.cell("estimate:qv:triangle", 1600).unwrap();
    let cb = b.cell("estimate:qv:triangle", 1600).unwrap();
    let se = ((ca.sd * ca.sd + cb.sd * cb.sd) / 250.0).sqrt();
    assert!(
        (ca.mean - cb.mean).abs() <= 4.0 * se,
        "batch means {:.5e} vs {:.5e} differ beyond 4 SE {:.2e}",
        ca.mean,
        cb.mean,
        se
    );
}

#[test]
fn summary_recomputable_from_raw_rows() {
    use preavg::kernels::WeightConfig;
    use preavg::montecarlo::{run_experiment, ExperimentPlan, StatisticTask};
    let plan = ExperimentPlan {
        model: bm_noise_model(0.2, 0.005),
        theta: 1.0,
        grid_ladder: vec![800],
        weights: vec![WeightConfig::Named("triangle".into())],
        statistics: vec![StatisticTask::StudentizedPower {
            weight: "triangle".into(),
            p: 4,
            level: 0.95,
        }],
        replications: 50,
        master_seed: 77,
        keep_raw: true,
        normalization: NormalizationMode::FiniteSample,
    };
    let summary = run_experiment(&plan).unwrap();
    let cell = summary.cell("studentized_power[4]:triangle", 800).unwrap();
    let raw = summary.raw.as_ref().unwrap();
    assert_eq!(raw.len(), 50);

    let r = raw.len() as f64;
    let mean = raw.iter().map(|row| row.row.value).sum::<f64>() / r;
    assert_eq!(mean.to_bits(), cell.mean.to_bits(), "mean not reproducible");
    let errs: Vec<f64> = raw
        .iter()
        .map(|row| row.row.value - row.row.truth.unwrap())
        .collect();
    let bias = errs.iter().sum::<f64>() / r;
    let rmse = (errs.iter().map(|e| e * e).sum::<f64>() / r).sqrt();
    assert_eq!(bias.to_bits(), cell.bias.unwrap().to_bits());
    assert_eq!(rmse.to_bits(), cell.rmse.unwrap().to_bits());
    let covered = raw
        .iter()
        .filter(|row| row.row.covered == Some(true))
        .count() as f64
        / raw.iter().filter(|row| row.row.covered.is_some()).count() as f64;
    assert_eq!(covered.to_bits(), cell.coverage.unwrap().to_bits());
}

#[test]
fn qv_estimate_converges_through_the_ladder() {
    // light version of the consistency suite: Brownian + noise, the QV
    // estimate approaches 0.04 with shrinking RMSE.
    let g = by_name("triangle").unwrap();
    let spec = bm_noise_model(0.2, 0.005);
    let mut rmse_prev = f64::INFINITY;
    for n in [400usize, 1600, 6400] {
        let grid = SamplingGrid::from_count(n, 1.0, 1.0).unwrap();
        let errs: Vec<f64> = (0..300u64)
            .into_par_iter()
            .map(|r| {
                let (series, truth) = simulate_path(&spec, &grid, 46_000 + r).unwrap();
                let pre = preaverage(&series, &g).unwrap();
                let est = estimate(
                    &pre,
                    &g,
                    EstimateTarget::QuadraticVariation,
                    1.0,
                    NormalizationMode::FiniteSample,
                    false,
                )
                .unwrap()
                .value;
                let tv = preavg::estimators::TruthSource::quadratic_variation(&truth, 1.0)
                    .unwrap();
                est - tv
            })
            .collect();
        let rmse = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
        assert!(rmse < rmse_prev, "RMSE not shrinking at n={n}");
        rmse_prev = rmse;
    }
    assert!(rmse_prev < 0.006, "final RMSE too large: {rmse_prev}");
}
