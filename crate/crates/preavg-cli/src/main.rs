//! Command-line front end: kernel inspection, simulation, estimation from
//! CSV, inference, and Monte Carlo experiment plans.
//!
//! Exit codes: 0 success, 1 user error (arguments, config, input data),
//! 2 numerical failure.

use clap::{Args, Parser, Subcommand};
use preavg::error::Error;
use preavg::estimators::csv::{read_series_csv, write_series_csv};
use preavg::estimators::{
    estimate, preaverage, EstimateTarget, NormalizationMode, SamplingGrid,
};
use preavg::inference::{jump_test, qv_interval, studentized_power, InferenceResult, QvOracle};
use preavg::kernels::{by_name, KernelSet, WeightFunction, WeightSpecJson};
use preavg::montecarlo::{run_experiment, ExperimentPlan};
use preavg::simulate::{simulate_path, ModelSpec, SimTruth};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "preavg",
    version,
    about = "Pre-averaging estimators and inference for noisy high-frequency data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print kernel constants of a weight family: norms, rho table,
    /// mu-bar values and the Psi covariance matrices.
    Kernels(KernelsArgs),
    /// Simulate a noisy path: writes series.csv and truth.json.
    Simulate(SimulateArgs),
    /// Estimate target quantities from a CSV series; writes statistic reports.
    Estimate(EstimateArgs),
    /// Studentized estimates, confidence intervals and the jump test.
    Infer(InferArgs),
    /// Run a Monte Carlo experiment plan; writes summary JSON and CSV.
    Mc(McArgs),
}

#[derive(Args)]
struct KernelsArgs {
    /// weight function name or JSON spec path
    #[arg(long, default_value = "triangle")]
    g: String,
    /// optional second weight for cross kernels
    #[arg(long)]
    h: Option<String>,
    /// even power p
    #[arg(long, default_value_t = 2)]
    p: u32,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// evaluation point eta for the mu kernels
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// evaluation point zeta for the mu kernels
    #[arg(long, default_value_t = 0.5)]
    zeta: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// model spec JSON
    #[arg(long)]
    config: PathBuf,
    /// number of increments
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// input CSV with`time,value` rows
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value = "triangle")]
    g: String,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// evaluation time; horizon when omitted
    #[arg(long)]
    t: Option<f64>,
    /// comma-separated targets: qv, jumpP, powerP, mixedP (e.g. jump4)
    #[arg(long, default_value = "qv,jump4,power4")]
    targets: String,
    /// truncate negative volatility estimates at zero
    #[arg(long)]
    truncate: bool,
    /// use plain asymptotic normalization instead of finite-sample constants
    #[arg(long)]
    asymptotic: bool,
    /// output JSON path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InferArgs {
    #[arg(long)]
    csv: PathBuf,
    /// one of: studentized, jump-test, qv
    #[arg(long)]
    kind: String,
    #[arg(long, default_value = "triangle")]
    g: String,
    /// second weight (jump test)
    #[arg(long, default_value = "sine")]
    h: String,
    #[arg(long, default_value_t = 4)]
    p: u32,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// confidence level for intervals, significance level for tests
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// evaluation time; horizon when omitted
    #[arg(long)]
    t: Option<f64>,
    /// simulated truth JSON enabling oracle variance / centering
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    asymptotic: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    /// experiment plan JSON
    #[arg(long)]
    config: PathBuf,
    /// master seed override
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// 12 significant digits, per the numeric output contract.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn load_weight(spec: &str) -> Result<WeightFunction, Error> {
    if spec.ends_with(".json") || Path::new(spec).exists() {
        let text = std::fs::read_to_string(spec)?;
        let parsed: WeightSpecJson = serde_json::from_str(&text)?;
        parsed.build()
    } else {
        by_name(spec)
    }
}

fn main() {
    if let Ok(threads) = std::env::var("PREAVG_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::QuadratureNonConvergence { .. } | Error::Numerical(_) => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Kernels(args) => cmd_kernels(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Infer(args) => cmd_infer(args),
        Command::Mc(args) => cmd_mc(args),
    }
}

fn cmd_kernels(args: KernelsArgs) -> Result<(), Error> {
    let g = load_weight(&args.g)?;
    let mut family = vec![g];
    if let Some(h) = &args.h {
        family.push(load_weight(h)?);
    }
    let ks = KernelSet::new(family)?;
    let p = args.p;
    if p < 2 || p % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "kernel inspection needs even p >= 2, got {p}"
        )));
    }

    for (i, w) in ks.family().iter().enumerate() {
        println!("weight[{i}] = {}", w.name());
        let mut orders = vec![1.0, 2.0, p as f64];
        orders.dedup();
        for q in orders {
            let norm = preavg::kernels::continuous_norm(w, q, false)?;
            let dnorm = preavg::kernels::continuous_norm(w, q, true)?;
            println!("  gbar({q}) = {}   gbar'({q}) = {}", sig12(norm), sig12(dnorm));
        }
    }

    let rho = preavg::kernels::solve_rho(p)?;
    println!("rho[{p}] coefficients:");
    for l in 0..rho.len() {
        let (num, den) = rho.exact(l).parts();
        println!("  rho_{{{p},{l}}} = {num}/{den} = {}", sig12(rho.value(l)));
    }

    println!("mu kernels at eta = {}, zeta = {}:", args.eta, args.zeta);
    for i in 0..ks.dim() {
        for j in i..ks.dim() {
            let mk = ks.mu_kernels(i, j, p, args.eta, args.zeta)?;
            println!(
                "  mu_{p}({}) = {}   mu_{}({},{}) = {}   mu_bar_{} = {}",
                ks.weight(i).name(),
                sig12(mk.mu_p_g),
                2 * p,
                ks.weight(i).name(),
                ks.weight(j).name(),
                sig12(mk.mu_2p),
                2 * p,
                sig12(mk.mu_bar_2p)
            );
        }
    }

    let psi = ks.psi_matrices(p as f64)?;
    for (name, m) in [
        ("Psi_minus", &psi.minus),
        ("Psi_plus", &psi.plus),
        ("Psi_bar_minus", &psi.bar_minus),
        ("Psi_bar_plus", &psi.bar_plus),
    ] {
        println!("{name}[p={p}]:");
        for i in 0..m.dim() {
            let row: Vec<String> = (0..m.dim()).map(|j| sig12(m.get(i, j))).collect();
            println!("  [{}]", row.join(", "));
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let spec: ModelSpec = serde_json::from_str(&text)?;
    let grid = SamplingGrid::from_count(args.n, spec.horizon, args.theta)?;
    let (series, truth) = simulate_path(&spec, &grid, args.seed)?;
    std::fs::create_dir_all(&args.out)?;
    let csv_path = args.out.join("series.csv");
    let truth_path = args.out.join("truth.json");
    write_series_csv(&csv_path, &series)?;
    let file = std::fs::File::create(&truth_path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &truth)?;
    println!(
        "wrote {} ({} observations) and {}",
        csv_path.display(),
        series.len(),
        truth_path.display()
    );
    Ok(())
}

fn parse_targets(spec: &str) -> Result<Vec<EstimateTarget>, Error> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let target = if part == "qv" {
            EstimateTarget::QuadraticVariation
        } else if let Some(num) = part.strip_prefix("jump") {
            EstimateTarget::JumpPower {
                p: num.parse().map_err(|_| bad_target(part))?,
            }
        } else if let Some(num) = part.strip_prefix("power") {
            EstimateTarget::IntegratedPower {
                p: num.parse().map_err(|_| bad_target(part))?,
            }
        } else if let Some(num) = part.strip_prefix("mixed") {
            EstimateTarget::MixedPower {
                p: num.parse().map_err(|_| bad_target(part))?,
            }
        } else {
            return Err(bad_target(part));
        };
        out.push(target);
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("no targets requested".into()));
    }
    Ok(out)
}

fn bad_target(part: &str) -> Error {
    Error::InvalidParameter(format!(
        "unknown target '{part}' (expected qv, jump<P>, power<P> or mixed<P>)"
    ))
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Error> {
    let series = read_series_csv(&args.csv, args.theta)?;
    let g = load_weight(&args.g)?;
    let t = args.t.unwrap_or_else(|| series.grid().horizon());
    let mode = if args.asymptotic {
        NormalizationMode::Asymptotic
    } else {
        NormalizationMode::FiniteSample
    };
    let pre = preaverage(&series, &g)?;
    let mut reports = Vec::new();
    for target in parse_targets(&args.targets)? {
        reports.push(estimate(&pre, &g, target, t, mode, args.truncate)?);
    }
    let json = serde_json::to_string_pretty(&reports)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &json)?;
            println!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }
    for rep in &reports {
        println!(
            "{:28} t={:<8} value = {}",
            rep.statistic,
            rep.t,
            sig12(rep.value)
        );
    }
    Ok(())
}

fn print_inference_table(res: &InferenceResult) {
    let fmt_opt = |v: Option<f64>| v.map(sig12).unwrap_or_else(|| "-".into());
    println!(
        "{:<24} {:>20} {:>20} {:>20} {:>20} {:>10}",
        "statistic", "estimate", "std error", "ci lower", "ci upper", "decision"
    );
    let decision = match res.reject {
        Some(true) => "reject",
        Some(false) => "accept",
        None => "-",
    };
    println!(
        "{:<24} {:>20} {:>20} {:>20} {:>20} {:>10}",
        res.statistic,
        sig12(res.estimate),
        fmt_opt(res.std_error),
        fmt_opt(res.ci_lower),
        fmt_opt(res.ci_upper),
        decision
    );
    if let Some(p) = res.p_value {
        println!("p-value: {}", sig12(p));
    }
    if !res.flags.is_empty() {
        println!("flags: {:?}", res.flags);
    }
}

fn cmd_infer(args: InferArgs) -> Result<(), Error> {
    let series = read_series_csv(&args.csv, args.theta)?;
    let t = args.t.unwrap_or_else(|| series.grid().horizon());
    let mode = if args.asymptotic {
        NormalizationMode::Asymptotic
    } else {
        NormalizationMode::FiniteSample
    };
    let g = load_weight(&args.g)?;
    let pre_g = preaverage(&series, &g)?;
    let truth: Option<SimTruth> = match &args.truth {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Some(serde_json::from_str(&text)?)
        }
        None => None,
    };

    let result = match args.kind.as_str() {
        "studentized" => {
            let center = truth.as_ref().and_then(|tr| {
                preavg::estimators::TruthSource::integrated_sigma_power(tr, args.p, t)
            });
            studentized_power(&pre_g, &g, args.p, t, args.level, center, mode)?
        }
        "jump-test" => {
            let h = load_weight(&args.h)?;
            let pre_h = preaverage(&series, &h)?;
            jump_test(&pre_g, &g, &pre_h, &h, args.p, t, args.level, mode)?
        }
        "qv" => match &truth {
            None => qv_interval(&pre_g, &g, t, args.level, None, mode)?,
            Some(tr) => {
                let ks = KernelSet::single(g.clone())?;
                let coeffs = ks.mu_bar4_coeffs(0)?;
                let psi = ks.psi_matrices(2.0)?;
                qv_interval(
                    &pre_g,
                    &g,
                    t,
                    args.level,
                    Some(QvOracle { truth: tr, coeffs: &coeffs, psi: &psi }),
                    mode,
                )?
            }
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown inference kind '{other}' (expected studentized, jump-test or qv)"
            )))
        }
    };

    print_inference_table(&result);
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&result)?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_mc(args: McArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut plan: ExperimentPlan = serde_json::from_str(&text)?;
    if let Some(seed) = args.seed {
        plan.master_seed = seed;
    }
    let summary = run_experiment(&plan)?;
    std::fs::create_dir_all(&args.out)?;
    let json_path = args.out.join("summary.json");
    let csv_path = args.out.join("cells.csv");
    let file = std::fs::File::create(&json_path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &summary)?;
    std::fs::write(&csv_path, summary.cells_csv())?;
    if summary.raw.is_some() {
        std::fs::write(args.out.join("raw.csv"), summary.raw_csv())?;
    }
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    for cell in &summary.cells {
        println!(
            "{:45} n={:<7} mean={} rmse={} coverage={} rejection={}",
            cell.statistic,
            cell.n,
            sig12(cell.mean),
            cell.rmse.map(sig12).unwrap_or_else(|| "-".into()),
            cell.coverage.map(|c| format!("{c:.4}")).unwrap_or_else(|| "-".into()),
            cell.rejection_rate
                .map(|c| format!("{c:.4}"))
                .unwrap_or_else(|| "-".into()),
        );
    }
    for rate in &summary.rates {
        println!(
            "rate {:45} slope={:+.4} r2={:.4}",
            rate.statistic, rate.slope, rate.r_squared
        );
    }
    if !summary.failures.is_empty() {
        eprintln!("{} replication failures (recorded in summary)", summary.failures.len());
    }
    Ok(())
}
