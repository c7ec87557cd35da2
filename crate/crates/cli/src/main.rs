use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use busrmt_core::equilibrium::{
    endpoint_relation_residuals, endpoints_closed_form, EquilibriumData,
};
use busrmt_core::experiment::{run_experiment, ExperimentConfig, ModelKind, RunReport, Statistic};
use busrmt_core::multitime::{correlation_determinant_raw, multitime_table_raw, TimeGrid};
use busrmt_core::orthopoly::OrthoBasis;
use busrmt_core::rmt_reference::{linear_grid, ReferenceCurve, ReferenceMethod};
use busrmt_core::{Execution, ModelParams};

#[derive(Parser)]
#[command(name = "busrmt", version, about = "Non-intersecting Poisson bus model: exact formulas, samplers and GUE statistics")]
struct Cli {
    /// Run replicates on a single thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the line model and run the configured statistics.
    SimulateLine(ExpArgs),
    /// Sample the circle model and compare with the determinant formula.
    SimulateCircle(ExpArgs),
    /// Spacing histogram of unfolded arrivals against the Gaudin law.
    Spacing(ExpArgs),
    /// Number variance of unfolded arrivals against GUE.
    NumberVariance(ExpArgs),
    /// Exact probability of no arrival in a time window.
    GapProb(GapArgs),
    /// Tabulate a GUE reference curve as CSV.
    Reference(ReferenceArgs),
    /// Equilibrium-measure endpoints and mass.
    Equilibrium(EquilibriumArgs),
    /// Compare extended-kernel correlations with exhaustive enumeration.
    MultitimeCheck(MultitimeArgs),
}

/// Flags mirror the experiment config keys and override `--config`.
#[derive(Args)]
struct ExpArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (required).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "route-len")]
    route_len: Option<u32>,
    #[arg(long)]
    buses: Option<u32>,
    #[arg(long)]
    site: Option<u32>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long = "circle-sites")]
    circle_sites: Option<usize>,
    #[arg(long)]
    time: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// exact | rejection
    #[arg(long)]
    sampler: Option<String>,
    /// exact | equilibrium
    #[arg(long)]
    unfold: Option<String>,
    /// Comma-separated: spacing, number-variance, none
    #[arg(long)]
    statistics: Option<String>,
    #[arg(long = "s-grid")]
    s_grid: Option<String>,
    #[arg(long = "bin-width")]
    bin_width: Option<f64>,
    #[arg(long = "edge-fraction")]
    edge_fraction: Option<f64>,
    #[arg(long = "max-attempts")]
    max_attempts: Option<u64>,
    /// true | false
    #[arg(long)]
    checks: Option<bool>,
    /// Also write every jump event.
    #[arg(long)]
    trajectories: bool,
    /// Extra key=value overrides.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct GapArgs {
    #[arg(long = "route-len")]
    route_len: u32,
    #[arg(long)]
    buses: u32,
    #[arg(long)]
    site: u32,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Window start (time units).
    #[arg(long)]
    from: f64,
    /// Window end (time units).
    #[arg(long)]
    to: f64,
}

#[derive(Args)]
struct ReferenceArgs {
    /// gaudin | gaudin-cdf | surmise | surmise-cdf | variance | variance-asymptotic | poisson
    #[arg(long)]
    method: String,
    #[arg(long = "s-min", default_value_t = 0.0)]
    s_min: f64,
    #[arg(long = "s-max", default_value_t = 3.0)]
    s_max: f64,
    #[arg(long, default_value_t = 61)]
    points: usize,
    /// CSV file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquilibriumArgs {
    #[arg(long)]
    nu: f64,
    #[arg(long)]
    eta: f64,
    /// Write the density on this many points to CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 201)]
    points: usize,
}

#[derive(Args)]
struct MultitimeArgs {
    #[arg(long = "route-len", default_value_t = 3)]
    route_len: u32,
    #[arg(long, default_value_t = 2)]
    buses: u32,
    /// Comma-separated observation times.
    #[arg(long, default_value = "0.3,0.6")]
    times: String,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 512)]
    samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

fn build_config(args: &ExpArgs, model: ModelKind, stats: Option<Vec<Statistic>>) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_file(p).with_context(|| format!("reading config {}", p.display()))?,
        None => ExperimentConfig::reference_preset(),
    };
    cfg.model = model;
    if let Some(s) = stats {
        cfg.statistics = s;
    }
    let mut set = |k: &str, v: String| cfg.set(k, &v);
    if let Some(v) = args.route_len {
        set("route_len", v.to_string())?;
    }
    if let Some(v) = args.buses {
        set("buses", v.to_string())?;
    }
    if let Some(v) = args.site {
        set("site", v.to_string())?;
    }
    if let Some(v) = args.horizon {
        set("horizon", v.to_string())?;
    }
    if let Some(v) = args.circle_sites {
        set("circle_sites", v.to_string())?;
    }
    if let Some(v) = args.time {
        set("time", v.to_string())?;
    }
    if let Some(v) = args.replicates {
        set("replicates", v.to_string())?;
    }
    if let Some(v) = &args.sampler {
        set("sampler", v.clone())?;
    }
    if let Some(v) = &args.unfold {
        set("unfold", v.clone())?;
    }
    if let Some(v) = &args.statistics {
        set("statistics", v.clone())?;
    }
    if let Some(v) = &args.s_grid {
        set("s_grid", v.clone())?;
    }
    if let Some(v) = args.bin_width {
        set("bin_width", v.to_string())?;
    }
    if let Some(v) = args.edge_fraction {
        set("edge_fraction", v.to_string())?;
    }
    if let Some(v) = args.max_attempts {
        set("max_attempts", v.to_string())?;
    }
    if let Some(v) = args.checks {
        set("checks", v.to_string())?;
    }
    if let Some(v) = &args.seed {
        set("seed", v.to_string())?;
    }
    if let Some(v) = &args.out {
        set("output_dir", v.display().to_string())?;
    }
    if args.trajectories {
        set("trajectories", "true".into())?;
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        cfg.set(k, v)?;
    }
    if cfg.seed.is_none() {
        bail!("stage `config` failed: --seed is required for stochastic commands");
    }
    Ok(cfg)
}

fn report(rep: &RunReport) -> Result<()> {
    println!("output: {}", rep.output_dir.display());
    for f in &rep.files {
        println!("  wrote {}", f.display());
    }
    for c in &rep.checks {
        println!(
            "  check {:<32} {:.6e} < {:<8} {}",
            c.name,
            c.value,
            c.threshold,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    println!("runtime: {:.2}s", rep.runtime_seconds);
    if !rep.all_passed() {
        bail!("stage `checks` failed: one or more tolerance checks did not pass");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::SimulateLine(a) => report(&run_experiment(&build_config(&a, ModelKind::Line, None)?, exec)?),
        Command::SimulateCircle(a) => {
            let mut cfg = build_config(&a, ModelKind::Circle, None)?;
            if a.buses.is_none() && a.config.is_none() && !a.set.iter().any(|s| s.starts_with("buses=")) {
                cfg.buses = 2;
            }
            report(&run_experiment(&cfg, exec)?)
        }
        Command::Spacing(a) => report(&run_experiment(&build_config(&a, ModelKind::Line, Some(vec![Statistic::Spacing]))?, exec)?),
        Command::NumberVariance(a) => report(&run_experiment(
            &build_config(&a, ModelKind::Line, Some(vec![Statistic::NumberVariance]))?,
            exec,
        )?),
        Command::GapProb(a) => {
            let params = ModelParams::new(a.route_len, a.buses, a.site, a.horizon).context("stage `config` failed")?;
            if !(a.from >= 0.0 && a.from <= a.to && a.to <= a.horizon) {
                bail!("stage `config` failed: need 0 <= from <= to <= T");
            }
            let basis = OrthoBasis::for_params(&params);
            let c = 2.0 * a.from / a.horizon - 1.0;
            let d = 2.0 * a.to / a.horizon - 1.0;
            let p = basis.gap_probability(c, d).context("stage `gap_probability` failed")?;
            println!("{p:.16e}");
            Ok(())
        }
        Command::Reference(a) => {
            let method: ReferenceMethod = a.method.parse()?;
            let grid = linear_grid(a.s_min, a.s_max, a.points);
            let curve = ReferenceCurve::tabulate(method, &grid, exec).context("stage `reference` failed")?;
            match a.out {
                Some(p) => {
                    let mut f = io::BufWriter::new(fs::File::create(&p)?);
                    curve.write_csv(&mut f, true)?;
                    f.flush()?;
                }
                None => curve.write_csv(&mut io::stdout().lock(), true)?,
            }
            Ok(())
        }
        Command::Equilibrium(a) => {
            let eq = EquilibriumData::new(a.nu, a.eta).context("stage `equilibrium` failed")?;
            let (lo, hi) = eq.support();
            let (ca, cb) = endpoints_closed_form(a.nu, a.eta)?;
            let (r1, r2) = endpoint_relation_residuals(a.nu, a.eta, lo, hi);
            println!("a={lo:.16e}");
            println!("b={hi:.16e}");
            println!("closed_form_a={ca:.16e}");
            println!("closed_form_b={cb:.16e}");
            println!("relation_residual_1={r1:.3e}");
            println!("relation_residual_2={r2:.3e}");
            println!("mass={:.16e}", eq.mass());
            if let Some(p) = a.out {
                let mut f = io::BufWriter::new(fs::File::create(&p)?);
                writeln!(f, "y,density,cdf")?;
                for y in linear_grid(lo, hi, a.points) {
                    writeln!(f, "{y:.16e},{:.16e},{:.16e}", eq.density(y)?, eq.cdf(y))?;
                }
                f.flush()?;
            }
            Ok(())
        }
        Command::MultitimeCheck(a) => multitime_check(&a),
    }
}

fn multitime_check(a: &MultitimeArgs) -> Result<()> {
    let times: Vec<f64> = a
        .times
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .context("--times must be a comma-separated list of reals")?;
    let grid = TimeGrid::new(times, a.horizon).context("stage `config` failed")?;
    let n = a.buses as usize;
    let top = (a.route_len + a.buses - 1) as usize;
    let table = multitime_table_raw(top, n, &grid).context("stage `enumerate` failed")?;
    let fractions = grid.fractions();
    let k = grid.len();
    let mut worst: f64 = 0.0;
    // one point per time: joint density of having a bus at y_j at time j
    for idx in 0..(top + 1).pow(k as u32) {
        let mut rest = idx;
        let points: Vec<(usize, i64)> = (0..k)
            .map(|j| {
                let y = (rest % (top + 1)) as i64;
                rest /= top + 1;
                (j, y)
            })
            .collect();
        let exact: f64 = table
            .iter()
            .filter(|(cfgs, _)| points.iter().all(|&(j, y)| cfgs[j].shifted().contains(&y)))
            .map(|(_, p)| p)
            .sum();
        let kernel = correlation_determinant_raw(top as i64, n as i64, &fractions, &points, a.samples)
            .context("stage `extended_kernel` failed")?;
        worst = worst.max((kernel - exact).abs());
    }
    println!("max_abs_deviation={worst:.3e}");
    if worst > a.tolerance {
        bail!("stage `multitime-check` failed: deviation {worst:.3e} exceeds {}", a.tolerance);
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
