use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tailquant_core::approx::{self, ApproxInputs, InterpolationConstants, Method};
use tailquant_core::catalog;
use tailquant_core::harness::{self, BenchConfig, EndpointsMode, SimStudyConfig, Table};
use tailquant_core::montecarlo::{self, SimConfig};
use tailquant_core::precision::{self, PrecisionQuery};
use tailquant_core::{Error, SeverityModel};

/// Directory used for CSV output when `--output` is not given.
const OUTPUT_DIR_ENV: &str = "TAILQUANT_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "tailquant",
    version,
    about = "Closed-form and Monte Carlo quantiles of compound Poisson losses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate loss quantile of one severity.
    Quantile(QuantileArgs),
    /// Approximations over a grid of tail indices, written as CSV.
    Sweep(SweepArgs),
    /// Reproduce a benchmark table as CSV.
    Bench(BenchArgs),
    /// GPD fit-then-approximate simulation study.
    Simstudy(SimstudyArgs),
    /// Sampling precision of an empirical quantile.
    Precision(PrecisionArgs),
}

#[derive(Args)]
struct EndpointArgs {
    /// Interpolation endpoints: table1, fixed or custom.
    #[arg(long, default_value = "table1")]
    endpoints_mode: String,
    /// Low endpoint (custom mode).
    #[arg(long)]
    xi_low: Option<f64>,
    /// High endpoint (custom mode).
    #[arg(long)]
    xi_high: Option<f64>,
}

impl EndpointArgs {
    fn mode(&self) -> Result<EndpointsMode, Error> {
        let custom = match (self.xi_low, self.xi_high) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            _ => return Err(Error::Parse("--xi-low and --xi-high must be given together".into())),
        };
        if custom.is_some() && !self.endpoints_mode.eq_ignore_ascii_case("custom") {
            return Err(Error::Parse(
                "--xi-low/--xi-high require --endpoints-mode custom".into(),
            ));
        }
        EndpointsMode::parse(&self.endpoints_mode, custom)
    }
}

#[derive(Args)]
struct QuantileArgs {
    /// Severity spec, e.g. "GPD(0.99,4954.245)" or "LOGN(10,2.2,H=1e4)".
    #[arg(long)]
    severity: String,
    /// Poisson frequency.
    #[arg(long, default_value_t = catalog::LAMBDA)]
    lambda: f64,
    /// Confidence level.
    #[arg(long, default_value_t = 0.999)]
    alpha: f64,
    /// sla, isla, misla or mc.
    #[arg(long, default_value = "misla")]
    method: String,
    #[command(flatten)]
    endpoints: EndpointArgs,
    /// Simulated years for the mc method.
    #[arg(long, default_value = "1e7", value_parser = parse_count)]
    mc_years: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    severity: String,
    #[arg(long, default_value_t = catalog::LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = 0.999)]
    alpha: f64,
    /// Tail-index grid as start:end:step.
    #[arg(long, default_value = "0.5:1.5:0.005")]
    grid: String,
    #[command(flatten)]
    endpoints: EndpointArgs,
    /// Output CSV path.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Flat key-value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// T1, T2, T3, T4 or T5.
    #[arg(long)]
    table: Option<String>,
    /// Simulated years for the Monte Carlo column (0 uses published values).
    #[arg(long, value_parser = parse_count)]
    mc_years: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// table1, fixed or custom.
    #[arg(long)]
    endpoints_mode: Option<String>,
    #[arg(long)]
    xi_low: Option<f64>,
    #[arg(long)]
    xi_high: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write zero runtimes so repeated runs give identical files.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Args)]
struct SimstudyArgs {
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value_t = 1000)]
    sims: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    endpoints: EndpointArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PrecisionArgs {
    #[arg(long)]
    alpha: f64,
    /// Density at the quantile.
    #[arg(long)]
    density: f64,
    /// Quantile value (needed for --rel-error).
    #[arg(long, default_value_t = 1.0)]
    quantile: f64,
    /// Sample size; prints the standard deviation of the empirical quantile.
    #[arg(long, value_parser = parse_count)]
    n: Option<u64>,
    /// Relative error; prints the sample size for a two-sigma bound.
    #[arg(long)]
    rel_error: Option<f64>,
}

/// Accepts integers and scientific notation such as `1e7`.
fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(format!("`{s}` is not a nonnegative integer"))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 2,
        Error::Domain(_) | Error::InvalidParameter(_) => 3,
        Error::NonConvergence(_) => 4,
        _ => 1,
    }
}

/// Six significant figures for human-readable summaries.
fn sig6(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..15).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

fn resolve_output(explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let dir = std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        dir.join(default_name)
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_quantile(a: QuantileArgs) -> Result<(), Error> {
    let model: SeverityModel = a.severity.parse()?;
    let mode = a.endpoints.mode()?;
    println!("severity = {model}");
    println!("lambda = {}\nalpha = {}\nmethod = {}", a.lambda, a.alpha, a.method);
    if a.method.eq_ignore_ascii_case("mc") {
        println!("mc_years = {}\nseed = {}", a.mc_years, a.seed);
        let cfg = SimConfig::new(model, a.lambda, a.mc_years, vec![a.alpha], a.seed);
        let r = montecarlo::estimate_var(&cfg)?;
        for w in &r.warnings {
            eprintln!("warning: {w}");
        }
        let e = r
            .get(a.alpha)
            .ok_or_else(|| Error::Domain("confidence level not estimated".into()))?;
        println!("value = {}", e.value);
        println!("rank = {}", e.rank);
        println!("std_error = {}", sig6(e.std_error));
        println!("summary: MC {} (se {})", sig6(e.value), sig6(e.std_error));
        return Ok(());
    }
    let method: Method = a.method.parse()?;
    let endpoints = mode.for_model(&model);
    println!("endpoints_mode = {}", mode.name());
    if let Some((lo, hi)) = endpoints {
        println!("endpoints = ({lo}, {hi})");
    }
    let inputs = ApproxInputs::new(model, a.lambda, a.alpha, endpoints)?;
    let e = approx::estimate(method, &inputs, &InterpolationConstants::default())?;
    println!("value = {}", e.value);
    println!("branch = {}", e.branch.as_str());
    println!("base_term = {}", e.base_term);
    println!("correction_term = {}", e.correction_term);
    if let Some(err) = e.integration_error {
        println!("integration_error = {}", sig6(err));
    }
    if e.sign_discrepancy {
        println!("note: high-branch correction is added while the closed form at the high endpoint subtracts it");
    }
    println!("summary: {} {} ({})", e.method, sig6(e.value), e.branch.as_str());
    Ok(())
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Error::Parse(format!("grid `{s}` must be start:end:step")))?;
    match nums[..] {
        [start, end, step] => approx::grid(start, end, step),
        _ => Err(Error::Parse(format!("grid `{s}` must be start:end:step"))),
    }
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Error> {
    let model: SeverityModel = a.severity.parse()?;
    let grid = parse_grid(&a.grid)?;
    let mode = a.endpoints.mode()?;
    let endpoints = mode
        .for_model(&model)
        .ok_or_else(|| Error::Domain(format!("{} has no tail index to sweep", model.label())))?;
    let inputs = ApproxInputs::new(model, a.lambda, a.alpha, Some(endpoints))?;
    let out = resolve_output(a.output, "sweep.csv");
    println!("severity = {model}\nlambda = {}\nalpha = {}", a.lambda, a.alpha);
    println!(
        "grid = {} ({} points)\nendpoints = ({}, {})",
        a.grid,
        grid.len(),
        endpoints.0,
        endpoints.1
    );
    println!("output = {}", out.display());
    let rows = harness::run_sweep(&inputs, &grid)?;
    harness::write_sweep(&rows, create(&out)?)?;
    let (first, last) = (rows.first(), rows.last());
    if let (Some(f), Some(l)) = (first, last) {
        println!(
            "summary: {} rows, MISLA {} at xi={} to {} at xi={}",
            rows.len(),
            sig6(f.misla),
            f.xi,
            sig6(l.misla),
            sig6(l.xi)
        );
    }
    Ok(())
}

fn bench_config(a: &BenchArgs) -> Result<BenchConfig, Error> {
    let mut cfg = match &a.config {
        Some(p) => BenchConfig::from_config_file(p)?,
        None => {
            let table = a
                .table
                .as_deref()
                .ok_or_else(|| Error::Parse("bench needs --table or --config".into()))?;
            BenchConfig {
                table: table.parse()?,
                ..Default::default()
            }
        }
    };
    if let (Some(t), Some(_)) = (&a.table, &a.config) {
        cfg.table = t.parse()?;
    }
    if let Some(y) = a.mc_years {
        cfg.mc_years = y;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let custom = match (a.xi_low, a.xi_high) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        (None, None) => None,
        _ => return Err(Error::Parse("--xi-low and --xi-high must be given together".into())),
    };
    if let Some(m) = &a.endpoints_mode {
        cfg.endpoints = EndpointsMode::parse(m, custom)?;
    } else if custom.is_some() {
        return Err(Error::Parse(
            "--xi-low/--xi-high require --endpoints-mode custom".into(),
        ));
    }
    if a.output.is_some() {
        cfg.output = a.output.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_bench(a: BenchArgs) -> Result<(), Error> {
    let cfg = bench_config(&a)?;
    if matches!(cfg.table, Table::SimStudy | Table::Sweep) {
        return Err(Error::Parse(format!(
            "table {} is run with the simstudy or sweep verbs",
            cfg.table
        )));
    }
    let out = resolve_output(cfg.output.clone(), &format!("bench_{}.csv", cfg.table));
    print!("{}", cfg.describe());
    println!("output = {}", out.display());
    let mut rows = harness::run_table(&cfg)?;
    if a.no_timings {
        rows.iter_mut().for_each(|r| r.runtime_seconds = 0.0);
    }
    harness::write_rows(&rows, create(&out)?)?;
    let mut methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    methods.dedup();
    methods.sort_unstable();
    methods.dedup();
    for m in methods {
        let group: Vec<_> = rows.iter().filter(|r| r.method == m).collect();
        let worst = group
            .iter()
            .filter_map(|r| r.pct_diff_vs_mc)
            .fold(None, |acc: Option<f64>, d| {
                Some(acc.map_or(d, |a| if d.abs() > a.abs() { d } else { a }))
            });
        let failed = group
            .iter()
            .filter(|r| !r.status.starts_with(harness::STATUS_OK))
            .count();
        let total: f64 = group.iter().map(|r| r.runtime_seconds).sum();
        match worst {
            Some(w) => println!(
                "summary: {m}: {} rows, worst %diff vs MC {}, {failed} failed, {} s",
                group.len(),
                sig6(w),
                sig6(total)
            ),
            None => println!("summary: {m}: {} rows, {failed} failed, {} s", group.len(), sig6(total)),
        }
    }
    Ok(())
}

fn cmd_simstudy(a: SimstudyArgs) -> Result<(), Error> {
    let bench = BenchConfig {
        table: Table::SimStudy,
        seed: a.seed,
        endpoints: a.endpoints.mode()?,
        runs: a.runs,
        sims: a.sims,
        ..Default::default()
    };
    bench.validate()?;
    let cfg = SimStudyConfig::from_bench(&bench);
    let out = resolve_output(a.output, "simstudy.csv");
    println!(
        "severity = {}\nlambda = {}\nyears_per_sim = {}",
        cfg.model, cfg.lambda, cfg.years_per_sim
    );
    println!("runs = {}\nsims = {}\nseed = {}", cfg.runs, cfg.sims, cfg.seed);
    println!(
        "endpoints = ({}, {})\noutput = {}",
        cfg.endpoints.0,
        cfg.endpoints.1,
        out.display()
    );
    let report = harness::run_simstudy(&cfg)?;
    harness::write_rows(&report.rows(), create(&out)?)?;
    for &alpha in &cfg.alphas {
        println!(
            "summary: alpha={alpha}: SLA mean > MISLA mean in {}% of runs; max SLA/MISLA run-max ratio {}",
            sig6(100.0 * report.sla_mean_exceeds_misla(alpha)),
            sig6(report.max_ratio_of_maxima(alpha))
        );
    }
    println!(
        "summary: fitted xi below 1 in {}% of fits",
        sig6(100.0 * report.xi_below_one_fraction())
    );
    Ok(())
}

fn cmd_precision(a: PrecisionArgs) -> Result<(), Error> {
    let q = PrecisionQuery::new(a.alpha, a.quantile, a.density)?;
    if a.n.is_none() && a.rel_error.is_none() {
        return Err(Error::Parse("precision needs --n or --rel-error".into()));
    }
    println!(
        "alpha = {}\nquantile = {}\ndensity = {}",
        q.alpha, q.quantile, q.density
    );
    if let Some(n) = a.n {
        let sd = precision::quantile_stddev(&q, n as f64)?;
        println!("n = {n}\nstddev = {sd:e}");
        println!("summary: stddev {}", sig6(sd));
    }
    if let Some(eps) = a.rel_error {
        let n = precision::required_n(&q, eps)?;
        println!("rel_error = {eps}\nrequired_n = {n}");
        println!("summary: required n {n}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Quantile(a) => cmd_quantile(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Simstudy(a) => cmd_simstudy(a),
        Command::Precision(a) => cmd_precision(a),
    };
    match result {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
