//! Benchmark experiments over the reference configurations: means, the
//! accuracy tables at both confidence levels, runtimes, fixed-endpoint
//! robustness, the GPD simulation study and tail-index sweeps.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{self, ApproxInputs, InterpolationConstants, Method, QuantileEstimate};
use crate::catalog::{self, CatalogEntry, FIXED_ENDPOINTS, LAMBDA};
use crate::error::{Error, Result};
use crate::fit::{self, FitOptions};
use crate::montecarlo::{self, Poisson, RngStream, SimConfig};
use crate::severity::{Family, SeverityModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Table {
    Means,
    Quantile999,
    Quantile9997,
    Runtime,
    FixedPoints,
    SimStudy,
    Sweep,
}

impl Table {
    pub fn as_str(self) -> &'static str {
        match self {
            Table::Means => "T1",
            Table::Quantile999 => "T2",
            Table::Quantile9997 => "T3",
            Table::Runtime => "T4",
            Table::FixedPoints => "T5",
            Table::SimStudy => "T6",
            Table::Sweep => "FIG",
        }
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Table {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = match s.trim().to_ascii_uppercase().as_str() {
            "T1" | "T1_MEANS" => Table::Means,
            "T2" | "T2_999" => Table::Quantile999,
            "T3" | "T3_9997" => Table::Quantile9997,
            "T4" | "T4_RUNTIME" => Table::Runtime,
            "T5" | "T5_FIXEDPTS" => Table::FixedPoints,
            "T6" | "T6_SIMSTUDY" => Table::SimStudy,
            "FIG" | "FIG_SWEEP" | "SWEEP" => Table::Sweep,
            _ => return Err(Error::parse(format!("unknown table `{s}` (expected T1..T6 or FIG)"))),
        };
        Ok(t)
    }
}

/// How interpolation endpoints are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointsMode {
    /// Per-severity endpoints of the reference configuration.
    Table1,
    /// `(0.85, 1.15)` for every severity.
    Fixed,
    Custom(f64, f64),
}

impl EndpointsMode {
    pub fn resolve(&self, entry_endpoints: Option<(f64, f64)>) -> Option<(f64, f64)> {
        match *self {
            EndpointsMode::Table1 => entry_endpoints,
            EndpointsMode::Fixed => entry_endpoints.map(|_| FIXED_ENDPOINTS),
            EndpointsMode::Custom(lo, hi) => entry_endpoints.map(|_| (lo, hi)),
        }
    }

    /// Endpoints for an arbitrary model: the reference endpoints of its
    /// catalog label when there is one, else the fixed pair.
    pub fn for_model(&self, model: &SeverityModel) -> Option<(f64, f64)> {
        model.tail_index()?;
        match *self {
            EndpointsMode::Table1 => Some(
                catalog::lookup(&model.label())
                    .and_then(|e| e.endpoints)
                    .unwrap_or(FIXED_ENDPOINTS),
            ),
            EndpointsMode::Fixed => Some(FIXED_ENDPOINTS),
            EndpointsMode::Custom(lo, hi) => Some((lo, hi)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EndpointsMode::Table1 => "table1",
            EndpointsMode::Fixed => "fixed",
            EndpointsMode::Custom(..) => "custom",
        }
    }

    /// Parses `table1`, `fixed` or `custom` (the latter needs the pair).
    pub fn parse(mode: &str, custom: Option<(f64, f64)>) -> Result<Self> {
        match mode.trim().to_ascii_lowercase().as_str() {
            "table1" => Ok(EndpointsMode::Table1),
            "fixed" => Ok(EndpointsMode::Fixed),
            "custom" => {
                let (lo, hi) = custom
                    .ok_or_else(|| Error::parse("endpoints_mode = custom requires explicit low and high endpoints"))?;
                Ok(EndpointsMode::Custom(lo, hi))
            }
            other => Err(Error::parse(format!(
                "unknown endpoints mode `{other}` (expected table1, fixed or custom)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub table: Table,
    /// Simulated years for the Monte Carlo column; 0 uses the published
    /// Monte Carlo values as the reference instead.
    pub mc_years: u64,
    pub seed: u64,
    pub endpoints: EndpointsMode,
    pub output: Option<PathBuf>,
    /// Simulation study scale.
    pub runs: usize,
    pub sims: usize,
    /// Timing repetitions for closed-form methods (median reported).
    pub repetitions: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            table: Table::Quantile999,
            mc_years: 10_000_000,
            seed: 42,
            endpoints: EndpointsMode::Table1,
            output: None,
            runs: 50,
            sims: 1000,
            repetitions: 5,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    table: String,
    mc_years: Option<toml::Value>,
    seed: Option<u64>,
    endpoints_mode: Option<String>,
    endpoints: Option<[f64; 2]>,
    output: Option<String>,
    runs: Option<usize>,
    sims: Option<usize>,
    repetitions: Option<usize>,
}

fn count_value(v: &toml::Value, key: &str) -> Result<u64> {
    let f = match v {
        toml::Value::Integer(i) => *i as f64,
        toml::Value::Float(f) => *f,
        toml::Value::String(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::parse(format!("`{key}` must be a number")))?,
        _ => return Err(Error::parse(format!("`{key}` must be a number"))),
    };
    if !(f >= 0.0 && f.fract() == 0.0 && f < 1.8e19) {
        return Err(Error::parse(format!("`{key}` must be a nonnegative integer, got {f}")));
    }
    Ok(f as u64)
}

impl BenchConfig {
    /// Reads the flat `key = value` config format.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let raw: ConfigFile = toml::from_str(text).map_err(|e| Error::parse(format!("config: {}", e.message())))?;
        let mut cfg = BenchConfig {
            table: raw.table.parse()?,
            ..Default::default()
        };
        if let Some(v) = &raw.mc_years {
            cfg.mc_years = count_value(v, "mc_years")?;
        }
        if let Some(s) = raw.seed {
            cfg.seed = s;
        }
        if let Some(m) = &raw.endpoints_mode {
            cfg.endpoints = EndpointsMode::parse(m, raw.endpoints.map(|[a, b]| (a, b)))?;
        } else if raw.endpoints.is_some() {
            return Err(Error::parse("`endpoints` is only valid with endpoints_mode = custom"));
        }
        cfg.output = raw.output.map(PathBuf::from);
        cfg.runs = raw.runs.unwrap_or(cfg.runs);
        cfg.sims = raw.sims.unwrap_or(cfg.sims);
        cfg.repetitions = raw.repetitions.unwrap_or(cfg.repetitions);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        Self::from_config_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_years != 0 && self.mc_years < 10_000 {
            return Err(Error::domain(format!(
                "mc_years must be 0 or at least 10^4, got {}",
                self.mc_years
            )));
        }
        if let EndpointsMode::Custom(lo, hi) = self.endpoints {
            if !(lo > 0.0 && lo < 1.0 && hi > 1.0 && hi < 2.0) {
                return Err(Error::domain(format!(
                    "custom endpoints ({lo}, {hi}) must straddle 1 inside (0, 2)"
                )));
            }
        }
        if self.table == Table::SimStudy && (self.runs == 0 || self.sims == 0) {
            return Err(Error::domain(
                "the simulation study needs at least one run and one simulation",
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::domain("repetitions must be positive"));
        }
        Ok(())
    }

    /// Resolved configuration as `key = value` lines.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "table = {}\nmc_years = {}\nseed = {}\nendpoints_mode = {}\n",
            self.table,
            self.mc_years,
            self.seed,
            self.endpoints.name()
        );
        if let EndpointsMode::Custom(lo, hi) = self.endpoints {
            s += &format!("endpoints = [{lo}, {hi}]\n");
        }
        if let Some(o) = &self.output {
            s += &format!("output = {}\n", o.display());
        }
        if self.table == Table::SimStudy {
            s += &format!("runs = {}\nsims = {}\n", self.runs, self.sims);
        }
        s += &format!("block_years = {}\n", montecarlo::DEFAULT_BLOCK_YEARS);
        s
    }
}

/// One cell of a benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub severity: String,
    pub alpha: Option<f64>,
    pub method: String,
    pub value: f64,
    pub pct_diff_vs_mc: Option<f64>,
    pub runtime_seconds: f64,
    pub status: String,
}

pub const STATUS_OK: &str = "ok";

/// `(value - mc)/mc · 100`.
pub fn pct_diff(value: f64, mc: f64) -> f64 {
    (value - mc) / mc * 100.0
}

/// Runs `f` `reps` times and returns its last result with the median wall time.
pub fn time_median<T>(reps: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut times = Vec::with_capacity(reps.max(1));
    let mut out = None;
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        out = Some(f());
        times.push(t.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    (out.expect("at least one repetition"), times[times.len() / 2])
}

fn status_of(e: &Error) -> String {
    match e {
        Error::NonConvergence(m) => format!("nonconvergence: {m}"),
        Error::Domain(m) => format!("domain: {m}"),
        other => format!("error: {other}"),
    }
}

fn method_row(
    entry: &CatalogEntry,
    alpha: f64,
    label: &str,
    result: Result<QuantileEstimate>,
    runtime: f64,
    mc: Option<f64>,
) -> BenchRow {
    match result {
        Ok(e) => BenchRow {
            severity: entry.label.to_string(),
            alpha: Some(alpha),
            method: label.to_string(),
            value: e.value,
            pct_diff_vs_mc: mc.map(|m| pct_diff(e.value, m)),
            runtime_seconds: runtime,
            status: if e.sign_discrepancy {
                "ok; high-branch sign differs from closed form".to_string()
            } else {
                STATUS_OK.to_string()
            },
        },
        Err(err) => BenchRow {
            severity: entry.label.to_string(),
            alpha: Some(alpha),
            method: label.to_string(),
            value: f64::NAN,
            pct_diff_vs_mc: None,
            runtime_seconds: runtime,
            status: status_of(&err),
        },
    }
}

/// Monte Carlo `VaR` for one reference configuration at both levels.
pub fn mc_reference(entry: &CatalogEntry, years: u64, seed: u64) -> Result<(f64, f64, f64)> {
    let cfg = SimConfig::new(entry.model, LAMBDA, years, catalog::ALPHAS.to_vec(), seed);
    let t = Instant::now();
    let r = montecarlo::estimate_var(&cfg)?;
    let secs = t.elapsed().as_secs_f64();
    let v = |a| r.get(a).map(|e| e.value).ok_or_else(|| Error::domain("missing level"));
    Ok((v(catalog::ALPHAS[0])?, v(catalog::ALPHAS[1])?, secs))
}

fn closed_form_rows(
    entry: &CatalogEntry,
    alpha: f64,
    endpoints: EndpointsMode,
    mc: Option<f64>,
    reps: usize,
) -> Vec<BenchRow> {
    let consts = InterpolationConstants::default();
    Method::ALL
        .iter()
        .map(|&m| {
            let inputs = ApproxInputs::new(entry.model, LAMBDA, alpha, endpoints.resolve(entry.endpoints));
            let (res, secs) = time_median(reps, || {
                inputs
                    .as_ref()
                    .map_err(clone_err)
                    .and_then(|i| approx::estimate(m, i, &consts))
            });
            method_row(entry, alpha, m.as_str(), res, secs, mc)
        })
        .collect()
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(m.clone()),
        Error::InvalidParameter(m) => Error::InvalidParameter(m.clone()),
        Error::Parse(m) => Error::Parse(m.clone()),
        Error::NonConvergence(m) => Error::NonConvergence(m.clone()),
        other => Error::Internal {
            branch: "inputs".into(),
            message: other.to_string(),
        },
    }
}

/// Monte Carlo references per entry: simulated when `mc_years > 0`, else published.
/// Simulated result (if any) and the reference values used at both levels.
type Reference = (Option<Result<(f64, f64, f64)>>, f64, f64);

fn references(entries: &[CatalogEntry], cfg: &BenchConfig) -> Vec<Reference> {
    entries
        .par_iter()
        .map(|e| {
            if cfg.mc_years > 0 {
                let r = mc_reference(e, cfg.mc_years, cfg.seed);
                let (a, b) = match &r {
                    Ok((a, b, _)) => (*a, *b),
                    Err(_) => (e.at_999.mc, e.at_9997.mc),
                };
                (Some(r), a, b)
            } else {
                (None, e.at_999.mc, e.at_9997.mc)
            }
        })
        .collect()
}

/// Rows of tables T1–T5.
pub fn run_table(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let entries = catalog::table1();
    let mut rows = Vec::new();
    match cfg.table {
        Table::Means => {
            for e in &entries {
                let (mean, secs) = time_median(cfg.repetitions, || e.model.mean());
                rows.push(BenchRow {
                    severity: e.label.to_string(),
                    alpha: None,
                    method: "MEAN".into(),
                    value: mean,
                    pct_diff_vs_mc: None,
                    runtime_seconds: secs,
                    status: STATUS_OK.into(),
                });
            }
        }
        Table::Quantile999 | Table::Quantile9997 => {
            let (idx, alpha) = if cfg.table == Table::Quantile999 {
                (0, 0.999)
            } else {
                (1, 0.9997)
            };
            let refs = references(&entries, cfg);
            for (e, (sim, a, b)) in entries.iter().zip(refs) {
                let mc = if idx == 0 { a } else { b };
                if let Some(sim) = sim {
                    rows.push(match sim {
                        Ok((v1, v2, secs)) => BenchRow {
                            severity: e.label.to_string(),
                            alpha: Some(alpha),
                            method: "MC".into(),
                            value: if idx == 0 { v1 } else { v2 },
                            pct_diff_vs_mc: Some(0.0),
                            runtime_seconds: secs,
                            status: STATUS_OK.into(),
                        },
                        Err(err) => BenchRow {
                            severity: e.label.to_string(),
                            alpha: Some(alpha),
                            method: "MC".into(),
                            value: f64::NAN,
                            pct_diff_vs_mc: None,
                            runtime_seconds: 0.0,
                            status: status_of(&err),
                        },
                    });
                }
                rows.extend(closed_form_rows(e, alpha, cfg.endpoints, Some(mc), cfg.repetitions));
            }
        }
        Table::Runtime => {
            for &alpha in &catalog::ALPHAS {
                for e in &entries {
                    rows.extend(closed_form_rows(e, alpha, cfg.endpoints, None, cfg.repetitions));
                }
            }
        }
        Table::FixedPoints => {
            let chosen: Vec<CatalogEntry> = entries
                .into_iter()
                .filter(|e| catalog::FIXED_POINT_ROWS.iter().any(|(l, _)| *l == e.label))
                .collect();
            let refs = references(&chosen, cfg);
            let consts = InterpolationConstants::default();
            for (e, (_, a, b)) in chosen.iter().zip(refs) {
                for (alpha, mc) in [(0.999, a), (0.9997, b)] {
                    for (label, mode) in [("MISLA", EndpointsMode::Table1), ("MISLA_FIXED", EndpointsMode::Fixed)] {
                        let inputs = ApproxInputs::new(e.model, LAMBDA, alpha, mode.resolve(e.endpoints));
                        let (res, secs) = time_median(cfg.repetitions, || {
                            inputs
                                .as_ref()
                                .map_err(clone_err)
                                .and_then(|i| approx::misla(i, &consts))
                        });
                        rows.push(method_row(e, alpha, label, res, secs, Some(mc)));
                    }
                }
            }
        }
        Table::SimStudy | Table::Sweep => {
            return Err(Error::domain(format!(
                "table {} is produced by the simulation study or sweep runners",
                cfg.table
            )))
        }
    }
    Ok(rows)
}

pub fn write_rows<W: Write>(rows: &[BenchRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<BenchRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    let expected = [
        "severity",
        "alpha",
        "method",
        "value",
        "pct_diff_vs_mc",
        "runtime_seconds",
        "status",
    ];
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(format!(
            "unexpected CSV header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Descriptive statistics of one method's estimates within a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimStudyStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub stddev: f64,
    /// `m3 / m2^{3/2}` with biased central moments.
    pub skewness: f64,
    /// Excess kurtosis `m4 / m2² - 3` with biased central moments.
    pub kurtosis: f64,
}

impl SimStudyStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let nf = n as f64;
        let mean = v.iter().sum::<f64>() / nf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in &v {
            let d = x - mean;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Some(Self {
            n,
            mean,
            median,
            min: v[0],
            max: v[n - 1],
            stddev: if n > 1 { (m2 * nf / (nf - 1.0)).sqrt() } else { 0.0 },
            skewness: if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 },
            kurtosis: if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStudyConfig {
    pub model: SeverityModel,
    pub lambda: f64,
    pub years_per_sim: u64,
    pub runs: usize,
    pub sims: usize,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub endpoints: (f64, f64),
    pub fit: FitOptions,
}

impl SimStudyConfig {
    pub fn from_bench(cfg: &BenchConfig) -> Self {
        let gpd = catalog::lookup("GPD")
            .and_then(|e| e.endpoints)
            .unwrap_or(FIXED_ENDPOINTS);
        let endpoints = match cfg.endpoints {
            EndpointsMode::Table1 => gpd,
            EndpointsMode::Fixed => FIXED_ENDPOINTS,
            EndpointsMode::Custom(lo, hi) => (lo, hi),
        };
        Self {
            model: catalog::simstudy_model(),
            lambda: LAMBDA,
            years_per_sim: 10,
            runs: cfg.runs,
            sims: cfg.sims,
            seed: cfg.seed,
            alphas: catalog::ALPHAS.to_vec(),
            endpoints,
            fit: FitOptions::default(),
        }
    }
}

/// One method at one level within one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodStats {
    pub method: Method,
    pub alpha: f64,
    pub stats: SimStudyStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run: usize,
    pub fitted: usize,
    pub failures: usize,
    pub xi_below_one: usize,
    /// Smallest `|ξ̂ - 1|` in the run.
    pub closest_to_one: f64,
    pub stats: Vec<MethodStats>,
}

impl RunSummary {
    pub fn get(&self, method: Method, alpha: f64) -> Option<&SimStudyStats> {
        self.stats
            .iter()
            .find(|s| s.method == method && (s.alpha - alpha).abs() < 1e-12)
            .map(|s| &s.stats)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStudyReport {
    pub runs: Vec<RunSummary>,
}

impl SimStudyReport {
    /// Fraction of runs whose SLA mean exceeds the MISLA mean at `alpha`.
    pub fn sla_mean_exceeds_misla(&self, alpha: f64) -> f64 {
        let hits = self
            .runs
            .iter()
            .filter(|r| match (r.get(Method::Sla, alpha), r.get(Method::Misla, alpha)) {
                (Some(s), Some(m)) => s.mean > m.mean,
                _ => false,
            })
            .count();
        hits as f64 / self.runs.len().max(1) as f64
    }

    /// Largest run-level ratio of SLA max to MISLA max at `alpha`.
    pub fn max_ratio_of_maxima(&self, alpha: f64) -> f64 {
        self.runs
            .iter()
            .filter_map(|r| Some(r.get(Method::Sla, alpha)?.max / r.get(Method::Misla, alpha)?.max))
            .fold(0.0, f64::max)
    }

    pub fn xi_below_one_fraction(&self) -> f64 {
        let below: usize = self.runs.iter().map(|r| r.xi_below_one).sum();
        let fitted: usize = self.runs.iter().map(|r| r.fitted).sum();
        below as f64 / fitted.max(1) as f64
    }

    /// Rows in the benchmark CSV schema: one per run, method, level and statistic.
    pub fn rows(&self) -> Vec<BenchRow> {
        let mut rows = Vec::new();
        for r in &self.runs {
            for ms in &r.stats {
                let s = ms.stats;
                for (name, v) in [
                    ("mean", s.mean),
                    ("median", s.median),
                    ("min", s.min),
                    ("max", s.max),
                    ("stddev", s.stddev),
                    ("skewness", s.skewness),
                    ("kurtosis", s.kurtosis),
                ] {
                    rows.push(BenchRow {
                        severity: format!("run{}", r.run),
                        alpha: Some(ms.alpha),
                        method: format!("{}_{name}", ms.method),
                        value: v,
                        pct_diff_vs_mc: None,
                        runtime_seconds: 0.0,
                        status: format!(
                            "ok; fitted={} failures={} xi_below_one={}",
                            r.fitted, r.failures, r.xi_below_one
                        ),
                    });
                }
            }
        }
        rows
    }
}

/// One simulated data set: `years_per_sim` years of losses pooled, fitted,
/// and approximated. Returns `(ξ̂, [(sla, misla) per level])`.
fn one_simulation(cfg: &SimStudyConfig, poisson: &Poisson, stream: u64) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut rng = RngStream::new(cfg.seed, stream);
    let mut losses = Vec::new();
    for _ in 0..cfg.years_per_sim {
        let n = poisson.draw(&mut rng);
        for _ in 0..n {
            losses.push(cfg.model.sample(rng.uniform()));
        }
    }
    let fit = fit::gpd_mle_with(&losses, &cfg.fit)?;
    if fit.degenerate {
        return Err(Error::NonConvergence("degenerate sample".into()));
    }
    let model = SeverityModel::new(Family::Gpd {
        xi: fit.xi,
        theta: fit.theta,
    })?;
    let consts = InterpolationConstants::default();
    let values = cfg
        .alphas
        .iter()
        .map(|&a| {
            let i = ApproxInputs::new(model, cfg.lambda, a, Some(cfg.endpoints))?;
            Ok((approx::sla(&i)?.value, approx::misla(&i, &consts)?.value))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((fit.xi, values))
}

/// Repeated fit-then-approximate experiment on simulated GPD data.
pub fn run_simstudy(cfg: &SimStudyConfig) -> Result<SimStudyReport> {
    if cfg.runs == 0 || cfg.sims == 0 {
        return Err(Error::domain(
            "the simulation study needs at least one run and one simulation",
        ));
    }
    let poisson = Poisson::new(cfg.lambda)?;
    let runs = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let results: Vec<_> = (0..cfg.sims)
                .map(|s| one_simulation(cfg, &poisson, (run * cfg.sims + s) as u64))
                .collect();
            let ok: Vec<_> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
            let mut stats = Vec::new();
            for (k, &alpha) in cfg.alphas.iter().enumerate() {
                for (method, pick) in [(Method::Sla, 0), (Method::Misla, 1)] {
                    let vals: Vec<f64> = ok
                        .iter()
                        .map(|(_, v)| if pick == 0 { v[k].0 } else { v[k].1 })
                        .collect();
                    if let Some(s) = SimStudyStats::from_values(&vals) {
                        stats.push(MethodStats {
                            method,
                            alpha,
                            stats: s,
                        });
                    }
                }
            }
            RunSummary {
                run,
                fitted: ok.len(),
                failures: results.len() - ok.len(),
                xi_below_one: ok.iter().filter(|(xi, _)| *xi < 1.0).count(),
                closest_to_one: ok.iter().map(|(xi, _)| (xi - 1.0).abs()).fold(f64::INFINITY, f64::min),
                stats,
            }
        })
        .collect();
    Ok(SimStudyReport { runs })
}

/// One row of a tail-index sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub xi: f64,
    pub sla: f64,
    pub isla: f64,
    pub misla: f64,
    pub sla_correction: f64,
    pub isla_correction: f64,
    pub misla_correction: f64,
}

pub fn run_sweep(inputs: &ApproxInputs, grid: &[f64]) -> Result<Vec<SweepRow>> {
    let pts = approx::sweep(inputs, grid, &InterpolationConstants::default())?;
    Ok(pts
        .into_iter()
        .map(|p| SweepRow {
            xi: p.xi,
            sla: p.sla.value,
            isla: p.isla.value,
            misla: p.misla.value,
            sla_correction: p.sla.correction_term,
            isla_correction: p.isla.correction_term,
            misla_correction: p.misla.correction_term,
        })
        .collect())
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}
