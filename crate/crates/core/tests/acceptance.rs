//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero only when a criterion fails that is not listed in
//! `DOCUMENTED_FAILURES`; the README explains each one.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{incomplete_beta_ratio, incomplete_gamma_integrals, rel_err, Points};
use tailquant_core::approx::{self, ApproxInputs, InterpolationConstants, Method};
use tailquant_core::catalog::{self, CatalogEntry, FIXED_ENDPOINTS, LAMBDA};
use tailquant_core::fit::{gpd_loglik, gpd_loglik_grad};
use tailquant_core::harness::{self, pct_diff, EndpointsMode, SimStudyConfig};
use tailquant_core::montecarlo::{self, Poisson, RngStream, SimConfig};
use tailquant_core::precision::{quantile_stddev, required_n, PrecisionQuery};
use tailquant_core::quadrature;
use tailquant_core::severity::{Family, SeverityModel};
use tailquant_core::specfun;

const MC_YEARS: u64 = 10_000_000;

/// Sub-checks that fail for reasons recorded in the decisions ledger. A
/// criterion whose failing sub-checks are all listed here is reported as a
/// documented failure; anything else fails the target.
const DOCUMENTED_FAILURES: &[&str] = &[
    "T2/ISLA",
    "T3/ISLA",
    "T5/LOGG",
    "T5/PARA",
    "MC/within_1pct",
    "T6/sla_mean_exceeds",
    "T6/ratio_of_maxima",
    "properties/continuity_high",
];

struct Outcome {
    name: &'static str,
    failures: Vec<String>,
    detail: String,
}

fn published(e: &CatalogEntry, alpha: f64, m: Method) -> f64 {
    let p = e.published(alpha).expect("tabulated level");
    match m {
        Method::Sla => p.sla,
        Method::Isla => p.isla,
        Method::Misla => p.misla,
    }
}

fn inputs(e: &CatalogEntry, alpha: f64, endpoints: Option<(f64, f64)>) -> ApproxInputs {
    ApproxInputs::new(e.model, LAMBDA, alpha, endpoints).unwrap()
}

fn table1_means() -> Outcome {
    let t = Instant::now();
    let means: Vec<(CatalogEntry, f64)> = catalog::table1()
        .into_iter()
        .map(|e| {
            let m = e.model.mean();
            (e, m)
        })
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let mut worst = (0.0f64, "");
    for (e, m) in &means {
        let d = rel_err(*m, e.published_mean) * 100.0;
        if d > worst.0 {
            worst = (d, e.label);
        }
    }
    let mut failures = Vec::new();
    if worst.0 > 0.05 {
        failures.push("T1/accuracy".to_string());
    }
    if secs >= 1.0 {
        failures.push("T1/runtime".to_string());
    }
    Outcome {
        name: "T1_means",
        failures,
        detail: format!("worst {:.4}% ({}), {secs:.4}s total", worst.0, worst.1),
    }
}

fn deterministic(name: &'static str, tag: &str, alpha: f64, limit_secs: f64) -> Outcome {
    let consts = InterpolationConstants::default();
    let t = Instant::now();
    let mut misses = Vec::new();
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 3];
    for e in catalog::table1() {
        let i = inputs(&e, alpha, e.endpoints);
        for (k, m) in Method::ALL.iter().enumerate() {
            let got = approx::estimate(*m, &i, &consts).map(|r| r.value).unwrap_or(f64::NAN);
            let d = rel_err(got, published(&e, alpha, *m)) * 100.0;
            worst[k] = worst[k].max(d);
            if !(d <= 0.1) {
                misses.push(format!("{}/{}:{d:.3}%", e.label, m.as_str()));
                let id = format!("{tag}/{}", m.as_str());
                if !failures.contains(&id) {
                    failures.push(id);
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let mut detail = format!(
        "worst SLA {:.4}% ISLA {:.4}% MISLA {:.4}%, {secs:.3}s",
        worst[0], worst[1], worst[2]
    );
    if !misses.is_empty() {
        detail += &format!("; misses {}", misses.join(" "));
    }
    if secs >= limit_secs {
        failures.push(format!("{tag}/runtime"));
    }
    Outcome { name, failures, detail }
}

fn fixed_endpoints() -> Outcome {
    let consts = InterpolationConstants::default();
    let mut worst = (0.0f64, String::new());
    let mut failures = Vec::new();
    for (label, _) in catalog::FIXED_POINT_ROWS {
        let e = catalog::lookup(label).unwrap();
        for alpha in catalog::ALPHAS {
            let mc = e.published(alpha).unwrap().mc;
            let a = approx::misla(&inputs(&e, alpha, e.endpoints), &consts).unwrap().value;
            let b = approx::misla(&inputs(&e, alpha, Some(FIXED_ENDPOINTS)), &consts)
                .unwrap()
                .value;
            let delta = (pct_diff(a, mc) - pct_diff(b, mc)).abs();
            let id = format!("T5/{label}");
            if delta > 0.05 && !failures.contains(&id) {
                failures.push(id);
            }
            if delta >= worst.0 {
                worst = (delta, format!("{label}@{alpha}"));
            }
        }
    }
    Outcome {
        name: "T5_fixed_endpoints",
        failures,
        detail: format!("largest shift {:.4} pp ({})", worst.0, worst.1),
    }
}

fn mc_oracle() -> Outcome {
    let t = Instant::now();
    let mut misses = Vec::new();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for e in catalog::table1() {
        let (v1, v2, _) = harness::mc_reference(&e, MC_YEARS, 42).unwrap();
        for (alpha, v) in [(0.999, v1), (0.9997, v2)] {
            let d = pct_diff(v, e.published(alpha).unwrap().mc);
            worst = worst.max(d.abs());
            if d.abs() > 1.0 {
                misses.push(format!("{}@{alpha}:{d:+.2}%", e.label));
            }
        }
    }
    if !misses.is_empty() {
        failures.push("MC/within_1pct".to_string());
    }
    let cfg = SimConfig::new(
        catalog::simstudy_model(),
        LAMBDA,
        MC_YEARS,
        catalog::ALPHAS.to_vec(),
        42,
    );
    let r = montecarlo::estimate_var(&cfg).unwrap();
    let mut zs = Vec::new();
    for (alpha, truth) in catalog::SIMSTUDY_REFERENCE {
        let est = r.get(alpha).unwrap();
        let z = (est.value - truth) / est.std_error;
        zs.push(format!("{alpha}:z={z:+.2}"));
        if !(z.abs() <= 3.0) {
            misses.push(format!("GPD85@{alpha}:z={z:+.2}"));
            failures.push(format!("MC/reference_{alpha}"));
        }
    }
    let mut detail = format!(
        "{MC_YEARS} years, worst |diff| {worst:.3}%, GPD85 {}, {:.0}s",
        zs.join(" "),
        t.elapsed().as_secs_f64()
    );
    if !misses.is_empty() {
        detail += &format!("; misses {}", misses.join(" "));
    }
    Outcome {
        name: "MC_oracle",
        failures,
        detail,
    }
}

fn simstudy() -> Outcome {
    let bench = harness::BenchConfig {
        runs: 50,
        sims: 1000,
        ..Default::default()
    };
    let cfg = SimStudyConfig::from_bench(&bench);
    let report = harness::run_simstudy(&cfg).unwrap();
    let exceed = [0.999, 0.9997].map(|a| report.sla_mean_exceeds_misla(a));
    let ratio = [0.999, 0.9997].map(|a| report.max_ratio_of_maxima(a));
    let below = report.xi_below_one_fraction();
    let mut failures = Vec::new();
    if exceed.iter().any(|f| *f < 0.95) {
        failures.push("T6/sla_mean_exceeds".to_string());
    }
    if ratio.iter().all(|r| *r < 10.0) {
        failures.push("T6/ratio_of_maxima".to_string());
    }
    if !(0.85..=0.95).contains(&below) {
        failures.push("T6/xi_below_one".to_string());
    }
    Outcome {
        name: "T6_simstudy",
        failures,
        detail: format!(
            "SLA mean > MISLA mean in {:.1}%/{:.1}% of runs, max ratio of maxima {:.2}/{:.2}, xi<1 fraction {below:.4}",
            exceed[0] * 100.0,
            exceed[1] * 100.0,
            ratio[0],
            ratio[1]
        ),
    }
}

fn property_suites() -> Outcome {
    let mut failed = Vec::new();
    let mut check = |label: &str, worst: f64, tol: f64| {
        if !(worst <= tol) {
            failed.push(format!("properties/{label}"));
        }
        format!("{label} {worst:.1e}")
    };
    let mut parts = Vec::new();

    // special functions against independent quadrature
    let mut pts = Points::new(5);
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let a = pts.range(0.5, 20.0);
        let x = a * pts.range(0.05, 3.0);
        let (lo, hi) = incomplete_gamma_integrals(a, x);
        let (p, q) = specfun::reg_inc_gamma_pair(a, x).unwrap();
        worst = worst.max(rel_err(p, lo / (lo + hi))).max(rel_err(q, hi / (lo + hi)));
        let (b, y) = (pts.range(0.5, 20.0), pts.range(0.01, 0.99));
        let (i, _) = incomplete_beta_ratio(y, a, b);
        worst = worst.max(rel_err(specfun::reg_inc_beta(y, a, b).unwrap(), i));
    }
    parts.push(check("specfun", worst, 1e-9));

    // cdf of quantile
    let mut worst = 0.0f64;
    for e in catalog::table1() {
        for k in 1..200 {
            let p = k as f64 / 200.0;
            let x = e.model.quantile(p).unwrap();
            worst = worst.max((e.model.cdf(x) - p).abs() / p.min(1.0 - p));
        }
    }
    parts.push(check("cdf_quantile", worst, 1e-9));

    // limited expected value against the GPD antiderivative
    let mut worst = 0.0f64;
    for xi in [0.3, 0.85, 0.99, 1.0, 1.2, 1.9] {
        let theta = 4954.245;
        let m = SeverityModel::new(Family::Gpd { xi, theta }).unwrap();
        for x in [10.0, 1e4, 1e7, 1e10] {
            let want = if xi == 1.0 {
                theta * (x / theta).ln_1p()
            } else {
                theta / (1.0 - xi) * (1.0 - ((1.0 - 1.0 / xi) * (xi * x / theta).ln_1p()).exp())
            };
            worst = worst.max(rel_err(quadrature::mu_f(&m, x).unwrap().value, want));
        }
    }
    parts.push(check("mu_f", worst, 1e-8));

    // interpolation continuity at both endpoints
    let consts = InterpolationConstants::default();
    let eps = 1e-6;
    let mut worst = [0.0f64; 2];
    for e in catalog::table1().into_iter().filter(|e| e.endpoints.is_some()) {
        let (lo, hi) = e.endpoints.unwrap();
        for alpha in catalog::ALPHAS {
            let base = inputs(&e, alpha, e.endpoints);
            for (k, edge, inside) in [(0, lo, lo + eps), (1, hi, hi - eps)] {
                let closed = approx::sla(&base.with_tail_index(edge).unwrap()).unwrap().value;
                let near = base.with_tail_index(inside).unwrap();
                for m in [Method::Misla, Method::Isla] {
                    let v = approx::estimate(m, &near, &consts).unwrap().value;
                    worst[k] = worst[k].max(rel_err(v, closed));
                }
            }
        }
    }
    parts.push(check("continuity_low", worst[0], 1e-4));
    parts.push(check("continuity_high", worst[1], 1e-4));

    // GPD likelihood gradient
    let mut rng = RngStream::new(4, 0);
    let sample: Vec<f64> = (0..500)
        .map(|_| {
            SeverityModel::new(Family::Gpd { xi: 0.7, theta: 300.0 })
                .unwrap()
                .sample(rng.uniform())
        })
        .collect();
    let mut worst = 0.0f64;
    for (xi, theta) in [(0.7, 300.0), (0.2, 100.0), (1.4, 800.0)] {
        let (gx, gt) = gpd_loglik_grad(&sample, xi, theta);
        let (hx, ht) = (1e-6 * xi, 1e-6 * theta);
        let fx = (gpd_loglik(&sample, xi + hx, theta) - gpd_loglik(&sample, xi - hx, theta)) / (2.0 * hx);
        let ft = (gpd_loglik(&sample, xi, theta + ht) - gpd_loglik(&sample, xi, theta - ht)) / (2.0 * ht);
        worst = worst
            .max((gx - fx).abs() / gx.abs().max(sample.len() as f64 * 1e-3))
            .max((gt - ft).abs() / gt.abs().max(sample.len() as f64 / theta * 1e-3));
    }
    parts.push(check("mle_gradient", worst, 1e-6));

    // sketch against a full sort
    let mut mismatches = 0.0;
    for label in ["GPD", "LOGN", "TLOGG"] {
        let model = catalog::lookup(label).unwrap().model;
        let mut cfg = SimConfig::new(model, LAMBDA, 10_000, vec![0.99, 0.999, 0.9997], 7);
        cfg.block_years = 3_000;
        let poisson = Poisson::new(LAMBDA).unwrap();
        let mut all = Vec::new();
        for b in 0..cfg.years.div_ceil(cfg.block_years) {
            let mut rng = RngStream::new(cfg.seed, b);
            for _ in 0..cfg.block_years.min(cfg.years - b * cfg.block_years) {
                all.push(montecarlo::simulate_year(&mut rng, &model, &poisson));
            }
        }
        all.sort_by(f64::total_cmp);
        for est in montecarlo::estimate_var(&cfg).unwrap().estimates {
            if est.value.to_bits() != all[(est.rank - 1) as usize].to_bits() {
                mismatches += 1.0;
            }
        }
    }
    parts.push(check("sketch_vs_sort", mismatches, 0.0));

    // precision round trip
    let mut pts = Points::new(9);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let q = PrecisionQuery::new(pts.range(0.5, 0.99999), pts.range(1.0, 1e6), pts.range(1e-6, 1.0)).unwrap();
        let n = pts.range(10.0, 1e10).round();
        let eps = 2.0 * quantile_stddev(&q, n).unwrap() / q.quantile;
        let back = required_n(&q, eps).unwrap() as f64;
        // the ceiling may land one above n when rounding pushes past it
        worst = worst.max(((back - n).abs() - 1.0).max(0.0) / n);
    }
    parts.push(check("precision_roundtrip", worst, 1e-12));

    Outcome {
        name: "property_suites",
        failures: failed,
        detail: parts.join(", "),
    }
}

fn performance() -> Outcome {
    let consts = InterpolationConstants::default();
    let mut slowest = (0.0f64, String::new());
    for mode in [EndpointsMode::Table1, EndpointsMode::Fixed] {
        for e in catalog::table1() {
            for alpha in catalog::ALPHAS {
                let i = inputs(&e, alpha, mode.resolve(e.endpoints));
                for m in Method::ALL {
                    let t = Instant::now();
                    let _ = approx::estimate(m, &i, &consts);
                    let s = t.elapsed().as_secs_f64();
                    if s > slowest.0 {
                        slowest = (s, format!("{}/{}@{alpha}", e.label, m.as_str()));
                    }
                }
            }
        }
    }
    Outcome {
        name: "performance",
        failures: if slowest.0 < 1.0 {
            Vec::new()
        } else {
            vec!["performance/call".to_string()]
        },
        detail: format!("slowest call {:.6}s ({})", slowest.0, slowest.1),
    }
}

fn main() -> ExitCode {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("T1_means", table1_means),
        ("T2_deterministic", || {
            deterministic("T2_deterministic", "T2", 0.999, 10.0)
        }),
        ("T3_deterministic", || {
            deterministic("T3_deterministic", "T3", 0.9997, 10.0)
        }),
        ("T5_fixed_endpoints", fixed_endpoints),
        ("MC_oracle", mc_oracle),
        ("T6_simstudy", simstudy),
        ("property_suites", property_suites),
        ("performance", performance),
    ];
    let mut unexpected = 0;
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let o = run();
        let verdict = if o.failures.is_empty() {
            "PASS"
        } else if o.failures.iter().all(|f| DOCUMENTED_FAILURES.contains(&f.as_str())) {
            "FAIL (documented)"
        } else {
            unexpected += 1;
            "FAIL"
        };
        if o.failures.is_empty() {
            println!("{verdict} {}: {}", o.name, o.detail);
        } else {
            println!("{verdict} {}: {} [{}]", o.name, o.detail, o.failures.join(", "));
        }
    }
    if unexpected > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
