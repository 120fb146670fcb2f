//! Maximum-likelihood fit of the generalized Pareto distribution.
//!
//! The likelihood is profiled over `τ = ξ/θ`: for fixed `τ` the optimal
//! shape is `ξ(τ) = mean(ln(1 + τ x))` and `θ = ξ/τ`, leaving a
//! one-dimensional search. `τ → 0` is the exponential limit `ξ = 0`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Upper clamp on the shape estimate.
    pub xi_max: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { xi_max: 2.0 }
    }
}

impl FitOptions {
    /// Restricts the fit to finite-mean models, `ξ < 1`.
    pub fn finite_mean() -> Self {
        Self { xi_max: 1.0 - 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub xi: f64,
    pub theta: f64,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// The unconstrained optimum lay above `xi_max`.
    pub clamped: bool,
    /// All observations were equal.
    pub degenerate: bool,
}

/// GPD log-likelihood; `-∞` outside the parameter space.
pub fn gpd_loglik(sample: &[f64], xi: f64, theta: f64) -> f64 {
    if !(theta > 0.0 && xi >= 0.0) {
        return f64::NEG_INFINITY;
    }
    let n = sample.len() as f64;
    if xi == 0.0 {
        return -n * theta.ln() - sample.iter().sum::<f64>() / theta;
    }
    let s: f64 = sample.iter().map(|&x| (xi * x / theta).ln_1p()).sum();
    -n * theta.ln() - (1.0 / xi + 1.0) * s
}

/// Gradient `(∂/∂ξ, ∂/∂θ)` of [`gpd_loglik`]; at `ξ = 0` the shape
/// derivative is the one-sided limit.
pub fn gpd_loglik_grad(sample: &[f64], xi: f64, theta: f64) -> (f64, f64) {
    let n = sample.len() as f64;
    let mut d_xi = 0.0;
    let mut d_theta = -n / theta;
    for &x in sample {
        let z = x / theta;
        let w = z / (1.0 + xi * z);
        d_theta += (1.0 + xi) * w / theta;
        let u = xi * z;
        d_xi += if u.abs() < 1e-3 {
            // series in ξ; the closed form cancels badly as ξ z → 0
            let z2 = z * z;
            0.5 * z2 - z + xi * (z2 - 2.0 * z2 * z / 3.0) + xi * xi * (0.75 * z2 * z2 - z2 * z)
        } else {
            (xi * z).ln_1p() / (xi * xi) - (1.0 / xi + 1.0) * w
        };
    }
    (d_xi, d_theta)
}

/// Profile log-likelihood at `τ > 0`, with the implied `ξ`.
fn profile(sample: &[f64], tau: f64) -> (f64, f64) {
    let n = sample.len() as f64;
    let xi = sample.iter().map(|&x| (tau * x).ln_1p()).sum::<f64>() / n;
    (-n * (xi / tau).ln() - n - n * xi, xi)
}

/// Golden-section maximization of `f` on `[a, b]` to absolute tolerance `tol`.
pub(crate) fn golden_max(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64, usize, bool) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for it in 0..200 {
        if (b - a).abs() <= tol {
            let (x, fx) = if fc > fd { (c, fc) } else { (d, fd) };
            return (x, fx, it, true);
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (x, fx) = if fc > fd { (c, fc) } else { (d, fd) };
    (x, fx, 200, false)
}

/// MLE with the default shape range `[0, 2]`.
pub fn gpd_mle(sample: &[f64]) -> Result<FitResult> {
    gpd_mle_with(sample, &FitOptions::default())
}

pub fn gpd_mle_with(sample: &[f64], opts: &FitOptions) -> Result<FitResult> {
    if sample.len() < 10 {
        return Err(Error::domain(format!(
            "GPD fit needs at least 10 observations, got {}",
            sample.len()
        )));
    }
    if let Some(x) = sample.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!("GPD fit needs positive finite losses, got {x}")));
    }
    if !(opts.xi_max > 0.0) {
        return Err(Error::domain(format!("xi_max must be positive, got {}", opts.xi_max)));
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let (lo, hi) = sample
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    let exponential = FitResult {
        xi: 0.0,
        theta: mean,
        loglik: gpd_loglik(sample, 0.0, mean),
        converged: true,
        iterations: 0,
        clamped: false,
        degenerate: false,
    };
    if hi - lo <= 1e-12 * hi {
        return Ok(FitResult {
            converged: false,
            degenerate: true,
            ..exponential
        });
    }

    // coarse grid in ln τ, then golden section around the best grid point
    const STEPS: usize = 48;
    let (t0, t1) = ((1e-6 / mean).ln(), (1e6 / mean).ln());
    let dt = (t1 - t0) / STEPS as f64;
    let pl = |t: f64| profile(sample, t.exp()).0;
    let values: Vec<f64> = (0..=STEPS).map(|i| pl(t0 + i as f64 * dt)).collect();
    let best = (0..=STEPS)
        .max_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap_or(0);
    let a = t0 + best.saturating_sub(1) as f64 * dt;
    let b = t0 + (best + 1).min(STEPS) as f64 * dt;
    let (t, _, iters, converged) = golden_max(a, b, 1e-9, pl);
    let tau = t.exp();
    let (_, xi) = profile(sample, tau);
    let mut fit = FitResult {
        xi,
        theta: xi / tau,
        loglik: gpd_loglik(sample, xi, xi / tau),
        converged,
        iterations: STEPS + 1 + iters,
        clamped: false,
        degenerate: false,
    };
    if best == 0 || fit.loglik < exponential.loglik {
        fit = FitResult {
            iterations: fit.iterations,
            ..exponential
        };
    }
    if fit.xi > opts.xi_max {
        // the constrained optimum lies on the boundary ξ = xi_max
        let xi = opts.xi_max;
        let (lt, _, it, ok) = golden_max((lo * 1e-6).ln(), (hi * 10.0).ln(), 1e-10, |lt| {
            gpd_loglik(sample, xi, lt.exp())
        });
        let theta = lt.exp();
        fit = FitResult {
            xi,
            theta,
            loglik: gpd_loglik(sample, xi, theta),
            converged: ok,
            iterations: fit.iterations + it,
            clamped: true,
            degenerate: false,
        };
    }
    Ok(fit)
}
