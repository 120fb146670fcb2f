//! Limited expected value `μ_F(x) = ∫_L^x [1 - F(s)] ds` by composite
//! Simpson with panel doubling.
//!
//! The integral runs from the support infimum `L` of the model passed in.
//! The survival function of a heavy-tailed model decays over many orders of
//! magnitude, so the integral is taken in the variable `u` with
//! `s = L + c (e^u - 1)`, which keeps the integrand smooth on a short interval.

use crate::error::{Error, Result};
use crate::severity::SeverityModel;

pub const INITIAL_PANELS: usize = 64;
pub const MAX_PANELS: usize = 1 << 22;
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    /// Richardson estimate `|S_n - S_{n/2}| / 15` of the last doubling.
    pub est_error: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Change of variable for the survival integral of `model` over `[L, x]`.
struct LogMap {
    lower: f64,
    scale: f64,
    u_max: f64,
}

impl LogMap {
    fn new(model: &SeverityModel, x: f64) -> Self {
        let lower = model.lower_bound();
        let median = model.quantile(0.5).unwrap_or(lower + 1.0);
        let mut scale = median - lower;
        if !(scale > 0.0 && scale.is_finite()) {
            scale = (x - lower).max(1.0);
        }
        let u_max = ((x - lower) / scale).ln_1p();
        Self { lower, scale, u_max }
    }

    #[inline]
    fn integrand(&self, model: &SeverityModel, u: f64) -> f64 {
        let g = self.scale * u.exp();
        model.sf(self.lower + g - self.scale) * g
    }
}

fn check(model: &SeverityModel, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::domain(format!("mu_F requires a finite upper limit, got {x}")));
    }
    if x < model.lower_bound() {
        return Err(Error::domain(format!(
            "mu_F upper limit {x} lies below the support bound {}",
            model.lower_bound()
        )));
    }
    Ok(())
}

/// Composite Simpson with a fixed (even) number of panels.
pub fn mu_f_fixed(model: &SeverityModel, x: f64, panels: usize) -> Result<f64> {
    check(model, x)?;
    if panels == 0 || !panels.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "panel count must be even and positive, got {panels}"
        )));
    }
    let map = LogMap::new(model, x);
    if map.u_max == 0.0 {
        return Ok(0.0);
    }
    let h = map.u_max / panels as f64;
    let mut sum = map.integrand(model, 0.0) + map.integrand(model, map.u_max);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * map.integrand(model, i as f64 * h);
    }
    Ok(sum * h / 3.0)
}

/// `μ_F(x)` with panel doubling from 64 panels until two successive values
/// agree to 1e-9 relative, or the 2^22 panel cap is reached.
pub fn mu_f(model: &SeverityModel, x: f64) -> Result<IntegralResult> {
    check(model, x)?;
    let map = LogMap::new(model, x);
    if map.u_max == 0.0 {
        return Ok(IntegralResult {
            value: 0.0,
            est_error: 0.0,
            panels: 0,
            converged: true,
        });
    }
    let b = map.u_max;
    let mut n = INITIAL_PANELS;
    let mut h = b / n as f64;
    let ends = map.integrand(model, 0.0) + map.integrand(model, b);
    let mut even = 0.0;
    let mut odd = 0.0;
    for i in 1..n {
        let f = map.integrand(model, i as f64 * h);
        if i % 2 == 0 {
            even += f;
        } else {
            odd += f;
        }
    }
    let mut prev = (ends + 4.0 * odd + 2.0 * even) * h / 3.0;
    loop {
        if n >= MAX_PANELS {
            return Ok(IntegralResult {
                value: prev,
                est_error: f64::NAN,
                panels: n,
                converged: false,
            });
        }
        n *= 2;
        h *= 0.5;
        even += odd;
        odd = (0..n / 2).map(|j| map.integrand(model, (2 * j + 1) as f64 * h)).sum();
        let cur = (ends + 4.0 * odd + 2.0 * even) * h / 3.0;
        let diff = (cur - prev).abs();
        let converged = diff <= REL_TOL * cur.abs();
        if converged || n >= MAX_PANELS {
            return Ok(IntegralResult {
                value: cur,
                est_error: diff / 15.0,
                panels: n,
                converged,
            });
        }
        prev = cur;
    }
}
