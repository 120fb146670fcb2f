//! Single-loss approximations of the aggregate-loss quantile and their
//! interpolated variants across the `ξ ≈ 1` bias zone.
//!
//! With `s = (1 - α)/λ` and base term `F⁻¹(1 - s)`:
//!
//! * `ξ < 1`: `base + λ μ`
//! * `ξ = 1`: `base + λ μ_F(base)`
//! * `1 < ξ < 2`: `base - (1 - α) base c_ξ / (1 - 1/ξ)`
//!
//! ISLA and MISLA replace the correction term inside `(ξ_low, ξ_high)` by a
//! root-scale interpolation between two anchor corrections.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::severity::SeverityModel;
use crate::specfun::gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Sla,
    Isla,
    Misla,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Sla, Method::Isla, Method::Misla];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sla => "SLA",
            Method::Isla => "ISLA",
            Method::Misla => "MISLA",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::parse(format!("unknown method `{s}` (expected sla, isla or misla)")))
    }
}

/// Which formula produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `ξ < 1` or no tail index: the mean correction.
    FiniteMean,
    /// `ξ = 1`: the limited-expected-value correction.
    UnitIndex,
    /// `1 < ξ < 2`: the `c_ξ` correction.
    InfiniteMean,
    /// MISLA between `ξ_low` and 1.
    LowInterpolation,
    /// MISLA between 1 and `ξ_high`.
    HighInterpolation,
    /// ISLA between `ξ_low` and `ξ_high`.
    Interpolation,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::FiniteMean => "finite-mean",
            Branch::UnitIndex => "unit-index",
            Branch::InfiniteMean => "infinite-mean",
            Branch::LowInterpolation => "low-interpolation",
            Branch::HighInterpolation => "high-interpolation",
            Branch::Interpolation => "interpolation",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Interpolation grid resolution and root exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationConstants {
    pub pre: f64,
    pub root: f64,
}

impl Default for InterpolationConstants {
    fn default() -> Self {
        Self {
            pre: 1000.0,
            root: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxInputs {
    pub model: SeverityModel,
    pub lambda: f64,
    pub alpha: f64,
    pub endpoints: Option<(f64, f64)>,
}

impl ApproxInputs {
    pub fn new(model: SeverityModel, lambda: f64, alpha: f64, endpoints: Option<(f64, f64)>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if let Some((lo, hi)) = endpoints {
            if !(lo > 0.0 && lo < 1.0 && hi > 1.0 && hi < 2.0) {
                return Err(Error::domain(format!(
                    "endpoints must satisfy 0 < low < 1 < high < 2, got ({lo}, {hi})"
                )));
            }
        }
        Ok(Self {
            model,
            lambda,
            alpha,
            endpoints,
        })
    }

    /// Same inputs with the model's tail index reset to `xi`.
    pub fn with_tail_index(&self, xi: f64) -> Result<Self> {
        Ok(Self {
            model: self.model.with_tail_index(xi)?,
            ..*self
        })
    }

    /// Tail probability `(1 - α)/λ` at which the base quantile is taken.
    pub fn tail_prob(&self) -> f64 {
        (1.0 - self.alpha) / self.lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileEstimate {
    pub method: Method,
    pub value: f64,
    pub branch: Branch,
    pub base_term: f64,
    /// Signed; `value == base_term + correction_term`.
    pub correction_term: f64,
    /// Error bound of the limited-expected-value integral, when one was used.
    pub integration_error: Option<f64>,
    /// Set in the high MISLA branch: the interpolated endpoint is added while
    /// the `ξ_high` closed form subtracts the same magnitude.
    pub sign_discrepancy: bool,
}

impl QuantileEstimate {
    fn new(method: Method, branch: Branch, base: f64, correction: f64) -> Self {
        Self {
            method,
            value: base + correction,
            branch,
            base_term: base,
            correction_term: correction,
            integration_error: None,
            sign_discrepancy: false,
        }
    }
}

/// `c_ξ = (1 - ξ) Γ²(1 - 1/ξ) / (2 Γ(1 - 2/ξ))` for `1 < ξ < 2`.
pub fn c_xi(xi: f64) -> Result<f64> {
    if !(xi > 1.0 && xi < 2.0) {
        return Err(Error::domain(format!("c_xi requires 1 < xi < 2, got {xi}")));
    }
    let g1 = gamma(1.0 - 1.0 / xi)?;
    let g2 = gamma(1.0 - 2.0 / xi)?;
    Ok((1.0 - xi) * g1 * g1 / (2.0 * g2))
}

/// Magnitude of the heavy-tail correction, `(1 - α) q c_ξ / (1 - 1/ξ)`.
fn heavy_correction(alpha: f64, q: f64, xi: f64) -> Result<f64> {
    Ok((1.0 - alpha) * q * c_xi(xi)? / (1.0 - 1.0 / xi))
}

/// `λ μ_F(q)` on `model`, with the integration error bound.
fn unit_correction(model: &SeverityModel, lambda: f64, q: f64) -> Result<(f64, f64)> {
    let r = quadrature::mu_f(model, q)?;
    if !r.converged {
        return Err(Error::NonConvergence(format!(
            "limited expected value of {model} at {q} after {} panels",
            r.panels
        )));
    }
    Ok((lambda * r.value, lambda * r.est_error))
}

fn base_term(inputs: &ApproxInputs) -> Result<f64> {
    inputs.model.upper_quantile(inputs.tail_prob())
}

/// Root-scale interpolation `[LCT^{1/R} + CIR (HCT^{1/R} - LCT^{1/R}) / FRC]^R`.
pub fn interpolate(
    low: f64,
    high: f64,
    cir: f64,
    frc: f64,
    consts: &InterpolationConstants,
    branch: Branch,
) -> Result<f64> {
    for (name, v) in [("low correction", low), ("high correction", high)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Internal {
                branch: branch.to_string(),
                message: format!("{name} must be finite and nonnegative, got {v}"),
            });
        }
    }
    let r = consts.root;
    let l = low.powf(1.0 / r);
    let drs = (high.powf(1.0 / r) - l) / frc;
    Ok((l + cir * drs).powf(r))
}

/// Plain single-loss approximation.
pub fn sla(inputs: &ApproxInputs) -> Result<QuantileEstimate> {
    let base = base_term(inputs)?;
    sla_with_base(inputs, base, Method::Sla)
}

fn sla_with_base(inputs: &ApproxInputs, base: f64, method: Method) -> Result<QuantileEstimate> {
    let m = &inputs.model;
    let lambda = inputs.lambda;
    let xi = match m.tail_index() {
        None => {
            return Ok(QuantileEstimate::new(
                method,
                Branch::FiniteMean,
                base,
                lambda * m.mean(),
            ))
        }
        Some(xi) => xi,
    };
    if xi < 1.0 {
        let mean = m.mean();
        if !mean.is_finite() {
            return Err(Error::domain(format!("{m} has tail index {xi} but no finite mean")));
        }
        Ok(QuantileEstimate::new(method, Branch::FiniteMean, base, lambda * mean))
    } else if xi == 1.0 {
        let (c, err) = unit_correction(m, lambda, base)?;
        let mut e = QuantileEstimate::new(method, Branch::UnitIndex, base, c);
        e.integration_error = Some(err);
        Ok(e)
    } else if xi < 2.0 {
        let c = heavy_correction(inputs.alpha, base, xi)?;
        Ok(QuantileEstimate::new(method, Branch::InfiniteMean, base, -c))
    } else {
        Err(Error::domain(format!(
            "tail index {xi} >= 2 is outside the approximation's range"
        )))
    }
}

fn require_endpoints(inputs: &ApproxInputs) -> Result<(f64, f64)> {
    inputs
        .endpoints
        .ok_or_else(|| Error::domain(format!("interpolation endpoints are required for {}", inputs.model)))
}

/// Modified interpolated SLA: two root-scale interpolations anchored on the
/// `ξ = 1` correction.
pub fn misla(inputs: &ApproxInputs, consts: &InterpolationConstants) -> Result<QuantileEstimate> {
    let base = base_term(inputs)?;
    let Some(xi) = inputs.model.tail_index() else {
        return sla_with_base(inputs, base, Method::Misla);
    };
    let (lo, hi) = require_endpoints(inputs)?;
    if xi <= lo || xi >= hi || xi == 1.0 {
        return sla_with_base(inputs, base, Method::Misla);
    }
    let s = inputs.tail_prob();
    let lambda = inputs.lambda;
    let m1 = inputs.model.with_tail_index(1.0)?;
    let (unit, unit_err) = unit_correction(&m1, lambda, m1.upper_quantile(s)?)?;
    let mut est = if xi < 1.0 {
        let lct = lambda * inputs.model.with_tail_index(lo)?.mean();
        let ict = interpolate(
            lct,
            unit,
            (xi - lo) * consts.pre,
            (1.0 - lo) * consts.pre,
            consts,
            Branch::LowInterpolation,
        )?;
        QuantileEstimate::new(Method::Misla, Branch::LowInterpolation, base, ict)
    } else {
        let q_hi = inputs.model.with_tail_index(hi)?.upper_quantile(s)?;
        let hct = heavy_correction(inputs.alpha, q_hi, hi)?;
        let ict = interpolate(
            unit,
            hct,
            (xi - 1.0) * consts.pre,
            (hi - 1.0) * consts.pre,
            consts,
            Branch::HighInterpolation,
        )?;
        let mut e = QuantileEstimate::new(Method::Misla, Branch::HighInterpolation, base, ict);
        e.sign_discrepancy = hct > 0.0;
        e
    };
    est.integration_error = Some(unit_err);
    Ok(est)
}

/// Interpolated SLA: one root-scale interpolation from the `ξ_low` mean
/// correction to the `ξ_high` heavy-tail correction magnitude.
pub fn isla(inputs: &ApproxInputs, consts: &InterpolationConstants) -> Result<QuantileEstimate> {
    let base = base_term(inputs)?;
    let Some(xi) = inputs.model.tail_index() else {
        return sla_with_base(inputs, base, Method::Isla);
    };
    let (lo, hi) = require_endpoints(inputs)?;
    if xi <= lo || xi >= hi {
        return sla_with_base(inputs, base, Method::Isla);
    }
    let s = inputs.tail_prob();
    let lct = inputs.lambda * inputs.model.with_tail_index(lo)?.mean();
    let q_hi = inputs.model.with_tail_index(hi)?.upper_quantile(s)?;
    let hct = heavy_correction(inputs.alpha, q_hi, hi)?;
    let ict = interpolate(
        lct,
        hct,
        (xi - lo) * consts.pre,
        (hi - lo) * consts.pre,
        consts,
        Branch::Interpolation,
    )?;
    Ok(QuantileEstimate::new(Method::Isla, Branch::Interpolation, base, ict))
}

/// Dispatches on `method`.
pub fn estimate(method: Method, inputs: &ApproxInputs, consts: &InterpolationConstants) -> Result<QuantileEstimate> {
    match method {
        Method::Sla => sla(inputs),
        Method::Isla => isla(inputs, consts),
        Method::Misla => misla(inputs, consts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub xi: f64,
    pub sla: QuantileEstimate,
    pub isla: QuantileEstimate,
    pub misla: QuantileEstimate,
}

/// Evaluates all three methods on the model re-tail-indexed to each grid value.
pub fn sweep(inputs: &ApproxInputs, grid: &[f64], consts: &InterpolationConstants) -> Result<Vec<SweepPoint>> {
    grid.iter()
        .map(|&xi| {
            if !(xi > 0.0 && xi < 2.0) {
                return Err(Error::domain(format!("sweep grid value {xi} outside (0, 2)")));
            }
            let at = inputs.with_tail_index(xi)?;
            Ok(SweepPoint {
                xi,
                sla: sla(&at)?,
                isla: isla(&at, consts)?,
                misla: misla(&at, consts)?,
            })
        })
        .collect()
}

/// Evenly spaced grid `start, start + step, …` up to `end` inclusive
/// (with a half-step tolerance against rounding).
pub fn grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && end.is_finite() && end >= start) {
        return Err(Error::domain(format!("invalid grid {start}:{end}:{step}")));
    }
    let n = ((end - start) / step + 0.5).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}
