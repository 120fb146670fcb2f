//! The heavy-tailed severity catalog.
//!
//! Nine two-parameter families, three of which (GPD, LogGamma, LogNormal)
//! may be left-truncated at a data-collection threshold `H`. Every model
//! exposes its density, distribution and survival functions, a quantile
//! function that stays accurate far into the upper tail, the analytic mean
//! and the tail index.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::specfun::{
    beta_pair_xy, gamma, gamma_pair_unchecked, inv_beta_impl, inv_gamma_impl, ln_gamma_unchecked, norm_cdf, norm_isf,
    norm_ppf, norm_sf,
};

/// Short catalog tag of a severity family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyTag {
    BetaPrime,
    Frechet,
    Gpd,
    InverseGamma,
    InverseParalogistic,
    LogGamma,
    LogLogistic,
    LogNormal,
    Paralogistic,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 9] = [
        FamilyTag::BetaPrime,
        FamilyTag::Frechet,
        FamilyTag::Gpd,
        FamilyTag::InverseGamma,
        FamilyTag::InverseParalogistic,
        FamilyTag::LogGamma,
        FamilyTag::LogLogistic,
        FamilyTag::LogNormal,
        FamilyTag::Paralogistic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::BetaPrime => "BETAP",
            FamilyTag::Frechet => "FRCH",
            FamilyTag::Gpd => "GPD",
            FamilyTag::InverseGamma => "IGAM",
            FamilyTag::InverseParalogistic => "IPARA",
            FamilyTag::LogGamma => "LOGG",
            FamilyTag::LogLogistic => "LOGL",
            FamilyTag::LogNormal => "LOGN",
            FamilyTag::Paralogistic => "PARA",
        }
    }

    /// Families the catalog allows to be left-truncated.
    pub fn truncatable(self) -> bool {
        matches!(self, FamilyTag::Gpd | FamilyTag::LogGamma | FamilyTag::LogNormal)
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::parse(format!("unknown severity family `{s}`")))
    }
}

/// A parameterized base (untruncated) family.
///
/// Parameter order matches the textual form `FAMILY(p1,p2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    BetaPrime { alpha: f64, beta: f64 },
    Frechet { shape: f64, scale: f64 },
    Gpd { xi: f64, theta: f64 },
    InverseGamma { shape: f64, scale: f64 },
    InverseParalogistic { shape: f64, scale: f64 },
    LogGamma { shape: f64, rate: f64 },
    LogLogistic { shape: f64, scale: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Paralogistic { shape: f64, scale: f64 },
}

impl Family {
    /// Builds a family from its tag and the two parameters in textual order.
    pub fn from_params(tag: FamilyTag, p1: f64, p2: f64) -> Self {
        match tag {
            FamilyTag::BetaPrime => Family::BetaPrime { alpha: p1, beta: p2 },
            FamilyTag::Frechet => Family::Frechet { shape: p1, scale: p2 },
            FamilyTag::Gpd => Family::Gpd { xi: p1, theta: p2 },
            FamilyTag::InverseGamma => Family::InverseGamma { shape: p1, scale: p2 },
            FamilyTag::InverseParalogistic => Family::InverseParalogistic { shape: p1, scale: p2 },
            FamilyTag::LogGamma => Family::LogGamma { shape: p1, rate: p2 },
            FamilyTag::LogLogistic => Family::LogLogistic { shape: p1, scale: p2 },
            FamilyTag::LogNormal => Family::LogNormal { mu: p1, sigma: p2 },
            FamilyTag::Paralogistic => Family::Paralogistic { shape: p1, scale: p2 },
        }
    }

    pub fn tag(&self) -> FamilyTag {
        match self {
            Family::BetaPrime { .. } => FamilyTag::BetaPrime,
            Family::Frechet { .. } => FamilyTag::Frechet,
            Family::Gpd { .. } => FamilyTag::Gpd,
            Family::InverseGamma { .. } => FamilyTag::InverseGamma,
            Family::InverseParalogistic { .. } => FamilyTag::InverseParalogistic,
            Family::LogGamma { .. } => FamilyTag::LogGamma,
            Family::LogLogistic { .. } => FamilyTag::LogLogistic,
            Family::LogNormal { .. } => FamilyTag::LogNormal,
            Family::Paralogistic { .. } => FamilyTag::Paralogistic,
        }
    }

    /// The two parameters in textual order.
    pub fn params(&self) -> (f64, f64) {
        match *self {
            Family::BetaPrime { alpha, beta } => (alpha, beta),
            Family::Frechet { shape, scale }
            | Family::InverseGamma { shape, scale }
            | Family::InverseParalogistic { shape, scale }
            | Family::LogLogistic { shape, scale }
            | Family::Paralogistic { shape, scale } => (shape, scale),
            Family::Gpd { xi, theta } => (xi, theta),
            Family::LogGamma { shape, rate } => (shape, rate),
            Family::LogNormal { mu, sigma } => (mu, sigma),
        }
    }

    fn validate(&self) -> Result<()> {
        let (p1, p2) = self.params();
        if !p1.is_finite() || !p2.is_finite() {
            return Err(Error::param(format!("{}: parameters must be finite", self.tag())));
        }
        let ok = match *self {
            Family::Gpd { xi, theta } => xi >= 0.0 && theta > 0.0,
            Family::LogNormal { sigma, .. } => sigma > 0.0,
            _ => p1 > 0.0 && p2 > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!(
                "{}({p1}, {p2}): parameters outside the admissible range",
                self.tag()
            )))
        }
    }

    /// Infimum of the support.
    pub fn support_min(&self) -> f64 {
        match self {
            Family::LogGamma { .. } => 1.0,
            _ => 0.0,
        }
    }

    /// `(F(x), 1 - F(x))`, each side evaluated without cancellation.
    pub fn cdf_sf(&self, x: f64) -> (f64, f64) {
        if x <= self.support_min() {
            return (0.0, 1.0);
        }
        if x == f64::INFINITY {
            return (1.0, 0.0);
        }
        match *self {
            Family::BetaPrime { alpha, beta } => beta_pair_xy(x / (1.0 + x), 1.0 / (1.0 + x), alpha, beta),
            Family::Frechet { shape, scale } => {
                let t = (scale / x).powf(shape);
                ((-t).exp(), -(-t).exp_m1())
            }
            Family::Gpd { xi, theta } => {
                let sf = gpd_sf(xi, theta, x);
                (-gpd_log_sf(xi, theta, x).exp_m1(), sf)
            }
            Family::InverseGamma { shape, scale } => {
                let (p, q) = gamma_pair_unchecked(shape, scale / x);
                (q, p)
            }
            Family::InverseParalogistic { shape, scale } => {
                let l = -shape * (scale / x).powf(shape).ln_1p();
                (l.exp(), -l.exp_m1())
            }
            Family::LogGamma { shape, rate } => gamma_pair_unchecked(shape, rate * x.ln()),
            Family::LogLogistic { shape, scale } => {
                let r = (x / scale).powf(shape);
                (r / (1.0 + r), 1.0 / (1.0 + r))
            }
            Family::LogNormal { mu, sigma } => {
                let z = (x.ln() - mu) / sigma;
                (norm_cdf(z), norm_sf(z))
            }
            Family::Paralogistic { shape, scale } => {
                let l = -shape * (x / scale).powf(shape).ln_1p();
                (-l.exp_m1(), l.exp())
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.support_min() || !x.is_finite() {
            return 0.0;
        }
        let v = match *self {
            Family::BetaPrime { alpha, beta } => {
                let lb = ln_gamma_unchecked(alpha) + ln_gamma_unchecked(beta) - ln_gamma_unchecked(alpha + beta);
                ((alpha - 1.0) * x.ln() - (alpha + beta) * x.ln_1p() - lb).exp()
            }
            Family::Frechet { shape, scale } => {
                let r = scale / x;
                ((shape / scale).ln() + (shape + 1.0) * r.ln() - r.powf(shape)).exp()
            }
            Family::Gpd { xi, theta } => {
                if xi == 0.0 {
                    (-x / theta).exp() / theta
                } else {
                    (-(1.0 / xi + 1.0) * (xi * x / theta).ln_1p()).exp() / theta
                }
            }
            Family::InverseGamma { shape, scale } => {
                (shape * scale.ln() - ln_gamma_unchecked(shape) - (shape + 1.0) * x.ln() - scale / x).exp()
            }
            Family::InverseParalogistic { shape, scale } => {
                let lr = (x / scale).ln();
                (2.0 * shape.ln() + shape * shape * lr - x.ln() - (shape + 1.0) * (shape * lr).exp().ln_1p()).exp()
            }
            Family::LogGamma { shape, rate } => {
                let lx = x.ln();
                (shape * rate.ln() - ln_gamma_unchecked(shape) + (shape - 1.0) * lx.ln() - (rate + 1.0) * lx).exp()
            }
            Family::LogLogistic { shape, scale } => {
                let r = (x / scale).powf(shape);
                (shape / x) / (r + 2.0 + 1.0 / r)
            }
            Family::LogNormal { mu, sigma } => {
                let z = (x.ln() - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * x * (2.0 * PI).sqrt())
            }
            Family::Paralogistic { shape, scale } => {
                let lr = (x / scale).ln();
                (2.0 * shape.ln() - x.ln() + shape * lr - (1.0 + shape) * (shape * lr).exp().ln_1p()).exp()
            }
        };
        if v.is_nan() {
            0.0
        } else {
            v
        }
    }

    /// Quantile given both `p` and its complement `s = 1 - p`; the smaller of
    /// the two drives the computation.
    pub fn quantile_ps(&self, p: f64, s: f64) -> f64 {
        if p <= 0.0 {
            return self.support_min();
        }
        if s <= 0.0 {
            return f64::INFINITY;
        }
        let upper = s < p;
        // ln p and ln s, each without cancellation
        let ln_p = if upper { (-s).ln_1p() } else { p.ln() };
        let ln_s = if upper { s.ln() } else { (-p).ln_1p() };
        match *self {
            Family::BetaPrime { alpha, beta } => {
                // x = t/(1-t) with t ~ Beta(α, β); solve for whichever of
                // t, 1-t is small at the bulk of the mass
                if alpha > beta {
                    let y = inv_beta_impl(s, p, beta, alpha);
                    (1.0 - y) / y
                } else {
                    let q = inv_beta_impl(p, s, alpha, beta);
                    q / (1.0 - q)
                }
            }
            Family::Frechet { shape, scale } => scale * (-ln_p).powf(-1.0 / shape),
            Family::Gpd { xi, theta } => {
                if xi == 0.0 {
                    -theta * ln_s
                } else {
                    theta * (-xi * ln_s).exp_m1() / xi
                }
            }
            Family::InverseGamma { shape, scale } => {
                let t = inv_gamma_impl(shape, s, p);
                scale / t
            }
            Family::InverseParalogistic { shape, scale } => scale * (-ln_p / shape).exp_m1().powf(-1.0 / shape),
            Family::LogGamma { shape, rate } => {
                let t = inv_gamma_impl(shape, p, s);
                (t / rate).exp()
            }
            Family::LogLogistic { shape, scale } => scale * (p / s).powf(1.0 / shape),
            Family::LogNormal { mu, sigma } => {
                let z = if upper {
                    norm_isf(s).unwrap_or(f64::INFINITY)
                } else {
                    norm_ppf(p).unwrap_or(f64::NEG_INFINITY)
                };
                (mu + sigma * z).exp()
            }
            Family::Paralogistic { shape, scale } => scale * (-ln_s / shape).exp_m1().powf(1.0 / shape),
        }
    }

    /// Analytic mean; `+∞` when the finite-mean condition fails.
    pub fn mean(&self) -> f64 {
        let inf = f64::INFINITY;
        match *self {
            Family::BetaPrime { alpha, beta } => {
                if beta > 1.0 {
                    alpha / (beta - 1.0)
                } else {
                    inf
                }
            }
            Family::Frechet { shape, scale } => {
                if shape > 1.0 {
                    scale * gamma(1.0 - 1.0 / shape).unwrap_or(inf)
                } else {
                    inf
                }
            }
            Family::Gpd { xi, theta } => {
                if xi < 1.0 {
                    theta / (1.0 - xi)
                } else {
                    inf
                }
            }
            Family::InverseGamma { shape, scale } => {
                if shape > 1.0 {
                    scale / (shape - 1.0)
                } else {
                    inf
                }
            }
            Family::InverseParalogistic { shape, scale } => {
                if shape > 1.0 {
                    scale
                        * (ln_gamma_unchecked(1.0 - 1.0 / shape) + ln_gamma_unchecked(shape + 1.0 / shape)
                            - ln_gamma_unchecked(shape))
                        .exp()
                } else {
                    inf
                }
            }
            Family::LogGamma { shape, rate } => {
                if rate > 1.0 {
                    (shape * (rate.ln() - (rate - 1.0).ln())).exp()
                } else {
                    inf
                }
            }
            Family::LogLogistic { shape, scale } => {
                if shape > 1.0 {
                    scale * PI / (shape * (PI / shape).sin())
                } else {
                    inf
                }
            }
            Family::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Family::Paralogistic { shape, scale } => {
                if shape > 1.0 {
                    scale
                        * (ln_gamma_unchecked(1.0 + 1.0 / shape) + ln_gamma_unchecked(shape - 1.0 / shape)
                            - ln_gamma_unchecked(shape))
                        .exp()
                } else {
                    inf
                }
            }
        }
    }

    /// Regular-variation index of the survival function, if the family has one.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            Family::BetaPrime { beta, .. } => Some(1.0 / beta),
            Family::Frechet { shape, .. }
            | Family::InverseGamma { shape, .. }
            | Family::InverseParalogistic { shape, .. }
            | Family::LogLogistic { shape, .. } => Some(1.0 / shape),
            Family::Gpd { xi, .. } => Some(xi),
            Family::LogGamma { rate, .. } => Some(1.0 / rate),
            Family::LogNormal { .. } => None,
            Family::Paralogistic { shape, .. } => Some(1.0 / (shape * shape)),
        }
    }

    /// Resets the tail-governing parameter; other parameters are unchanged.
    /// The parameter is nudged by a few ulps where needed so that
    /// `tail_index()` returns `xi` exactly.
    pub fn with_tail_index(&self, xi: f64) -> Option<Family> {
        let recip = |index: fn(f64) -> f64| exact_preimage(xi, 1.0 / xi, index);
        let f = match *self {
            Family::BetaPrime { alpha, .. } => Family::BetaPrime {
                alpha,
                beta: recip(|b| 1.0 / b),
            },
            Family::Frechet { scale, .. } => Family::Frechet {
                shape: recip(|a| 1.0 / a),
                scale,
            },
            Family::Gpd { theta, .. } => Family::Gpd { xi, theta },
            Family::InverseGamma { scale, .. } => Family::InverseGamma {
                shape: recip(|a| 1.0 / a),
                scale,
            },
            Family::InverseParalogistic { scale, .. } => Family::InverseParalogistic {
                shape: recip(|a| 1.0 / a),
                scale,
            },
            Family::LogGamma { shape, .. } => Family::LogGamma {
                shape,
                rate: recip(|r| 1.0 / r),
            },
            Family::LogLogistic { scale, .. } => Family::LogLogistic {
                shape: recip(|a| 1.0 / a),
                scale,
            },
            Family::LogNormal { .. } => return None,
            Family::Paralogistic { scale, .. } => Family::Paralogistic {
                shape: exact_preimage(xi, 1.0 / xi.sqrt(), |a| 1.0 / (a * a)),
                scale,
            },
        };
        Some(f)
    }
}

/// A float within a few ulps of `guess` that `index` maps exactly to
/// `target`, or `guess` itself when none exists.
fn exact_preimage(target: f64, guess: f64, index: fn(f64) -> f64) -> f64 {
    if index(guess) == target || !(guess > 0.0 && guess.is_finite()) {
        return guess;
    }
    for k in 1..=8u64 {
        for cand in [f64::from_bits(guess.to_bits() + k), f64::from_bits(guess.to_bits() - k)] {
            if index(cand) == target {
                return cand;
            }
        }
    }
    guess
}

#[inline]
fn gpd_log_sf(xi: f64, theta: f64, x: f64) -> f64 {
    if xi == 0.0 {
        -x / theta
    } else {
        -(xi * x / theta).ln_1p() / xi
    }
}

#[inline]
fn gpd_sf(xi: f64, theta: f64, x: f64) -> f64 {
    gpd_log_sf(xi, theta, x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Truncation {
    threshold: f64,
    cdf_at: f64,
    sf_at: f64,
}

/// A validated severity distribution, optionally left-truncated at `H`.
///
/// Immutable after construction; parameters are checked eagerly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeverityModel {
    family: Family,
    truncation: Option<Truncation>,
    /// Set by `with_tail_index` when no parameter value reproduces the
    /// requested index exactly in floating point.
    requested_tail: Option<f64>,
}

impl SeverityModel {
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(Self {
            family,
            truncation: None,
            requested_tail: None,
        })
    }

    /// Left-truncated model `g = f / (1 - F(H))` on `[H, ∞)`.
    pub fn truncated(family: Family, threshold: f64) -> Result<Self> {
        family.validate()?;
        let tag = family.tag();
        if !tag.truncatable() {
            return Err(Error::param(format!("truncation is not supported for {tag}")));
        }
        if !(threshold.is_finite() && threshold > family.support_min()) {
            return Err(Error::param(format!(
                "threshold {threshold} must exceed the support minimum {}",
                family.support_min()
            )));
        }
        let (cdf_at, sf_at) = family.cdf_sf(threshold);
        if !(sf_at > 0.0) {
            return Err(Error::param(format!(
                "threshold {threshold} leaves no probability mass"
            )));
        }
        Ok(Self {
            family,
            truncation: Some(Truncation {
                threshold,
                cdf_at,
                sf_at,
            }),
            requested_tail: None,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn tag(&self) -> FamilyTag {
        self.family.tag()
    }

    pub fn threshold(&self) -> Option<f64> {
        self.truncation.map(|t| t.threshold)
    }

    pub fn is_truncated(&self) -> bool {
        self.truncation.is_some()
    }

    /// Catalog label, e.g. `GPD` or `TLOGN`.
    pub fn label(&self) -> String {
        if self.is_truncated() {
            format!("T{}", self.tag())
        } else {
            self.tag().to_string()
        }
    }

    /// Infimum of the support: `H` when truncated, else the family's.
    pub fn lower_bound(&self) -> f64 {
        match self.truncation {
            Some(t) => t.threshold,
            None => self.family.support_min(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self.truncation {
            Some(t) if x < t.threshold => 0.0,
            Some(t) => self.family.pdf(x) / t.sf_at,
            None => self.family.pdf(x),
        }
    }

    /// `(G(x), 1 - G(x))` for the (possibly truncated) model.
    pub fn cdf_sf(&self, x: f64) -> (f64, f64) {
        match self.truncation {
            Some(t) if x <= t.threshold => (0.0, 1.0),
            Some(t) => {
                let (f, s) = self.family.cdf_sf(x);
                let sf = (s / t.sf_at).min(1.0);
                // the difference of the two tail masses cancels least when
                // taken on the side with less mass at H
                let cdf = if sf < 0.5 {
                    1.0 - sf
                } else if t.cdf_at > t.sf_at {
                    ((t.sf_at - s) / t.sf_at).max(0.0)
                } else {
                    ((f - t.cdf_at) / t.sf_at).max(0.0)
                };
                (cdf, sf)
            }
            None => self.family.cdf_sf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_sf(x).0
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.cdf_sf(x).1
    }

    /// Quantile at probability `p ∈ [0, 1]`; `p = 1` gives `+∞`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("quantile requires 0 <= p <= 1, got {p}")));
        }
        Ok(self.quantile_ps(p, 1.0 - p))
    }

    /// Upper-tail quantile: the `x` with `1 - G(x) = s`, accurate for tiny `s`.
    pub fn upper_quantile(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::domain(format!("tail probability must lie in [0, 1], got {s}")));
        }
        Ok(self.quantile_ps(1.0 - s, s))
    }

    fn quantile_ps(&self, p: f64, s: f64) -> f64 {
        match self.truncation {
            None => self.family.quantile_ps(p, s),
            Some(t) => {
                if p <= 0.0 {
                    return t.threshold;
                }
                // G^{-1}(p) = F^{-1}(F(H) + p (1 - F(H)))
                let base_p = t.cdf_at + p * t.sf_at;
                let base_s = s * t.sf_at;
                self.family.quantile_ps(base_p, base_s).max(t.threshold)
            }
        }
    }

    /// Analytic mean; `+∞` when it does not exist.
    pub fn mean(&self) -> f64 {
        let Some(t) = self.truncation else {
            return self.family.mean();
        };
        let h = t.threshold;
        match *self.family() {
            Family::Gpd { xi, theta } => {
                if xi < 1.0 {
                    (h + theta) / (1.0 - xi)
                } else {
                    f64::INFINITY
                }
            }
            Family::LogGamma { shape, rate } => {
                if rate > 1.0 {
                    let (_, q) = gamma_pair_unchecked(shape, (rate - 1.0) * h.ln());
                    self.family.mean() * q / t.sf_at
                } else {
                    f64::INFINITY
                }
            }
            Family::LogNormal { mu, sigma } => {
                let z = (mu + sigma * sigma - h.ln()) / sigma;
                (mu + 0.5 * sigma * sigma).exp() * norm_cdf(z) / t.sf_at
            }
            _ => unreachable!("truncation is restricted at construction"),
        }
    }

    pub fn tail_index(&self) -> Option<f64> {
        self.requested_tail.or(self.family.tail_index())
    }

    /// Copy of the model with the tail-governing parameter set so that
    /// `tail_index() == xi`; truncation and other parameters are kept.
    pub fn with_tail_index(&self, xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::domain(format!("target tail index must be positive, got {xi}")));
        }
        let family = self
            .family
            .with_tail_index(xi)
            .ok_or_else(|| Error::domain(format!("{} has no tail index to adjust", self.label())))?;
        let mut m = match self.truncation {
            Some(t) => Self::truncated(family, t.threshold)?,
            None => Self::new(family)?,
        };
        if family.tail_index() != Some(xi) {
            m.requested_tail = Some(xi);
        }
        Ok(m)
    }

    /// Inverse-transform draw for a uniform `u` in the open interval (0, 1).
    #[inline]
    pub fn sample(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        self.quantile_ps(u, 1.0 - u)
    }
}

impl fmt::Display for SeverityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p1, p2) = self.family.params();
        write!(f, "{}({p1},{p2}", self.label())?;
        if let Some(h) = self.threshold() {
            write!(f, ",H={h}")?;
        }
        f.write_str(")")
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad number `{s}`")))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad number `{s}`")))?;
        n / d
    } else {
        s.parse().map_err(|_| Error::parse(format!("bad number `{s}`")))?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::parse(format!("non-finite number `{s}`")))
    }
}

/// Parses `FAMILY(p1,p2)` or `TFAMILY(p1,p2,H=threshold)`; numbers may be
/// written as simple fractions such as `1/0.99`.
impl FromStr for SeverityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s
            .find('(')
            .ok_or_else(|| Error::parse(format!("missing `(` in `{s}`")))?;
        if !s.ends_with(')') {
            return Err(Error::parse(format!("missing `)` in `{s}`")));
        }
        let name = s[..open].trim().to_ascii_uppercase();
        let args: Vec<&str> = s[open + 1..s.len() - 1].split(',').map(str::trim).collect();
        let (tag, truncated) = match name.parse::<FamilyTag>() {
            Ok(tag) => (tag, false),
            Err(e) => match name.strip_prefix('T').map(str::parse::<FamilyTag>) {
                Some(Ok(tag)) if tag.truncatable() => (tag, true),
                _ => return Err(e),
            },
        };
        let expected = if truncated { 3 } else { 2 };
        if args.len() != expected {
            return Err(Error::parse(format!(
                "{name} takes {expected} arguments, got {} in `{s}`",
                args.len()
            )));
        }
        let family = Family::from_params(tag, parse_number(args[0])?, parse_number(args[1])?);
        if truncated {
            let h = args[2];
            let h = h
                .strip_prefix("H=")
                .or_else(|| h.strip_prefix("h="))
                .ok_or_else(|| Error::parse(format!("threshold must be written H=value in `{s}`")))?;
            SeverityModel::truncated(family, parse_number(h)?)
        } else {
            SeverityModel::new(family)
        }
    }
}
