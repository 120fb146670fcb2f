//! Sampling precision of an empirical quantile.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionQuery {
    pub alpha: f64,
    pub quantile: f64,
    pub density: f64,
}

impl PrecisionQuery {
    pub fn new(alpha: f64, quantile: f64, density: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::domain(format!(
                "density at the quantile must be positive, got {density}"
            )));
        }
        if !quantile.is_finite() {
            return Err(Error::domain(format!("quantile must be finite, got {quantile}")));
        }
        Ok(Self {
            alpha,
            quantile,
            density,
        })
    }
}

/// Asymptotic standard deviation `√(α(1-α)) / (f √n)` of the sample
/// `α`-quantile from `n` observations.
pub fn quantile_stddev(q: &PrecisionQuery, n: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(Error::domain(format!("sample size must be at least 1, got {n}")));
    }
    Ok((q.alpha * (1.0 - q.alpha)).sqrt() / (q.density * n.sqrt()))
}

/// Smallest `n` for which two standard deviations are within a fraction
/// `eps` of the quantile: `⌈4α(1-α) / (ε² (f q)²)⌉`.
pub fn required_n(q: &PrecisionQuery, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("relative error must be positive, got {eps}")));
    }
    let fq = q.density * q.quantile;
    if !(fq.abs() > 0.0) {
        return Err(Error::domain("density times quantile must be nonzero"));
    }
    let n = 4.0 * q.alpha * (1.0 - q.alpha) / (eps * eps * fq * fq);
    if !(n.is_finite() && n < u64::MAX as f64) {
        return Err(Error::domain(format!("required sample size overflows ({n})")));
    }
    Ok(n.ceil().max(1.0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_example() {
        let q = PrecisionQuery::new(0.999, 0.999, 1.0).unwrap();
        let sd = quantile_stddev(&q, 1e6).unwrap();
        assert!((sd - 0.000999f64.sqrt() / 1000.0).abs() < 1e-18);
        assert!((sd - 3.161e-5).abs() < 1e-8);
        let half = quantile_stddev(&q, 4e6).unwrap();
        assert!((half * 2.0 - sd).abs() <= f64::EPSILON * sd);
    }

    #[test]
    fn required_n_example() {
        let q = PrecisionQuery::new(0.999, 1.0, 1.0).unwrap();
        let n = required_n(&q, 0.1).unwrap();
        assert_eq!(n, (4.0f64 * 0.999 * 0.001 / 0.01).ceil() as u64);
        assert!(required_n(&q, 0.0).is_err());
        assert!(PrecisionQuery::new(0.999, 1.0, 0.0).is_err());
        assert!(quantile_stddev(&q, 0.0).is_err());
    }
}
