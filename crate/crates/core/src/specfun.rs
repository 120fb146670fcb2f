//! Special functions used by the severity catalog and the approximators.
//!
//! Everything here is double precision. Gamma uses a fixed 14-term Lanczos
//! series; the incomplete gamma and beta functions use the classical
//! series / modified-Lentz continued fraction split; the error function is
//! expressed through the incomplete gamma function of order one half.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const FPMIN: f64 = f64::MIN_POSITIVE / EPS;
const MAX_ITER: usize = 10_000;
/// Relative step below which a Halley iteration has reached the noise floor
/// of the incomplete-function evaluation; the error after such a step is
/// far smaller than the step itself.
const STEP_TOL: f64 = 1e-13;

const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

#[inline]
pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    let mut y = x;
    let tmp = x + 5.242_187_5;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = 0.999_999_999_999_997_092;
    for c in LANCZOS {
        y += 1.0;
        ser += c / y;
    }
    tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// The gamma function on the real line, excluding the poles at 0, -1, -2, ...
///
/// Negative arguments go through the reflection identity
/// `Γ(x) Γ(1 - x) = π / sin(πx)`.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("gamma of non-finite {x}")));
    }
    if x > 0.0 {
        if x > 171.6 {
            return Ok(f64::INFINITY);
        }
        return Ok(ln_gamma_unchecked(x).exp());
    }
    if x == x.floor() {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    let s = (PI * x).sin();
    Ok(PI / (s * ln_gamma_unchecked(1.0 - x).exp()))
}

/// Log of the complete beta function.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!("ln_beta requires a, b > 0, got ({a}, {b})")));
    }
    Ok(ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b))
}

fn check_gamma_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("incomplete gamma requires a > 0, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    Ok(())
}

/// Both regularized incomplete gamma functions `(P(a,x), Q(a,x))`.
///
/// The smaller of the two is always computed directly so the other is the
/// complement without cancellation in the quantity that matters.
pub fn reg_inc_gamma_pair(a: f64, x: f64) -> Result<(f64, f64)> {
    check_gamma_args(a, x)?;
    Ok(gamma_pair_unchecked(a, x))
}

pub(crate) fn gamma_pair_unchecked(a: f64, x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    let gln = ln_gamma_unchecked(a);
    let log_prefix = -x + a * x.ln() - gln;
    if x <= a + 1.0 {
        let p = lower_series(a, x, log_prefix);
        (p, 1.0 - p)
    } else {
        let q = upper_fraction(a, x, log_prefix);
        (1.0 - q, q)
    }
}

fn lower_series(a: f64, x: f64, log_prefix: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum * log_prefix.exp()).min(1.0)
}

fn upper_fraction(a: f64, x: f64, log_prefix: f64) -> f64 {
    // modified Lentz
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    (log_prefix.exp() * h).min(1.0)
}

/// Lower regularized incomplete gamma `P(a, x)`.
pub fn reg_inc_gamma_lower(a: f64, x: f64) -> Result<f64> {
    reg_inc_gamma_pair(a, x).map(|(p, _)| p)
}

/// Upper regularized incomplete gamma `Q(a, x) = Γ(a, x) / Γ(a)`.
pub fn reg_inc_gamma_upper(a: f64, x: f64) -> Result<f64> {
    reg_inc_gamma_pair(a, x).map(|(_, q)| q)
}

/// Solves `P(a, x) = p` (equivalently `Q(a, x) = q` with `p + q = 1`).
///
/// Callers pass both so that whichever tail is small keeps full relative
/// precision in the residual.
pub(crate) fn inv_gamma_impl(a: f64, p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if q <= 0.0 {
        return f64::INFINITY;
    }
    let gln = ln_gamma_unchecked(a);
    let a1 = a - 1.0;
    let lna1 = if a > 1.0 { a1.ln() } else { 0.0 };
    let afac = if a > 1.0 { (a1 * (lna1 - 1.0) - gln).exp() } else { 0.0 };
    let use_upper = q < p;

    // initial guess
    let mut x = if a > 1.0 {
        let pp = p.min(q);
        let t = (-2.0 * pp.ln()).sqrt();
        let mut z = (2.307_53 + t * 0.270_61) / (1.0 + t * (0.992_29 + t * 0.044_81)) - t;
        if p < 0.5 {
            z = -z;
        }
        (a * (1.0 - 1.0 / (9.0 * a) - z / (3.0 * a.sqrt())).powi(3)).max(1e-3)
    } else {
        let t = 1.0 - a * (0.253 + a * 0.12);
        if p < t {
            (p / t).powf(1.0 / a)
        } else {
            1.0 - (q / (1.0 - t)).ln()
        }
    };
    // far lower tail: leading series term P(a,x) ≈ x^a / Γ(a+1)
    if p < q {
        let ln_small = (p.ln() + gln + a.ln()) / a;
        if ln_small < f64::MIN_POSITIVE.ln() - 1.0 {
            // the root is below the smallest normal double
            return 0.0;
        }
        let small = ln_small.exp();
        if small < x.min(1.0) {
            x = small;
        }
    }

    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;
    for _ in 0..100 {
        if x <= 0.0 {
            x = 0.5 * (lo + if hi.is_finite() { hi } else { 2.0 * lo.max(1.0) });
        }
        let (pp, qq) = gamma_pair_unchecked(a, x);
        // residual of P(a,x) - p, evaluated on the small side
        let err = if use_upper { q - qq } else { pp - p };
        if err > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        if err == 0.0 {
            return x;
        }
        let dens = if a > 1.0 {
            afac * (-(x - a1) + a1 * (x.ln() - lna1)).exp()
        } else {
            (-x + a1 * x.ln() - gln).exp()
        };
        // far from the root, Newton on the log of the small-side probability
        // moves in steps of its log ratio instead of crawling
        let (small, target) = if use_upper { (qq, q) } else { (pp, p) };
        let log_ratio = (small / target).ln();
        let step = if !(dens > 0.0 && dens.is_finite()) {
            f64::NAN
        } else if log_ratio.abs() > 0.5 && small > 0.0 {
            let s = log_ratio * small / dens;
            if use_upper {
                -s
            } else {
                // P ∝ x^a near zero, so step multiplicatively
                x * (1.0 - (-s / x).exp())
            }
        } else {
            let u = err / dens;
            u / (1.0 - 0.5 * (u * (a1 / x - 1.0)).min(1.0))
        };
        let mut next = x - step;
        if !next.is_finite() || next <= lo || next >= hi {
            next = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * x.max(lo) + 1.0
            };
        }
        let converged = (next - x).abs() <= 4.0 * EPS * next.abs();
        x = next;
        if converged {
            break;
        }
    }
    x
}

/// Inverse of `P(a, ·)`: the `x` with `P(a, x) = p`.
pub fn inv_reg_inc_gamma_lower(a: f64, p: f64) -> Result<f64> {
    check_gamma_args(a, 0.0)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability out of range: {p}")));
    }
    Ok(inv_gamma_impl(a, p, 1.0 - p))
}

/// Inverse of `Q(a, ·)`: the `x` with `Q(a, x) = q`, accurate for small `q`.
pub fn inv_reg_inc_gamma_upper(a: f64, q: f64) -> Result<f64> {
    check_gamma_args(a, 0.0)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("probability out of range: {q}")));
    }
    Ok(inv_gamma_impl(a, 1.0 - q, q))
}

fn check_beta_args(x: f64, a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!(
            "incomplete beta requires a, b > 0, got ({a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("incomplete beta requires 0 <= x <= 1, got {x}")));
    }
    Ok(())
}

fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    h
}

/// `(I_x(a,b), 1 - I_x(a,b))`, each computed on its accurate side.
pub(crate) fn beta_pair_unchecked(x: f64, a: f64, b: f64) -> (f64, f64) {
    beta_pair_xy(x, 1.0 - x, a, b)
}

/// As [`beta_pair_unchecked`] but with `y = 1 - x` supplied by the caller,
/// which matters when `x` is within a few ulps of one.
pub(crate) fn beta_pair_xy(x: f64, y: f64, a: f64, b: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if y <= 0.0 {
        return (1.0, 0.0);
    }
    let lbeta = ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b);
    let front = (a * x.ln() + b * y.ln() - lbeta).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        let v = (front * beta_fraction(a, b, x) / a).min(1.0);
        (v, 1.0 - v)
    } else {
        let v = (front * beta_fraction(b, a, y) / b).min(1.0);
        (1.0 - v, v)
    }
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_beta_args(x, a, b)?;
    Ok(beta_pair_unchecked(x, a, b).0)
}

/// Inverse of `I_·(a, b)`: the `x` with `I_x(a, b) = p`.
pub fn inv_reg_inc_beta(p: f64, a: f64, b: f64) -> Result<f64> {
    check_beta_args(p, a, b)?;
    Ok(inv_beta_impl(p, 1.0 - p, a, b))
}

/// Solves `I_x(a,b) = p` where `q = 1 - p` is supplied separately.
pub(crate) fn inv_beta_impl(p: f64, q: f64, a: f64, b: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if q <= 0.0 {
        return 1.0;
    }
    // Iterate in whichever of x, 1 - x is near zero at the bulk of the mass.
    if a > b {
        return 1.0 - inv_beta_near_zero(q, p, b, a);
    }
    inv_beta_near_zero(p, q, a, b)
}

/// Solves `I_x(a,b) = p`; the residual is taken on the smaller of `p`, `q`.
fn inv_beta_near_zero(p: f64, q: f64, a: f64, b: f64) -> f64 {
    let a1 = a - 1.0;
    let b1 = b - 1.0;
    let use_upper = q < p;
    let mut x = if a >= 1.0 && b >= 1.0 {
        let pp = p.min(q);
        let t = (-2.0 * pp.ln()).sqrt();
        let mut z = (2.307_53 + t * 0.270_61) / (1.0 + t * (0.992_29 + t * 0.044_81)) - t;
        if use_upper {
            z = -z;
        }
        let al = (z * z - 3.0) / 6.0;
        let h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
        let w = (z * (al + h).sqrt() / h)
            - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
        a / (a + b * (2.0 * w).exp())
    } else {
        let lna = (a / (a + b)).ln();
        let lnb = (b / (a + b)).ln();
        let t = (a * lna).exp() / a;
        let u = (b * lnb).exp() / b;
        let w = t + u;
        if p < t / w {
            (a * w * p).powf(1.0 / a)
        } else {
            1.0 - (b * w * q).powf(1.0 / b)
        }
    };
    let afac = -(ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b));
    // far lower tail: leading series term I_x(a,b) ≈ x^a / (a B(a,b))
    if p < q {
        let ln_small = (p.ln() + a.ln() - afac) / a;
        if ln_small < f64::MIN_POSITIVE.ln() - 1.0 {
            return 0.0;
        }
        let small = ln_small.exp();
        if small > 0.0 && (small < x || !(x > 0.0 && x < 1.0)) && small < 0.5 {
            x = small;
        }
    }
    if !(x > 0.0 && x < 1.0) {
        x = 0.5;
    }
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    for _ in 0..200 {
        let (ip, iq) = beta_pair_unchecked(x, a, b);
        let err = if use_upper { q - iq } else { ip - p };
        if err == 0.0 {
            return x;
        }
        if err > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dens = (a1 * x.ln() + b1 * (-x).ln_1p() + afac).exp();
        let mut next = if dens > 0.0 && dens.is_finite() {
            let u = err / dens;
            let corr = 1.0 - 0.5 * (u * (a1 / x - b1 / (1.0 - x))).min(1.0);
            x - u / corr
        } else {
            f64::NAN
        };
        if !next.is_finite() || next <= lo || next >= hi {
            next = if lo == 0.0 && hi < 1.0 {
                0.5 * hi.min(x)
            } else if lo > 0.0 && hi > 4.0 * lo {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
        }
        let converged = (next - x).abs() <= STEP_TOL * next;
        x = next;
        if converged || hi - lo <= EPS * x {
            break;
        }
    }
    x
}

/// Error function, `erf(x) = sign(x) P(1/2, x^2)`.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let (p, _) = gamma_pair_unchecked(0.5, x * x);
    if x < 0.0 {
        -p
    } else {
        p
    }
}

/// Complementary error function, accurate far into the right tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let (p, q) = gamma_pair_unchecked(0.5, x * x);
    if x < 0.0 {
        1.0 + p
    } else {
        q
    }
}

fn giles_guess(w: f64) -> f64 {
    if w < 5.0 {
        let w = w - 2.5;
        let mut p = 2.810_226_36e-08;
        p = 3.432_739_39e-07 + p * w;
        p = -3.523_387_7e-06 + p * w;
        p = -4.391_506_54e-06 + p * w;
        p = 0.000_218_580_87 + p * w;
        p = -0.001_253_725_03 + p * w;
        p = -0.004_177_681_64 + p * w;
        p = 0.246_640_727 + p * w;
        1.501_409_41 + p * w
    } else {
        let w = w.sqrt() - 3.0;
        let mut p = -0.000_200_214_257;
        p = 0.000_100_950_558 + p * w;
        p = 0.001_349_343_22 + p * w;
        p = -0.003_673_428_44 + p * w;
        p = 0.005_739_507_73 + p * w;
        p = -0.007_622_461_3 + p * w;
        p = 0.009_438_870_47 + p * w;
        p = 1.001_674_06 + p * w;
        2.832_976_82 + p * w
    }
}

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Inverse error function on `(-1, 1)`.
pub fn erf_inv(p: f64) -> Result<f64> {
    if !(p.abs() < 1.0) {
        return Err(Error::domain(format!("erf_inv requires |p| < 1, got {p}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p.abs() > 0.5 {
        let z = erfc_inv_unchecked(1.0 - p.abs());
        return Ok(z.copysign(p));
    }
    let w = -((1.0 - p) * (1.0 + p)).ln();
    let mut z = giles_guess(w) * p;
    for _ in 0..4 {
        let f = erf(z) - p;
        let u = f / (TWO_OVER_SQRT_PI * (-z * z).exp());
        let step = u / (1.0 + z * u);
        z -= step;
        if step.abs() <= EPS * z.abs() {
            break;
        }
    }
    Ok(z)
}

/// Inverse complementary error function on `(0, 2)`.
pub fn erfc_inv(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 2.0) {
        return Err(Error::domain(format!("erfc_inv requires 0 < q < 2, got {q}")));
    }
    Ok(erfc_inv_unchecked(q))
}

fn erfc_inv_unchecked(q: f64) -> f64 {
    if q > 1.0 {
        return -erfc_inv_unchecked(2.0 - q);
    }
    if q == 1.0 {
        return 0.0;
    }
    let w = -(q * (2.0 - q)).ln();
    let mut z = if w > 25.0 {
        // beyond the polynomial's range: erfc(z) ≈ exp(-z²) / (z √π)
        let t = -q.ln();
        (t - 0.5 * (std::f64::consts::PI * t).ln()).sqrt()
    } else {
        giles_guess(w) * (1.0 - q)
    };
    for _ in 0..40 {
        let e = erfc(z);
        let dens = TWO_OVER_SQRT_PI * (-z * z).exp();
        let log_ratio = (e / q).ln();
        let step = if log_ratio.abs() > 0.5 && e > 0.0 {
            // Newton on ln erfc: the guess can be far off deep in the tail
            -log_ratio * e / dens
        } else {
            // d/dz erfc = -2/sqrt(pi) exp(-z^2); Halley step
            let u = (e - q) / -dens;
            u / (1.0 + z * u)
        };
        z -= step;
        if step.abs() <= 2.0 * EPS * z.abs() {
            break;
        }
    }
    z
}

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Standard normal survival function `1 - Φ(z)`.
pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// Standard normal quantile `z(p) = √2 · erf_inv(2p − 1)`, evaluated
/// through `erfc_inv` to keep tail precision.
pub fn norm_ppf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("normal quantile requires 0 < p < 1, got {p}")));
    }
    if p > 0.5 {
        Ok(SQRT_2 * erfc_inv_unchecked(2.0 * (1.0 - p)))
    } else {
        Ok(-SQRT_2 * erfc_inv_unchecked(2.0 * p))
    }
}

/// Upper-tail normal quantile: the `z` with `1 - Φ(z) = s`.
pub fn norm_isf(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain(format!("normal quantile requires 0 < s < 1, got {s}")));
    }
    Ok(SQRT_2 * erfc_inv_unchecked(2.0 * s))
}
