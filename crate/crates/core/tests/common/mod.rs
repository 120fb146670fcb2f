//! Test-side oracles, deliberately independent of the library's numerics.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh quadrature of `f` over `[a, b]`. `f` receives
/// `(x, x - a, b - x)` so integrands singular at an endpoint can use the
/// accurately computed distance.
pub fn tanh_sinh(a: f64, b: f64, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        // distances to the endpoints as fractions of the interval
        let da = 1.0 / (1.0 + (-2.0 * u).exp());
        let db = 1.0 / (1.0 + (2.0 * u).exp());
        let w = FRAC_PI_2 * t.cosh() / (u.cosh() * u.cosh());
        let (xa, xb) = (2.0 * half * da, 2.0 * half * db);
        if !(xa > 0.0 && xb > 0.0) || !w.is_finite() || w == 0.0 {
            return 0.0;
        }
        let v = f(a + xa, xa, xb);
        if v.is_finite() {
            v * w
        } else {
            0.0
        }
    };
    let tmax = 6.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h * half;
    for _ in 0..8 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let cur = sum * h * half;
        if (cur - prev).abs() <= 1e-15 * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `∫_a^∞ f` via `t = a + v/(1 - v)`.
pub fn tanh_sinh_inf(a: f64, f: impl Fn(f64) -> f64) -> f64 {
    tanh_sinh(0.0, 1.0, |v, _, one_minus_v| {
        let t = a + v / one_minus_v;
        f(t) / (one_minus_v * one_minus_v)
    })
}

/// Lower and upper incomplete gamma integrals `(γ(a,x), Γ(a,x))`.
pub fn incomplete_gamma_integrals(a: f64, x: f64) -> (f64, f64) {
    let g = |t: f64| ((a - 1.0) * t.ln() - t).exp();
    let lower = tanh_sinh(0.0, x, |t, _, _| g(t));
    let upper = tanh_sinh_inf(x, g);
    (lower, upper)
}

/// Regularized incomplete beta `I_x(a, b)` and its complement as ratios of integrals.
pub fn incomplete_beta_ratio(x: f64, a: f64, b: f64) -> (f64, f64) {
    let g = |t: f64, one_minus_t: f64| ((a - 1.0) * t.ln() + (b - 1.0) * one_minus_t.ln()).exp();
    let lower = tanh_sinh(0.0, x, |t, _, _| g(t, 1.0 - t));
    let upper = tanh_sinh(x, 1.0, |t, _, to_one| g(t, to_one));
    let total = lower + upper;
    (lower / total, upper / total)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Deterministic uniforms in `[0, 1)` for sampling test points (SplitMix64).
pub struct Points(u64);

impl Points {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}
