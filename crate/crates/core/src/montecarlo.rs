//! Monte Carlo oracle for the aggregate-loss quantile.
//!
//! Each simulated year draws `N ~ Poisson(λ)` and sums `N` inverse-transform
//! severity draws. Only the largest annual totals are retained, in a bounded
//! min-heap, which is enough to read off the order statistics at the
//! requested confidence levels.
//!
//! Years are grouped into fixed-size blocks and block `b` draws from stream
//! `b` of the seeded generator, so results do not depend on the number of
//! worker threads.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::severity::SeverityModel;
use crate::specfun::ln_gamma_unchecked;

/// One reproducible stream of uniforms, identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on the open interval (0, 1), on a grid of spacing 2^-53.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

/// Poisson sampler by inversion with sequential search from the mode over a
/// cached cumulative table.
#[derive(Debug, Clone)]
pub struct Poisson {
    lambda: f64,
    lo: u64,
    mode: u64,
    cdf: Vec<f64>,
}

impl Poisson {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("Poisson mean must be positive, got {lambda}")));
        }
        let mode = lambda.floor() as u64;
        let spread = (40.0 * lambda.sqrt() + 40.0) as u64;
        let lo = mode.saturating_sub(spread);
        let hi = mode + spread;
        let ln_l = lambda.ln();
        let mut acc = 0.0;
        let cdf = (lo..=hi)
            .map(|k| {
                let kf = k as f64;
                acc += (kf * ln_l - lambda - ln_gamma_unchecked(kf + 1.0)).exp();
                acc
            })
            .collect();
        Ok(Self { lambda, lo, mode, cdf })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Largest count the table can return.
    pub fn max_count(&self) -> u64 {
        self.lo + self.cdf.len() as u64 - 1
    }

    /// Smallest `k` with `P(N ≤ k) ≥ u`.
    #[inline]
    pub fn invert(&self, u: f64) -> u64 {
        let last = self.cdf.len() - 1;
        let mut i = (self.mode - self.lo) as usize;
        if u <= self.cdf[i] {
            while i > 0 && u <= self.cdf[i - 1] {
                i -= 1;
            }
        } else {
            while i < last && u > self.cdf[i] {
                i += 1;
            }
        }
        self.lo + i as u64
    }

    #[inline]
    pub fn draw(&self, stream: &mut RngStream) -> u64 {
        self.invert(stream.uniform())
    }
}

/// Draws one Poisson count.
pub fn poisson_draw(stream: &mut RngStream, lambda: f64) -> Result<u64> {
    Ok(Poisson::new(lambda)?.draw(stream))
}

/// One simulated annual aggregate loss: one uniform for the count, then one
/// per loss, summed in draw order.
pub fn simulate_year(stream: &mut RngStream, model: &SeverityModel, poisson: &Poisson) -> f64 {
    let n = poisson.draw(stream);
    let mut total = 0.0;
    for _ in 0..n {
        total += model.sample(stream.uniform());
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Total(f64);

impl Eq for Total {}

impl PartialOrd for Total {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Total {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// The `capacity` largest values seen so far, plus a count of all values.
#[derive(Debug, Clone)]
pub struct TailSketch {
    capacity: usize,
    total: u64,
    heap: BinaryHeap<Reverse<Total>>,
}

impl TailSketch {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "sketch capacity must be positive");
        Self {
            capacity,
            total: 0,
            heap: BinaryHeap::with_capacity(capacity.min(1 << 20)),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total_years(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.heap.len() == self.capacity
    }

    /// Smallest retained value.
    pub fn min(&self) -> Option<f64> {
        self.heap.peek().map(|r| r.0 .0)
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.total += 1;
        self.offer(x);
    }

    /// Records that `n` values smaller than the current minimum were seen.
    pub fn skip(&mut self, n: u64) {
        self.total += n;
    }

    #[inline]
    fn offer(&mut self, x: f64) {
        if self.heap.len() < self.capacity {
            self.heap.push(Reverse(Total(x)));
        } else if let Some(mut top) = self.heap.peek_mut() {
            if x > top.0 .0 {
                *top = Reverse(Total(x));
            }
        }
    }

    /// Sketch of the concatenation of both input streams.
    pub fn merge(mut self, other: TailSketch) -> TailSketch {
        let (mut big, small) = if self.heap.len() >= other.heap.len() {
            (std::mem::take(&mut self), other)
        } else {
            (other, self)
        };
        big.capacity = big.capacity.min(small.capacity);
        while big.heap.len() > big.capacity {
            big.heap.pop();
        }
        big.total += small.total;
        for Reverse(Total(x)) in small.heap {
            big.offer(x);
        }
        big
    }

    /// Retained values, largest first.
    pub fn descending(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.heap.iter().map(|r| r.0 .0).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Ascending order statistic of 1-based `rank` among all values seen,
    /// if it is retained.
    pub fn order_statistic(&self, rank: u64) -> Option<f64> {
        self.order_statistics(&[rank]).pop().flatten()
    }

    fn order_statistics(&self, ranks: &[u64]) -> Vec<Option<f64>> {
        let desc = self.descending();
        ranks
            .iter()
            .map(|&r| {
                if r == 0 || r > self.total {
                    return None;
                }
                desc.get((self.total - r) as usize).copied()
            })
            .collect()
    }
}

impl Default for TailSketch {
    fn default() -> Self {
        Self {
            capacity: 1,
            total: 0,
            heap: BinaryHeap::new(),
        }
    }
}

/// `⌈x⌉`, treating values within a relative 1e-12 of an integer as that
/// integer so that e.g. `0.999 · 10^7` ranks as 9,990,000.
pub fn tolerant_ceil(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// Ascending rank `⌈α · years⌉` of the empirical `VaR_α`.
pub fn var_rank(alpha: f64, years: u64) -> u64 {
    tolerant_ceil(alpha * years as f64).max(1)
}

/// Sketch capacity sufficient for every requested level.
pub fn sketch_capacity(alphas: &[f64], years: u64) -> u64 {
    let min_alpha = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    years - var_rank(min_alpha, years) + 1
}

pub const DEFAULT_BLOCK_YEARS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: SeverityModel,
    pub lambda: f64,
    pub years: u64,
    pub alphas: Vec<f64>,
    pub seed: u64,
    /// Years per block; block `b` uses stream `b`. Part of the reproducible layout.
    pub block_years: u64,
}

impl SimConfig {
    pub fn new(model: SeverityModel, lambda: f64, years: u64, alphas: Vec<f64>, seed: u64) -> Self {
        Self {
            model,
            lambda,
            years,
            alphas,
            seed,
            block_years: DEFAULT_BLOCK_YEARS,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.years == 0 {
            return Err(Error::domain("at least one simulated year is required"));
        }
        if self.block_years == 0 {
            return Err(Error::domain("block size must be positive"));
        }
        if self.alphas.is_empty() {
            return Err(Error::domain("at least one confidence level is required"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::domain(format!("confidence level must lie in (0, 1), got {a}")));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::domain(format!("lambda must be positive, got {}", self.lambda)));
        }
        Ok(())
    }

    fn blocks(&self) -> u64 {
        self.years.div_ceil(self.block_years)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarEstimate {
    pub alpha: f64,
    pub value: f64,
    pub rank: u64,
    /// Standard error from the asymptotic order-statistic variance, with the
    /// density estimated by differencing neighbouring retained order statistics.
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub estimates: Vec<VarEstimate>,
    pub sketch: TailSketch,
    pub warnings: Vec<String>,
}

impl SimResult {
    pub fn get(&self, alpha: f64) -> Option<&VarEstimate> {
        self.estimates.iter().find(|e| (e.alpha - alpha).abs() < 1e-12)
    }
}

/// Per-count cut-offs in probability space: a year with `n` losses whose
/// largest uniform is below `cut[n]` cannot reach `bound`.
struct SkipTable {
    bound: f64,
    cut: Vec<f64>,
}

impl SkipTable {
    fn new(max_n: u64) -> Self {
        Self {
            bound: 0.0,
            cut: vec![0.0; max_n as usize + 1],
        }
    }

    fn refresh(&mut self, model: &SeverityModel, bound: f64) {
        self.bound = bound;
        for (n, c) in self.cut.iter_mut().enumerate().skip(1) {
            // margin covers rounding in the quantile and in the summation
            *c = model.cdf(bound / (n as f64 * (1.0 + 1e-6)));
        }
    }

    /// Whether a year with `n` losses, largest uniforms `u1 ≥ u2`, must total
    /// less than the bound. Tries `n Q(u1)` first, then `Q(u1) + (n-1) Q(u2)`.
    fn cannot_reach(&self, model: &SeverityModel, n: u64, u1: f64, u2: f64) -> bool {
        if u1 < self.cut[n as usize] {
            return true;
        }
        let target = self.bound / (1.0 + 1e-6);
        let rest = target - model.sample(u1);
        if n == 1 || rest <= 0.0 {
            return rest > 0.0;
        }
        u2 < model.cdf(rest / ((n - 1) as f64 * (1.0 + 1e-6)))
    }
}

fn simulate_block(cfg: &SimConfig, poisson: &Poisson, block: u64, capacity: usize, shared: &AtomicU64) -> TailSketch {
    let start = block * cfg.block_years;
    let years = cfg.block_years.min(cfg.years - start);
    let mut stream = RngStream::new(cfg.seed, block);
    let mut sketch = TailSketch::new(capacity);
    let mut skip = SkipTable::new(poisson.max_count());
    let mut buf = Vec::with_capacity(poisson.max_count() as usize + 1);
    let mut skipped = 0u64;
    for y in 0..years {
        if y % 1024 == 0 {
            let local = if sketch.is_full() {
                sketch.min().unwrap_or(0.0)
            } else {
                0.0
            };
            let global = f64::from_bits(shared.load(AtomicOrdering::Relaxed));
            let bound = local.max(global);
            if bound > skip.bound * 1.01 {
                skip.refresh(&cfg.model, bound);
            }
            if sketch.is_full() && local > 0.0 {
                shared.fetch_max(local.to_bits(), AtomicOrdering::Relaxed);
            }
        }
        let n = poisson.draw(&mut stream);
        buf.clear();
        let (mut u1, mut u2) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let u = stream.uniform();
            if u > u1 {
                u2 = u1;
                u1 = u;
            } else if u > u2 {
                u2 = u;
            }
            buf.push(u);
        }
        if n > 0 && skip.bound > 0.0 && skip.cannot_reach(&cfg.model, n, u1, u2) {
            skipped += 1;
            continue;
        }
        let total: f64 = buf.iter().fold(0.0, |acc, &u| acc + cfg.model.sample(u));
        sketch.push(total);
    }
    sketch.skip(skipped);
    sketch
}

/// Runs the simulation and returns the sketch over all years.
pub fn simulate(cfg: &SimConfig) -> Result<TailSketch> {
    cfg.validate()?;
    let poisson = Poisson::new(cfg.lambda)?;
    let capacity = sketch_capacity(&cfg.alphas, cfg.years) as usize;
    let shared = AtomicU64::new(0.0f64.to_bits());
    let sketch = (0..cfg.blocks())
        .into_par_iter()
        .map(|b| simulate_block(cfg, &poisson, b, capacity, &shared))
        .reduce_with(TailSketch::merge)
        .expect("at least one block");
    Ok(sketch)
}

/// Empirical `VaR_α` for each requested level.
pub fn estimate_var(cfg: &SimConfig) -> Result<SimResult> {
    let sketch = simulate(cfg)?;
    let years = cfg.years;
    let desc = sketch.descending();
    let mut warnings = Vec::new();
    let mut estimates = Vec::with_capacity(cfg.alphas.len());
    for &alpha in &cfg.alphas {
        let tail = (1.0 - alpha) * years as f64;
        if tail < 10.0 {
            warnings.push(format!(
                "only {tail:.1} simulated years lie above the {alpha} quantile; the estimate is unstable"
            ));
        }
        let rank = var_rank(alpha, years);
        let at = |r: u64| desc[(years - r) as usize];
        let value = at(rank);
        estimates.push(VarEstimate {
            alpha,
            value,
            rank,
            std_error: order_stat_std_error(&desc, years, rank, alpha),
        });
    }
    Ok(SimResult {
        estimates,
        sketch,
        warnings,
    })
}

/// `√(α(1-α)) / (f √n)` with `f` from a difference quotient of the
/// retained order statistics around `rank`.
fn order_stat_std_error(desc: &[f64], years: u64, rank: u64, alpha: f64) -> f64 {
    let above = years - rank;
    let below = desc.len() as u64 - 1 - above;
    let h = (above / 20).max(1);
    let at = |r: u64| desc[(years - r) as usize];
    let n = years as f64;
    let dq_dp = if above >= h && below >= h {
        (at(rank + h) - at(rank - h)) / (2.0 * h as f64 / n)
    } else if above >= 2 * h {
        (-3.0 * at(rank) + 4.0 * at(rank + h) - at(rank + 2 * h)) / (2.0 * h as f64 / n)
    } else {
        return f64::NAN;
    };
    let density = 1.0 / dq_dp;
    (alpha * (1.0 - alpha)).sqrt() / (density * n.sqrt())
}
