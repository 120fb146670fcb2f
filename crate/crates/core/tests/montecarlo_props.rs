use proptest::prelude::*;
use tailquant_core::catalog;
use tailquant_core::montecarlo::{self, Poisson, RngStream, SimConfig, TailSketch};
use tailquant_core::specfun::reg_inc_gamma_upper;

/// Every year simulated in order with the block/stream layout, then sorted.
fn brute_force(cfg: &SimConfig) -> Vec<f64> {
    let poisson = Poisson::new(cfg.lambda).unwrap();
    let mut all = Vec::with_capacity(cfg.years as usize);
    let blocks = cfg.years.div_ceil(cfg.block_years);
    for b in 0..blocks {
        let mut rng = RngStream::new(cfg.seed, b);
        let n = cfg.block_years.min(cfg.years - b * cfg.block_years);
        for _ in 0..n {
            all.push(montecarlo::simulate_year(&mut rng, &cfg.model, &poisson));
        }
    }
    all.sort_by(f64::total_cmp);
    all
}

#[test]
fn sketch_matches_sorted_array() {
    for (label, years, block) in [
        ("GPD", 10_000, 1_000),
        ("LOGN", 9_999, 4_096),
        ("BETAP", 10_000, 1 << 20),
        ("TLOGG", 7_777, 500),
    ] {
        let model = catalog::lookup(label).unwrap().model;
        let mut cfg = SimConfig::new(model, catalog::LAMBDA, years, vec![0.99, 0.999, 0.9997], 7);
        cfg.block_years = block;
        let sorted = brute_force(&cfg);
        let r = montecarlo::estimate_var(&cfg).unwrap();
        for e in &r.estimates {
            let want = sorted[(e.rank - 1) as usize];
            assert_eq!(e.value.to_bits(), want.to_bits(), "{label} alpha={}", e.alpha);
            assert_eq!(e.rank, montecarlo::var_rank(e.alpha, years));
        }
    }
}

#[test]
fn higher_level_gives_higher_var() {
    let model = catalog::simstudy_model();
    for seed in 0..5 {
        let cfg = SimConfig::new(model, catalog::LAMBDA, 200_000, catalog::ALPHAS.to_vec(), seed);
        let r = montecarlo::estimate_var(&cfg).unwrap();
        assert!(
            r.get(0.9997).unwrap().value >= r.get(0.999).unwrap().value,
            "seed {seed}"
        );
    }
}

#[test]
fn same_seed_same_result() {
    let model = catalog::lookup("FRCH").unwrap().model;
    let cfg = SimConfig::new(model, catalog::LAMBDA, 3_000_000, catalog::ALPHAS.to_vec(), 99);
    let a = montecarlo::estimate_var(&cfg).unwrap();
    let b = montecarlo::estimate_var(&cfg).unwrap();
    for (x, y) in a.estimates.iter().zip(&b.estimates) {
        assert_eq!(x.value.to_bits(), y.value.to_bits());
    }
}

#[test]
fn poisson_counts_pass_chi_square() {
    let lambda = catalog::LAMBDA;
    let poisson = Poisson::new(lambda).unwrap();
    let mut rng = RngStream::new(2024, 0);
    let draws = 200_000;
    let mut counts = vec![0u64; 80];
    for _ in 0..draws {
        let n = poisson.draw(&mut rng) as usize;
        counts[n.min(79)] += 1;
    }
    // cells: ≤ 12, each of 13..=40, ≥ 41; P(N ≤ k) = Q(k + 1, λ)
    let cdf = |k: f64| reg_inc_gamma_upper(k + 1.0, lambda).unwrap();
    let mut cells = vec![(counts[..=12].iter().sum::<u64>(), cdf(12.0))];
    for (k, &c) in counts.iter().enumerate().take(41).skip(13) {
        cells.push((c, cdf(k as f64) - cdf(k as f64 - 1.0)));
    }
    cells.push((counts[41..].iter().sum(), 1.0 - cdf(40.0)));
    let chi2: f64 = cells
        .iter()
        .map(|&(o, p)| {
            let e = p * draws as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    // 29 degrees of freedom; the 99.9% point is 58.3
    assert!(chi2 < 58.3, "chi-square {chi2}");
    let mean = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| k as f64 * c as f64)
        .sum::<f64>()
        / draws as f64;
    assert!((mean - lambda).abs() < 4.0 * (lambda / draws as f64).sqrt(), "{mean}");
}

#[test]
fn uniforms_are_uniform() {
    let mut rng = RngStream::new(5, 3);
    let n = 100_000;
    let mut bins = [0u32; 20];
    for _ in 0..n {
        let u = rng.uniform();
        assert!(u > 0.0 && u < 1.0);
        bins[(u * 20.0) as usize] += 1;
    }
    let e = n as f64 / 20.0;
    let chi2: f64 = bins.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
    // 19 degrees of freedom; the 99.9% point is 43.8
    assert!(chi2 < 43.8, "{chi2}");
}

/// Spread of the estimate across seeds shrinks like `1/√years`.
///
/// With ten seeds per size the raw spread ratio is itself noisy: under an
/// exact square-root law its square times ten is F(9, 9) distributed, so the
/// band [0.25, 0.40] around 1/√10 would hold only about half the time. The
/// band is enforced on the ratio of the averaged order-statistic standard
/// errors, and the raw spread ratio on its exact 99% sampling band.
#[test]
fn spread_follows_square_root_law() {
    let model = catalog::simstudy_model();
    let run = |years: u64| {
        let est: Vec<_> = (0..10)
            .map(|seed| {
                let cfg = SimConfig::new(model, catalog::LAMBDA, years, vec![0.999], 1000 + seed);
                montecarlo::estimate_var(&cfg).unwrap().estimates[0]
            })
            .collect();
        let n = est.len() as f64;
        let m = est.iter().map(|e| e.value).sum::<f64>() / n;
        let spread = (est.iter().map(|e| (e.value - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let se = est.iter().map(|e| e.std_error).sum::<f64>() / n;
        (spread, se)
    };
    let (spread_small, se_small) = run(1_000_000);
    let (spread_big, se_big) = run(10_000_000);
    let se_ratio = se_big / se_small;
    let spread_ratio = spread_big / spread_small;
    println!("standard error ratio {se_ratio}, spread ratio {spread_ratio}");
    assert!((0.25..=0.40).contains(&se_ratio), "standard error ratio {se_ratio}");
    // 1/√10 · √F(9,9) at the 0.5% and 99.5% points
    assert!((0.1236..=0.8088).contains(&spread_ratio), "spread ratio {spread_ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn merge_is_order_independent(
        xs in prop::collection::vec(0.0f64..1e9, 0..300),
        cap in 1usize..50,
        cut1 in 0usize..300,
        cut2 in 0usize..300,
    ) {
        let (c1, c2) = (cut1.min(xs.len()), cut2.min(xs.len()));
        let (a, b) = (c1.min(c2), c1.max(c2));
        let sketch = |part: &[f64]| {
            let mut s = TailSketch::new(cap);
            part.iter().for_each(|&x| s.push(x));
            s
        };
        let (p, q, r) = (sketch(&xs[..a]), sketch(&xs[a..b]), sketch(&xs[b..]));
        let left = p.clone().merge(q.clone()).merge(r.clone());
        let right = r.merge(p.merge(q));
        prop_assert_eq!(left.descending(), right.descending());
        prop_assert_eq!(left.total_years(), xs.len() as u64);
        let mut sorted = xs.clone();
        sorted.sort_by(|x, y| y.total_cmp(x));
        sorted.truncate(cap);
        prop_assert_eq!(left.descending(), sorted);
    }
}
