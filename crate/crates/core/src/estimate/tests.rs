use super::*;
use crate::error::Error;
use crate::pointproc::Purpose;

/// Wilson bounds as the roots of `(p_hat - p)^2 = z^2 p (1 - p) / n`, by bisection.
fn wilson_oracle(k: u64, n: u64, z: f64) -> (f64, f64) {
    let p_hat = k as f64 / n as f64;
    let f = |p: f64| (p_hat - p).powi(2) - z * z * p * (1.0 - p) / n as f64;
    let root = |mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(lo) > 0.0) == (f(mid) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (if k == 0 { 0.0 } else { root(0.0, p_hat) }, if k == n { 1.0 } else { root(p_hat, 1.0) })
}

fn exact_row(alpha: f64, p: f64) -> SeriesRow {
    SeriesRow { alpha, estimate: Estimate { p_hat: p, ci_lo: p * 0.9, ci_hi: (p * 1.1).min(1.0), n_reps: 1000, successes: 0 } }
}

#[test]
fn wilson_matches_quadratic_roots() {
    let z = normal_quantile(0.95);
    assert!((z - 1.959963984540054).abs() < 1e-9);
    for (k, n) in [(0u64, 50u64), (3, 50), (30, 100), (99, 100), (100, 100), (1, 10_000)] {
        let e = Estimate::wilson(k, n, 0.95).unwrap();
        let (lo, hi) = wilson_oracle(k, n, z);
        assert!((e.ci_lo - lo).abs() < 1e-10 && (e.ci_hi - hi).abs() < 1e-10, "{k}/{n}: {e:?} vs ({lo}, {hi})");
        assert!(e.ci_lo <= e.p_hat && e.p_hat <= e.ci_hi);
    }
    assert!(Estimate::wilson(0, 0, 0.95).is_err());
    assert!(Estimate::wilson(5, 4, 0.95).is_err());
}

fn mock(p: f64) -> impl Fn(&RngStream) -> Result<bool> + Sync {
    move |s: &RngStream| Ok(s.derive(Purpose::Synthetic, [0, 0]).rng().uniform_open() < p)
}

#[test]
fn bernoulli_mock_is_unbiased() {
    let e = estimate_bernoulli(10_000, &RngStream::root(5), 0.95, mock(0.3)).unwrap();
    assert!((e.p_hat - 0.3).abs() < 3.0 * (0.21f64 / 10_000.0).sqrt());
}

#[test]
fn wilson_coverage() {
    for p in [0.01, 0.3, 0.9] {
        let metas = 2000u64;
        let covered = (0..metas)
            .filter(|&m| {
                let e = estimate_bernoulli(1000, &RngStream::root(m + 17), 0.95, mock(p)).unwrap();
                e.ci_lo <= p && p <= e.ci_hi
            })
            .count();
        let rate = covered as f64 / metas as f64;
        assert!((0.93..=0.97).contains(&rate), "p = {p}: coverage {rate}");
    }
}

#[test]
fn estimates_ignore_thread_count() {
    let m = ModelSpec::long_range(0.0, 0.0, 3.5).unwrap();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| estimate_prob(&m, &EventSpec::g(16.0), 0.5, 64, &RngStream::root(3), &EstimateOptions::default()).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn zero_intensity_sweep() {
    let m = ModelSpec::long_range(0.0, 0.0, 3.5).unwrap();
    let grid: Vec<f64> = (4..=10).map(|k| 2f64.powi(k)).collect();
    let s = sweep(&m, &EventSpec::g(2.0), &grid, 0.0, 20, &RngStream::root(1), &EstimateOptions::default()).unwrap();
    assert_eq!(s.rows.len(), grid.len());
    assert_eq!(s.grid_ratio, Some(2.0));
    assert_eq!(s.alphas(), grid);
    assert!(s.rows.iter().all(|r| r.estimate.p_hat == 0.0 && r.estimate.ci_lo == 0.0));
    assert!(sweep(&m, &EventSpec::g(2.0), &[4.0, 4.0], 0.0, 2, &RngStream::root(1), &EstimateOptions::default()).is_err());
}

#[test]
fn fit_exact_power_law() {
    let rows: Vec<_> = (2..10).map(|k| 2f64.powi(k)).map(|a| exact_row(a, a.powf(-1.5))).collect();
    let s = EstimateSeries::from_rows("G", 0.1, 0.95, rows).unwrap();
    let fit = fit_decay(&s).unwrap();
    assert!((fit.slope + 1.5).abs() < 1e-9);
    let rows: Vec<_> = (2..10).map(|k| exact_row(2f64.powi(k), 0.4)).collect();
    let fit = fit_decay(&EstimateSeries::from_rows("G", 0.1, 0.95, rows).unwrap()).unwrap();
    assert!(fit.slope.abs() < 1e-12);
}

#[test]
fn fit_binomial_power_law() {
    let n = 10_000u64;
    let rows: Vec<_> = (1..=10)
        .map(|k| {
            let alpha = 2f64.powi(k);
            let e = estimate_bernoulli(n, &RngStream::root(100 + k as u64), 0.95, mock(1.0 / alpha)).unwrap();
            SeriesRow { alpha, estimate: e }
        })
        .collect();
    let fit = fit_decay(&EstimateSeries::from_rows("G", 0.1, 0.95, rows).unwrap()).unwrap();
    assert!((fit.slope + 1.0).abs() < 3.0 * fit.stderr, "{fit:?}");
}

#[test]
fn fit_needs_positive_rows() {
    let rows: Vec<_> = (1..=6).map(|k| exact_row(f64::from(k), if k < 4 { 0.1 } else { 0.0 })).collect();
    let s = EstimateSeries::from_rows("G", 0.1, 0.95, rows).unwrap();
    assert!(matches!(fit_decay(&s), Err(Error::InsufficientPositive { have: 3, need: 4 })));
}

#[test]
fn hill_on_pareto() {
    let mut g = RngStream::root(42).rng();
    let samples: Vec<(f64, bool)> = (0..100_000).map(|_| (g.uniform_open().powf(-0.5), false)).collect();
    let t = tail_exponent(&samples, 1000, DEFAULT_CENSOR_CAP).unwrap();
    assert!((t.exponent_hat - 2.0).abs() < 3.0 * t.stderr, "{t:?}");
    assert_eq!(t.k_used, 1000);
}

#[test]
fn hill_errors_and_censoring() {
    let flat = vec![(3.0, false); 100];
    assert!(matches!(tail_exponent(&flat, 10, 0.2), Err(Error::NoTail(_))));
    assert!(tail_exponent(&flat, 9, 0.2).is_err());
    let mut mixed: Vec<(f64, bool)> = (1..=100).map(|k| (f64::from(k), false)).collect();
    for s in mixed.iter_mut().take(15) {
        s.1 = true;
    }
    let t = tail_exponent(&mixed, 10, 0.2).unwrap();
    assert_eq!(t.censored_fraction, 0.15);
    assert!(matches!(tail_exponent(&mixed, 10, 0.1), Err(Error::TooCensored { .. })));
}

#[test]
fn mixing_edge_cases() {
    let m = ModelSpec::long_range(0.0, 0.0, 3.5).unwrap();
    let opts = EstimateOptions::default();
    let e = mixing_cov(&m, 16.0, 30.0, 0.0, 10, &RngStream::root(1), &opts).unwrap();
    assert_eq!((e.cov_hat, e.stderr), (0.0, 0.0));
    assert!(mixing_cov(&m, 16.0, 24.0, 0.0, 10, &RngStream::root(1), &opts).is_err());
}

#[test]
fn certificate_cases() {
    let grid = [1.5, 3.0, 6.0, 150.0, 300.0, 600.0, 15000.0];
    let rows: Vec<_> = grid.iter().map(|&a: &f64| exact_row(a, a.powf(-3.0).min(1.0))).collect();
    let s = EstimateSeries::from_rows("G", 1e-3, 0.95, rows).unwrap();
    let c = multiscale_certificate(&s, 1e-3, 3.0, 1.0, 2).unwrap();
    assert_eq!(c.pairs.len(), 4);
    assert!(c.all_pairs_pass);
    assert!(c.bootstrap_holds);

    let rows: Vec<_> = grid.iter().map(|&a| exact_row(a, 0.9)).collect();
    let s = EstimateSeries::from_rows("G", 1e-3, 0.95, rows).unwrap();
    assert!(!multiscale_certificate(&s, 1e-3, 3.0, 1.0, 2).unwrap().bootstrap_holds);

    let empty = EstimateSeries::from_rows("G", 1e-3, 0.95, vec![]).unwrap();
    assert!(matches!(multiscale_certificate(&empty, 1e-3, 3.0, 1.0, 2), Err(Error::InsufficientCoverage(_))));
    let s = EstimateSeries::from_rows("G", 1e-3, 0.95, vec![exact_row(2.0, 0.1), exact_row(4.0, 0.05)]).unwrap();
    assert!(multiscale_certificate(&s, 1e-3, 3.0, 1.0, 2).is_err());
}

#[test]
fn truncation_mass_shrinks_with_radius() {
    let m = ModelSpec::long_range(0.0, 0.0, 3.5).unwrap();
    let a = h_truncation_mass(&m, 64.0, 5.0, 0.05, 2).unwrap();
    let b = h_truncation_mass(&m, 64.0, 10.0, 0.05, 2).unwrap();
    assert!(a > b && b > 0.0);
    // Mark-free profile: Φ(x) = 1 ∧ x^{-δ}, so for d = 2 the radial integral is
    // ∫_{Kr}^∞ 2π ρ (ρ - 2r)^{-2δ} dρ, here evaluated in closed form.
    let (r, k, delta) = (8.0f64, 10.0, 3.5);
    let lo = k * r - 2.0 * r;
    let e = 2.0 * delta;
    let radial = 2.0 * std::f64::consts::PI * (lo.powf(2.0 - e) / (e - 2.0) + 2.0 * r * lo.powf(1.0 - e) / (e - 1.0));
    let expect = 0.05f64.powi(2) * std::f64::consts::PI * (2.0 * r).powi(2) * radial;
    assert!((b / expect - 1.0).abs() < 1e-4, "{b} vs {expect}");
}
