use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use trafficcast::holt_winters::{fit, forecast, initialize, smooth_step, HwFitOptions, HwParams, HwState};

fn seasonal(t: usize, m: usize) -> f64 {
    let pattern = [3.0, -1.0, 0.5, -2.5, 1.0, -1.0];
    pattern[t % m] - pattern[..m].iter().sum::<f64>() / m as f64
}

#[test]
fn noise_free_series_is_recovered() {
    let m = 6;
    let y: Vec<f64> = (0..120).map(|t| 10.0 + t as f64 + seasonal(t, m)).collect();
    let f = fit(&y[..100], m, &HwFitOptions::default()).unwrap();
    assert!(f.sse / 94.0 < 1e-3, "{}", f.sse);
    let pred = forecast(&f.state, 20);
    for (p, actual) in pred.iter().zip(&y[100..]) {
        assert!((p - actual).abs() < 1e-3, "{p} vs {actual}");
    }
}

#[test]
fn constant_series_has_zero_error() {
    let y = vec![7.5; 60];
    let f = fit(&y, 4, &HwFitOptions::default()).unwrap();
    assert_eq!(f.sse, 0.0);
    assert_eq!(forecast(&f.state, 3), vec![7.5; 3]);
}

#[test]
fn white_noise_prefers_long_averaging() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let normal = Normal::new(50.0, 1.0).unwrap();
    let y: Vec<f64> = (0..1000).map(|_| normal.sample(&mut rng)).collect();
    let f = fit(&y, 4, &HwFitOptions::default()).unwrap();
    assert!(f.params.alpha < 0.1, "{:?}", f.params);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    for p in forecast(&f.state, 4) {
        assert!((p - mean).abs() < 0.2, "{p} vs {mean}");
    }
}

#[test]
fn warm_start_skips_grid_and_stays_feasible() {
    let y: Vec<f64> = (0..80).map(|t| 5.0 + 0.1 * t as f64 + seasonal(t, 4) + ((t * 7) % 5) as f64 * 0.1).collect();
    let cold = fit(&y, 4, &HwFitOptions::default()).unwrap();
    let warm = fit(&y, 4, &HwFitOptions {
        warm_start: Some(cold.params),
        max_evals: None,
    })
    .unwrap();
    assert!(warm.sse <= cold.sse + 1e-9);
    assert!(warm.params.validate().is_ok());
}

#[test]
fn fit_is_deterministic() {
    let y: Vec<f64> = (0..60).map(|t| ((t * 31) % 17) as f64 + seasonal(t, 3)).collect();
    assert_eq!(fit(&y, 3, &HwFitOptions::default()).unwrap(), fit(&y, 3, &HwFitOptions::default()).unwrap());
}

#[test]
fn short_series_rejected() {
    assert!(fit(&[1.0; 17], 4, &HwFitOptions::default()).is_err());
}

/// Holt's linear method, written directly.
fn holt(y: &[f64], l0: f64, b0: f64, alpha: f64, beta: f64) -> Vec<(f64, f64)> {
    let (mut l, mut b) = (l0, b0);
    y.iter()
        .map(|&v| {
            let nl = alpha * v + (1.0 - alpha) * (l + b);
            b = beta * (nl - l) + (1.0 - beta) * b;
            l = nl;
            (l, b)
        })
        .collect()
}

proptest! {
    #[test]
    fn reduces_to_holt_and_ses(
        y in proptest::collection::vec(-50.0f64..50.0, 5..40),
        alpha in 0.0f64..=1.0,
        beta in 0.0f64..=1.0,
        l0 in -10.0f64..10.0,
        b0 in -2.0f64..2.0,
    ) {
        let m = 3;
        let p = HwParams::new(alpha, beta, 0.0, m).unwrap();
        let mut s = HwState { level: l0, trend: b0, seasonals: vec![0.0; m], t: 0 };
        let reference = holt(&y, l0, b0, alpha, beta);
        for (v, (l, b)) in y.iter().zip(&reference) {
            s = smooth_step(&s, *v, &p).unwrap();
            prop_assert!((s.level - l).abs() < 1e-9 && (s.trend - b).abs() < 1e-9);
            prop_assert!(s.seasonals.iter().all(|x| *x == 0.0));
        }

        // beta = 0 and zero trend: simple exponential smoothing
        let p = HwParams::new(alpha, 0.0, 0.0, m).unwrap();
        let mut s = HwState { level: l0, trend: 0.0, seasonals: vec![0.0; m], t: 0 };
        let mut ses = l0;
        for v in &y {
            s = smooth_step(&s, *v, &p).unwrap();
            ses = alpha * v + (1.0 - alpha) * ses;
            prop_assert!((s.level - ses).abs() < 1e-9);
            prop_assert_eq!(s.trend, 0.0);
        }
    }

    #[test]
    fn forecast_is_linear_in_state(
        level in -100.0f64..100.0,
        trend in -5.0f64..5.0,
        seasonals in proptest::collection::vec(-10.0f64..10.0, 2..8),
        a in 0.01f64..100.0,
    ) {
        let s = HwState { level, trend, seasonals: seasonals.clone(), t: 0 };
        let scaled = HwState {
            level: a * level,
            trend: a * trend,
            seasonals: seasonals.iter().map(|v| a * v).collect(),
            t: 0,
        };
        for (x, y) in forecast(&s, 20).iter().zip(forecast(&scaled, 20)) {
            prop_assert!((a * x - y).abs() < 1e-9 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn initial_seasonals_sum_to_zero(y in proptest::collection::vec(-100.0f64..100.0, 8..40), m in 2usize..5) {
        prop_assume!(y.len() >= 2 * m);
        let s = initialize(&y, m).unwrap();
        prop_assert_eq!(s.seasonals.len(), m);
        prop_assert!(s.seasonals.iter().sum::<f64>().abs() < 1e-9);
    }
}
