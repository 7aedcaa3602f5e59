//! Production routines against slow, obviously-correct reimplementations.

use mrw_core::estimate::{log_abs_cov_with, CovMethod};
use mrw_core::simulate::{simulate_mrw, substream, MrwParams};
use mrw_core::stats::{normal_sf, sample_variance};
use mrw_core::{daily_large_count, detrend_local, Series, TradingCalendar};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

/// Two-pass covariance of the pairs at each lag, skipping masked and zero entries.
fn brute_log_abs_cov(values: &[Option<f64>], max_lag: usize) -> Vec<(usize, f64, usize)> {
    let mut out = Vec::new();
    for k in 1..=max_lag {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..values.len() - k {
            if let (Some(x), Some(y)) = (values[i], values[i + k]) {
                if x != 0.0 && y != 0.0 {
                    a.push(x.abs().ln());
                    b.push(y.abs().ln());
                }
            }
        }
        if a.len() < 100 {
            continue;
        }
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let c = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / (n - 1.0);
        out.push((k, c, a.len()));
    }
    out
}

fn test_series(n: usize, seed: u64) -> Vec<Option<f64>> {
    let p = MrwParams::new(1.0, 0.03, 512.0, 1.0).unwrap();
    let path = simulate_mrw(&p, n, seed).unwrap();
    let mut rng = substream(seed, 99);
    path.dx
        .iter()
        .map(|&x| match rng.random_range(0..50) {
            0 => None,
            1 => Some(0.0),
            _ => Some(x),
        })
        .collect()
}

#[test]
fn log_abs_cov_matches_double_loop() {
    let values = test_series(10_000, 5);
    let series = Series::from_options(values.clone());
    let expected = brute_log_abs_cov(&values, 1000);
    for method in [CovMethod::Direct, CovMethod::Fft, CovMethod::Auto] {
        let curve = log_abs_cov_with(&series, 1000, method).unwrap();
        assert_eq!(curve.lags.len(), expected.len());
        for (i, &(k, c, count)) in expected.iter().enumerate() {
            assert_eq!(curve.lags[i], k);
            assert_eq!(curve.counts[i], count);
            let rel = (curve.cov[i] - c).abs() / c.abs();
            assert!(rel <= 1e-10, "{method:?} lag {k}: {} vs {c}", curve.cov[i]);
        }
        let zeros = values.iter().filter(|v| **v == Some(0.0)).count();
        assert_eq!(curve.excluded_zeros, zeros);
    }
}

#[test]
fn detrend_removes_a_quarter_of_white_noise_variance() {
    // Residual variance after removing a line from blocks of 8 is (8 - 2) / 8.
    let mut rng = substream(17, 1);
    let x: Vec<f64> = (0..100_000)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let s = Series::from_values(&x);
    let d = detrend_local(&s, 8).unwrap();
    let ratio = sample_variance(&d.valid_values()) / sample_variance(&x);
    assert!((ratio / 0.75 - 1.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn gaussian_daily_counts_follow_tail_probability() {
    let days = 250;
    let minutes = 510;
    let cal = TradingCalendar::weekdays(
        chrono::NaiveDate::from_ymd_opt(2008, 1, 7).unwrap(),
        days,
        chrono::NaiveTime::from_hms_opt(8, 0, 0).unwrap(),
        minutes,
    );
    let mut rng = substream(23, 1);
    let values = (0..cal.len())
        .map(|_| Some(StandardNormal.sample(&mut rng)))
        .collect();
    let s = Series::new(Arc::new(cal), values).unwrap();
    let counts = daily_large_count(&s, 2.0).unwrap();
    assert_eq!(counts.len(), days);
    let mu = 2.0 * normal_sf(2.0) * minutes as f64;
    let inside = counts
        .iter()
        .filter(|c| (c.count as f64 - mu).abs() <= 3.0 * mu.sqrt())
        .count();
    assert!(
        inside as f64 >= 0.99 * days as f64,
        "{inside}/{days} days in band"
    );
    let mean = counts.iter().map(|c| c.count as f64).sum::<f64>() / days as f64;
    assert!(
        (mean - mu).abs() <= 3.0 * (mu / days as f64).sqrt(),
        "mean {mean} vs {mu}"
    );
}
