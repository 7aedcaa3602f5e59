use mrw_core::estimate::{fit_lambda_l, log_abs_cov, moment_scaling};
use mrw_core::simulate::{
    MrwParams, MrwSimulator, OmoriParams, StationaryGaussian, SynthesisMethod,
};
use mrw_core::stats::{mean, sample_std};
use mrw_core::{fit_omori, simulate_omori_events, Series, ShockFrame};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn omega_sample_autocovariance_matches_model() {
    let p = MrwParams::new(1.0, 0.05, 256.0, 1.0).unwrap();
    let sim = MrwSimulator::new(p, 1 << 16).unwrap();
    assert_eq!(sim.method(), SynthesisMethod::CirculantEmbedding);
    let lags = [0usize, 1, 10, 100, 300];
    let mut acc = vec![Vec::new(); lags.len()];
    for seed in 0..20 {
        let w = sim.omega(seed);
        let m = mean(&w);
        for (j, &k) in lags.iter().enumerate() {
            let c = (0..w.len() - k)
                .map(|i| (w[i] - m) * (w[i + k] - m))
                .sum::<f64>()
                / (w.len() - k) as f64;
            acc[j].push(c);
        }
        assert!((m - (-p.omega_variance())).abs() < 0.1);
    }
    for (j, &k) in lags.iter().enumerate() {
        let est = mean(&acc[j]);
        let se = sample_std(&acc[j]) / (acc[j].len() as f64).sqrt();
        // The sample mean removes roughly the window-average covariance.
        let bias = 2.0 * p.lambda2 * 256.0 / (1 << 16) as f64;
        let want = p.omega_covariance(k);
        assert!(
            (est - want).abs() <= 4.0 * se + bias,
            "lag {k}: {est} vs {want}"
        );
    }
}

#[test]
fn white_noise_limit() {
    let p = MrwParams::new(2.0, 0.0, 100.0, 1.0).unwrap();
    let path = MrwSimulator::new(p, 1 << 14).unwrap().path(3);
    assert!(path.omega.iter().all(|&w| w == 0.0));
    let var = mean(&path.dx.iter().map(|x| x * x).collect::<Vec<_>>());
    assert!((var / 4.0 - 1.0).abs() < 0.05);
}

#[test]
fn dense_and_circulant_agree_in_distribution() {
    let acov: Vec<f64> = (0..64).map(|k| 0.9f64.powi(k)).collect();
    let circ = StationaryGaussian::new(&acov, 64).unwrap();
    let dense = StationaryGaussian::dense(&acov, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for g in [circ, dense] {
        let lag1: Vec<f64> = (0..2000)
            .map(|_| {
                let x = g.sample(&mut rng);
                x[10] * x[11]
            })
            .collect();
        assert!((mean(&lag1) - 0.9).abs() < 0.1);
    }
}

#[test]
fn covariance_route_recovers_parameters_on_one_path() {
    let p = MrwParams::new(1.0, 0.02, 4096.0, 1.0).unwrap();
    let path = MrwSimulator::new(p, 1 << 18).unwrap().path(11);
    let s = Series::from_values(&path.dx);
    let curve = log_abs_cov(&s, s.len() / 10).unwrap();
    let fit = fit_lambda_l(&curve, 20, 1.0).unwrap();
    assert!((0.014..=0.026).contains(&fit.lambda2), "{fit:?}");
    assert!((1024.0..=16384.0).contains(&fit.l.unwrap()), "{fit:?}");
}

#[test]
fn mrw_moments_scale_linearly_in_log() {
    let p = MrwParams::new(1.0, 0.018, 12975.43, 1.0).unwrap();
    let path = MrwSimulator::new(p, 1 << 17).unwrap().path(2);
    let s = Series::from_values(&path.dx);
    let dts: Vec<usize> = (0..=8).map(|e| 1 << e).collect();
    let table = moment_scaling(&s, &[1.0, 2.0, 3.0], &dts).unwrap();
    let spec = mrw_core::fit_zeta(&table).unwrap();
    for e in &spec.estimates {
        assert!(e.r2 > 0.99, "q={} r2={}", e.q, e.r2);
    }
}

#[test]
fn omori_round_trip() {
    let params = OmoriParams {
        beta_before: 0.3,
        beta_after: 0.7,
        c_before: 40.0,
        c_after: 1.0,
        horizon_before: 10_000.0,
        horizon_after: 10_000.0,
        strict_ordering: true,
    };
    let times = simulate_omori_events(&params, 4).unwrap();
    let fit = fit_omori(&ShockFrame::from_times(&times)).unwrap();
    let (b, a) = (fit.before.clone().unwrap(), fit.after.clone().unwrap());
    assert!(
        (b.beta - 0.3).abs() < 0.05 && (a.beta - 0.7).abs() < 0.05,
        "{b:?} {a:?}"
    );
    assert_eq!(fit.ordering_holds(), Some(true));
}
