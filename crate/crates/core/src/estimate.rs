//! Estimation of the multifractal random walk parameters.
//!
//! Two routes are provided:
//!
//! * the covariance route regresses `Cov(ln|x[i]|, ln|x[i+k]|)` on `ln(k dt)`,
//!   which for an MRW is `lambda2 ln L - lambda2 ln(k dt)` up to the
//!   decorrelation length, giving `lambda2`, `L` and `Var(omega)`;
//! * the spectrum route measures `E|x_dt|^q ~ dt^zeta_q` on coarse-grained
//!   returns and fits `zeta_q = (q - q(q-2) lambda2) / 2`.

use alloc::vec::Vec;

use crate::error::{insufficient, invalid, Result};
use crate::fft::cross_correlations;
use crate::preprocess::coarse_grain;
use crate::regression::ols;
use crate::series::Series;

/// Lags with fewer valid pairs are dropped from a [`CovCurve`].
pub const MIN_PAIRS: usize = 100;
/// Minimum number of lags in a covariance regression.
pub const MIN_FIT_LAGS: usize = 8;
/// Default smallest lag (in samples) used in the covariance regression.
pub const DEFAULT_K_MIN: usize = 20;
/// Moment cells with fewer coarse samples are dropped.
pub const MIN_MOMENT_SAMPLES: usize = 50;
pub const MAX_MOMENT_ORDER: f64 = 5.0;
pub const MAX_SCALE: usize = 4096;

/// Work threshold (`n * max_lag`) below which lags are summed directly.
const DIRECT_WORK_LIMIT: usize = 1 << 22;

/// Empirical covariance of log-absolute values by lag.
#[derive(Debug, Clone, PartialEq)]
pub struct CovCurve {
    pub lags: Vec<usize>,
    pub cov: Vec<f64>,
    /// Number of valid pairs behind each lag.
    pub counts: Vec<usize>,
    /// Unmasked entries dropped because they were exactly zero.
    pub excluded_zeros: usize,
}

impl CovCurve {
    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    /// Builds a curve from explicit values, e.g. a model line.
    pub fn from_points(lags: Vec<usize>, cov: Vec<f64>) -> Result<Self> {
        if lags.len() != cov.len() {
            return Err(invalid!("lags and covariances differ in length"));
        }
        if lags.windows(2).any(|w| w[0] >= w[1]) || lags.first() == Some(&0) {
            return Err(invalid!("lags must be positive and strictly increasing"));
        }
        let counts = alloc::vec![usize::MAX; lags.len()];
        Ok(Self {
            lags,
            cov,
            counts,
            excluded_zeros: 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovMethod {
    /// Direct sums for small problems, FFT otherwise.
    #[default]
    Auto,
    Direct,
    Fft,
}

/// Sample covariance (`n - 1` denominator, pairwise means) of
/// `(ln|x[i]|, ln|x[i+k]|)` for `k in 1..=max_lag` over pairs where both
/// entries are unmasked and nonzero.
pub fn log_abs_cov(series: &Series, max_lag: usize) -> Result<CovCurve> {
    log_abs_cov_with(series, max_lag, CovMethod::Auto)
}

pub fn log_abs_cov_with(series: &Series, max_lag: usize, method: CovMethod) -> Result<CovCurve> {
    if max_lag == 0 {
        return Err(invalid!("max_lag must be positive"));
    }
    let n = series.len();
    if n < 10 * max_lag {
        return Err(insufficient!(
            "series length {n} is below 10 * max_lag = {}",
            10 * max_lag
        ));
    }
    let mut excluded_zeros = 0usize;
    let logs: Vec<Option<f64>> = series
        .values()
        .iter()
        .map(|v| match v {
            Some(x) if *x != 0.0 => Some(libm::log(libm::fabs(*x))),
            Some(_) => {
                excluded_zeros += 1;
                None
            }
            None => None,
        })
        .collect();
    // Centering on the global mean keeps the one-pass sums well conditioned.
    let valid: Vec<f64> = logs.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(insufficient!("no unmasked nonzero values"));
    }
    let center = valid.iter().sum::<f64>() / valid.len() as f64;
    let mask: Vec<f64> = logs
        .iter()
        .map(|v| if v.is_some() { 1.0 } else { 0.0 })
        .collect();
    let y: Vec<f64> = logs.iter().map(|v| v.map_or(0.0, |v| v - center)).collect();

    let use_fft = match method {
        CovMethod::Direct => false,
        CovMethod::Fft => true,
        CovMethod::Auto => n.saturating_mul(max_lag) > DIRECT_WORK_LIMIT,
    };
    let sums = if use_fft {
        lag_sums_fft(&mask, &y, max_lag)
    } else {
        lag_sums_direct(&mask, &y, max_lag)
    };

    let mut curve = CovCurve {
        lags: Vec::new(),
        cov: Vec::new(),
        counts: Vec::new(),
        excluded_zeros,
    };
    for (k, s) in sums.into_iter().enumerate().skip(1) {
        if s.count < MIN_PAIRS {
            continue;
        }
        let nk = s.count as f64;
        curve.lags.push(k);
        curve.cov.push((s.ab - s.a * s.b / nk) / (nk - 1.0));
        curve.counts.push(s.count);
    }
    if curve.is_empty() {
        return Err(insufficient!(
            "no lag up to {max_lag} has {MIN_PAIRS} valid pairs"
        ));
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, Default)]
struct LagSums {
    count: usize,
    a: f64,
    b: f64,
    ab: f64,
}

fn lag_sums_direct(mask: &[f64], y: &[f64], max_lag: usize) -> Vec<LagSums> {
    let n = y.len();
    (0..=max_lag)
        .map(|k| {
            let mut s = LagSums::default();
            for i in 0..n.saturating_sub(k) {
                if mask[i] != 0.0 && mask[i + k] != 0.0 {
                    s.count += 1;
                    s.a += y[i];
                    s.b += y[i + k];
                    s.ab += y[i] * y[i + k];
                }
            }
            s
        })
        .collect()
}

fn lag_sums_fft(mask: &[f64], y: &[f64], max_lag: usize) -> Vec<LagSums> {
    // y is already zero where masked.
    let corr = cross_correlations(&[mask, y], &[(0, 0), (1, 0), (0, 1), (1, 1)], max_lag);
    (0..=max_lag)
        .map(|k| LagSums {
            count: libm::round(corr[0][k]).max(0.0) as usize,
            a: corr[1][k],
            b: corr[2][k],
            ab: corr[3][k],
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Ok,
    /// Non-negative slope: `lambda2` clamped to 0, `L` undefined.
    ZeroSlope,
    /// Fitted `L` below `dt`: `Var(omega)` clamped to 0.
    ClampedVariance,
    /// Too few usable lags; only diagnostics are meaningful.
    NoFit,
}

impl FitStatus {
    pub fn is_degenerate(self) -> bool {
        self != FitStatus::Ok
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FitStatus::Ok => "ok",
            FitStatus::ZeroSlope => "zero_slope",
            FitStatus::ClampedVariance => "clamped_variance",
            FitStatus::NoFit => "no_fit",
        }
    }
}

/// `(lambda2, L, Var(omega))` from the covariance regression.
#[derive(Debug, Clone, PartialEq)]
pub struct MrwFit {
    pub lambda2: f64,
    pub lambda2_se: f64,
    /// Decorrelation length in minutes; absent when `lambda2 = 0`.
    pub l: Option<f64>,
    /// `lambda2 ln(L / dt)`.
    pub var_omega: f64,
    pub dt: f64,
    /// Smallest and largest lag (samples) in the regression.
    pub k_min: usize,
    pub k_max: usize,
    pub n_lags: usize,
    pub r2: f64,
    pub excluded_zeros: usize,
    pub status: FitStatus,
}

impl MrwFit {
    pub fn no_fit(k_min: usize, dt: f64, excluded_zeros: usize) -> Self {
        Self {
            lambda2: 0.0,
            lambda2_se: f64::NAN,
            l: None,
            var_omega: 0.0,
            dt,
            k_min,
            k_max: k_min,
            n_lags: 0,
            r2: 0.0,
            excluded_zeros,
            status: FitStatus::NoFit,
        }
    }
}

/// Regresses the covariance on `ln(k dt)` over `k_min <= k < k_cross`, where
/// `k_cross` is the first lag at or above `k_min` whose covariance is not
/// positive. Slope is `-lambda2`, intercept `lambda2 ln L`.
pub fn fit_lambda_l(curve: &CovCurve, k_min: usize, dt: f64) -> Result<MrwFit> {
    if k_min == 0 {
        return Err(invalid!("k_min must be positive"));
    }
    if !(dt > 0.0) {
        return Err(invalid!("dt must be positive"));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut k_max = k_min;
    for (&k, &c) in curve.lags.iter().zip(&curve.cov) {
        if k < k_min {
            continue;
        }
        if !(c > 0.0) {
            break;
        }
        x.push(libm::log(k as f64 * dt));
        y.push(c);
        k_max = k;
    }
    if x.len() < MIN_FIT_LAGS {
        return Err(insufficient!(
            "{} usable lags at or above k_min={k_min}, need {MIN_FIT_LAGS}",
            x.len()
        ));
    }
    let fit = ols(&x, &y)?;
    let mut out = MrwFit {
        lambda2: 0.0,
        lambda2_se: fit.slope_se,
        l: None,
        var_omega: 0.0,
        dt,
        k_min,
        k_max,
        n_lags: x.len(),
        r2: fit.r2,
        excluded_zeros: curve.excluded_zeros,
        status: FitStatus::ZeroSlope,
    };
    if fit.slope >= 0.0 {
        return Ok(out);
    }
    let lambda2 = -fit.slope;
    let l = libm::exp(fit.intercept / lambda2);
    let var = lambda2 * libm::log(l / dt);
    out.lambda2 = lambda2;
    out.l = Some(l);
    if var >= 0.0 {
        out.var_omega = var;
        out.status = FitStatus::Ok;
    } else {
        out.status = FitStatus::ClampedVariance;
    }
    Ok(out)
}

/// One `(q, dt)` cell of the moment table.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCell {
    pub q: f64,
    pub dt: usize,
    /// Sample mean of `|x_dt|^q`.
    pub moment: f64,
    pub count: usize,
    /// Top 1% of samples carry more than half of the moment.
    pub heavy_tail: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MomentTable {
    pub cells: Vec<MomentCell>,
}

/// `M(q, dt)` on non-overlapping coarse returns aggregated within sessions.
pub fn moment_scaling(series: &Series, q_list: &[f64], dt_list: &[usize]) -> Result<MomentTable> {
    for &q in q_list {
        if !(0.0..=MAX_MOMENT_ORDER).contains(&q) {
            return Err(invalid!("moment order {q} outside [0, {MAX_MOMENT_ORDER}]"));
        }
    }
    for &dt in dt_list {
        if !dt.is_power_of_two() || dt > MAX_SCALE {
            return Err(invalid!(
                "scale {dt} is not a power of two in [1, {MAX_SCALE}]"
            ));
        }
    }
    let mut table = MomentTable::default();
    for &dt in dt_list {
        let coarse = match coarse_grain(series, dt) {
            Ok(c) => c.valid_values(),
            Err(_) => continue,
        };
        if coarse.len() < MIN_MOMENT_SAMPLES {
            continue;
        }
        for &q in q_list {
            let mut powers: Vec<f64> = coarse
                .iter()
                .map(|x| {
                    if q == 0.0 {
                        1.0
                    } else {
                        libm::pow(libm::fabs(*x), q)
                    }
                })
                .collect();
            let total: f64 = powers.iter().sum();
            powers.sort_by(|a, b| b.total_cmp(a));
            let top = powers.len().div_ceil(100);
            let top_sum: f64 = powers[..top].iter().sum();
            table.cells.push(MomentCell {
                q,
                dt,
                moment: total / powers.len() as f64,
                count: powers.len(),
                heavy_tail: total > 0.0 && top_sum > 0.5 * total,
            });
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZetaEstimate {
    pub q: f64,
    pub zeta: f64,
    pub se: f64,
    pub r2: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZetaSpectrum {
    pub estimates: Vec<ZetaEstimate>,
    pub dt_min: usize,
    pub dt_max: usize,
    /// Single-parameter least-squares fit of the quadratic spectrum.
    pub lambda2_spec: f64,
    pub lambda2_spec_se: f64,
}

impl ZetaSpectrum {
    pub fn get(&self, q: f64) -> Option<&ZetaEstimate> {
        self.estimates.iter().find(|e| e.q == q)
    }
}

/// Minimum number of scales needed to estimate one exponent.
pub const MIN_ZETA_SCALES: usize = 4;

/// `zeta_q` is the OLS slope of `ln M(q, dt)` on `ln dt`; orders with fewer
/// than four usable scales are skipped.
pub fn fit_zeta(table: &MomentTable) -> Result<ZetaSpectrum> {
    let mut orders: Vec<f64> = Vec::new();
    for c in &table.cells {
        if !orders.contains(&c.q) {
            orders.push(c.q);
        }
    }
    let mut estimates = Vec::new();
    let (mut dt_min, mut dt_max) = (usize::MAX, 0);
    for &q in &orders {
        let cells: Vec<&MomentCell> = table
            .cells
            .iter()
            .filter(|c| c.q == q && c.moment > 0.0)
            .collect();
        if cells.len() < MIN_ZETA_SCALES {
            continue;
        }
        let x: Vec<f64> = cells.iter().map(|c| libm::log(c.dt as f64)).collect();
        let y: Vec<f64> = cells.iter().map(|c| libm::log(c.moment)).collect();
        let fit = ols(&x, &y)?;
        for c in &cells {
            dt_min = dt_min.min(c.dt);
            dt_max = dt_max.max(c.dt);
        }
        estimates.push(ZetaEstimate {
            q,
            zeta: fit.slope,
            se: fit.slope_se,
            r2: fit.r2,
            cells: cells.len(),
        });
    }
    if estimates.len() < 2 {
        return Err(insufficient!(
            "{} moment orders with {MIN_ZETA_SCALES}+ scales, need 2",
            estimates.len()
        ));
    }
    // zeta_q = q/2 - lambda2 w_q with w_q = q(q-2)/2.
    let (mut num, mut den, mut var_num) = (0.0, 0.0, 0.0);
    for e in &estimates {
        let w = e.q * (e.q - 2.0) / 2.0;
        num += w * (e.q / 2.0 - e.zeta);
        den += w * w;
        var_num += w * w * e.se * e.se;
    }
    if den == 0.0 {
        return Err(insufficient!(
            "only orders 0 and 2 present; the spectrum does not constrain lambda2"
        ));
    }
    Ok(ZetaSpectrum {
        estimates,
        dt_min,
        dt_max,
        lambda2_spec: (num / den).max(0.0),
        lambda2_spec_se: libm::sqrt(var_num) / den,
    })
}

/// `zeta_q = (q - q(q-2) lambda2) / 2`.
pub fn zeta_theoretical(q: f64, lambda2: f64) -> f64 {
    (q - q * (q - 2.0) * lambda2) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_curve(lambda2: f64, l: f64, max: usize) -> CovCurve {
        let lags: Vec<usize> = (1..=max).collect();
        let cov = lags
            .iter()
            .map(|&k| -lambda2 * libm::log(k as f64 / l))
            .collect();
        CovCurve::from_points(lags, cov).unwrap()
    }

    #[test]
    fn exact_curve_recovers_parameters() {
        let fit = fit_lambda_l(&model_curve(0.02, 1000.0, 2000), 20, 1.0).unwrap();
        assert_eq!(fit.status, FitStatus::Ok);
        assert!((fit.lambda2 - 0.02).abs() < 1e-14);
        assert!((fit.l.unwrap() / 1000.0 - 1.0).abs() < 1e-10);
        assert_eq!(fit.k_max, 999);
        assert!((fit.var_omega - 0.02 * libm::log(1000.0)).abs() < 1e-12);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn reproduces_reported_window_fit() {
        let fit = fit_lambda_l(&model_curve(0.018, 12975.43, 20_000), 20, 1.0).unwrap();
        assert!((fit.lambda2 - 0.018).abs() < 1e-12);
        assert!((fit.l.unwrap() - 12975.43).abs() < 1e-6);
    }

    #[test]
    fn coarse_lags_measure_l_in_minutes() {
        // Lags of 8-minute samples: cov(k) = -lambda2 ln(8k / L)
        let lags: Vec<usize> = (1..=500).collect();
        let cov = lags
            .iter()
            .map(|&k| -0.03 * libm::log(8.0 * k as f64 / 2048.0))
            .collect();
        let curve = CovCurve::from_points(lags, cov).unwrap();
        let fit = fit_lambda_l(&curve, 20, 8.0).unwrap();
        assert!((fit.l.unwrap() - 2048.0).abs() < 1e-8);
        assert!((fit.var_omega - 0.03 * libm::log(256.0)).abs() < 1e-12);
    }

    #[test]
    fn rising_curve_is_degenerate() {
        let lags: Vec<usize> = (1..=100).collect();
        let cov = lags.iter().map(|&k| 0.001 * k as f64).collect();
        let fit = fit_lambda_l(&CovCurve::from_points(lags, cov).unwrap(), 20, 1.0).unwrap();
        assert_eq!(fit.status, FitStatus::ZeroSlope);
        assert_eq!(fit.lambda2, 0.0);
        assert_eq!(fit.l, None);
        assert_eq!(fit.var_omega, 0.0);
    }

    #[test]
    fn too_few_lags() {
        // crosses zero at k = 25 -> 5 usable lags
        assert!(fit_lambda_l(&model_curve(0.02, 25.0, 100), 20, 1.0).is_err());
        assert!(fit_lambda_l(&model_curve(0.02, 1000.0, 26), 20, 1.0).is_err());
    }

    #[test]
    fn log_abs_cov_excludes_zeros_and_masks() {
        let mut vals: Vec<f64> = (0..2000).map(|i| 1.0 + ((i * 37) % 11) as f64).collect();
        vals[5] = 0.0;
        vals[6] = f64::NAN;
        let curve = log_abs_cov(&Series::from_values(&vals), 10).unwrap();
        assert_eq!(curve.excluded_zeros, 1);
        assert_eq!(curve.lags[0], 1);
        // pairs at lag 1: 1999 minus those touching positions 5 or 6
        assert_eq!(curve.counts[0], 1999 - 3);
    }

    #[test]
    fn log_abs_cov_preconditions() {
        let s = Series::from_values(&[1.0; 99]);
        assert!(log_abs_cov(&s, 10).is_err());
        assert!(log_abs_cov(&s, 0).is_err());
        // 150 points: lag 60 has only 90 pairs and is dropped
        let s = Series::from_values(&(0..1000).map(|i| (i % 7 + 1) as f64).collect::<Vec<_>>());
        let c = log_abs_cov(&s, 100).unwrap();
        assert_eq!(c.lags.len(), 100);
        let sparse: Vec<f64> = (0..1000)
            .map(|i| {
                if i < 150 {
                    1.0 + (i % 3) as f64
                } else {
                    f64::NAN
                }
            })
            .collect();
        let c = log_abs_cov(&Series::from_values(&sparse), 100).unwrap();
        assert_eq!(*c.lags.last().unwrap(), 50);
    }

    #[test]
    fn moments_of_constant_magnitude() {
        let vals: Vec<f64> = (0..1024)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let table = moment_scaling(&Series::from_values(&vals), &[0.0, 2.0], &[1, 4]).unwrap();
        let get = |q: f64, dt: usize| {
            table
                .cells
                .iter()
                .find(|c| c.q == q && c.dt == dt)
                .unwrap()
                .moment
        };
        assert_eq!(get(0.0, 1), 1.0);
        assert_eq!(get(0.0, 4), 1.0);
        assert_eq!(get(2.0, 1), 1.0);
        // alternating signs cancel in every block of 4
        assert_eq!(get(2.0, 4), 0.0);
    }

    #[test]
    fn moment_argument_checks() {
        let s = Series::from_values(&[1.0; 1000]);
        assert!(moment_scaling(&s, &[6.0], &[1]).is_err());
        assert!(moment_scaling(&s, &[1.0], &[3]).is_err());
        assert!(moment_scaling(&s, &[1.0], &[8192]).is_err());
        // 1000 / 32 = 31 samples < 50: cell omitted
        let t = moment_scaling(&s, &[1.0], &[16, 32]).unwrap();
        assert_eq!(t.cells.len(), 1);
    }

    #[test]
    fn heavy_tail_flag() {
        let mut vals = alloc::vec![0.01; 1000];
        vals[3] = 100.0;
        let t = moment_scaling(&Series::from_values(&vals), &[2.0], &[1]).unwrap();
        assert!(t.cells[0].heavy_tail);
    }

    #[test]
    fn spectrum_from_exact_power_laws() {
        let lambda2 = 0.03;
        let mut table = MomentTable::default();
        for q in [1.0, 2.0, 3.0, 4.0] {
            for e in 0..8 {
                let dt = 1usize << e;
                table.cells.push(MomentCell {
                    q,
                    dt,
                    moment: 2.0 * libm::pow(dt as f64, zeta_theoretical(q, lambda2)),
                    count: 1000,
                    heavy_tail: false,
                });
            }
        }
        let spec = fit_zeta(&table).unwrap();
        assert!((spec.lambda2_spec - lambda2).abs() < 1e-12);
        assert!((spec.get(2.0).unwrap().zeta - 1.0).abs() < 1e-12);
        assert_eq!((spec.dt_min, spec.dt_max), (1, 128));
    }

    #[test]
    fn spectrum_needs_two_orders() {
        let table = MomentTable {
            cells: (0..5)
                .map(|e| MomentCell {
                    q: 1.0,
                    dt: 1 << e,
                    moment: 1.0,
                    count: 100,
                    heavy_tail: false,
                })
                .collect(),
        };
        assert!(fit_zeta(&table).is_err());
    }

    #[test]
    fn theoretical_spectrum() {
        assert_eq!(zeta_theoretical(2.0, 0.3), 1.0);
        assert!((zeta_theoretical(1.0, 0.018) - 0.509).abs() < 1e-15);
        assert!((zeta_theoretical(4.0, 0.018) - 1.928).abs() < 1e-15);
        assert_eq!(zeta_theoretical(3.0, 0.0), 1.5);
    }
}
